"""Bit-exact trajectory persistence.

Little-endian layout:

    magic "HWM1" | u32 version=1 | u8 env id | u8*3 reserved
    u32 frames | u32 channels | u32 H | u32 W      (ball: 9, 1, 1)
    f64 dt | u32 param count | per param [u16 name length, name, f64 value]
    payload f32, frame-major row-major | u32 CRC32 of everything preceding
"""

import os
import struct
import zlib

import numpy as np

from ..envs import Trajectory
from ..errors import (
    BadMagicError,
    ChecksumError,
    EnvMismatchError,
    TruncatedFileError,
    VersionMismatchError,
)

MAGIC = b"HWM1"
VERSION = 1


def _frame_dims(traj):
    if traj.frames.ndim == 2:          # ball: (N, 9)
        return traj.frames.shape[1], 1, 1
    n, c, h, w = traj.frames.shape
    return c, h, w


def write_trajectory(traj, path):
    c, h, w = _frame_dims(traj)
    parts = [MAGIC, struct.pack("<I", VERSION), struct.pack("<B3x", traj.env_id)]
    parts.append(struct.pack("<IIII", traj.n_frames, c, h, w))
    parts.append(struct.pack("<d", traj.dt))
    parts.append(struct.pack("<I", len(traj.params)))
    for name, value in traj.params.items():
        nb = name.encode("utf-8")
        parts.append(struct.pack("<H", len(nb)))
        parts.append(nb)
        parts.append(struct.pack("<d", float(value)))
    payload = np.ascontiguousarray(traj.frames, dtype="<f4")
    parts.append(payload.tobytes())
    blob = b"".join(parts)
    crc = zlib.crc32(blob) & 0xFFFFFFFF
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
        fh.write(struct.pack("<I", crc))
    os.replace(tmp, path)
    return crc


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.buf):
            raise TruncatedFileError(f"file ends inside {what}")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_trajectory(path, expect_env_id=None):
    with open(path, "rb") as fh:
        buf = fh.read()
    r = _Reader(buf)
    if r.take(4, "magic") != MAGIC:
        raise BadMagicError(f"{path}: bad magic")
    (version,) = r.unpack("<I", "version")
    if version != VERSION:
        raise VersionMismatchError(f"{path}: format version {version}, expected {VERSION}")
    (env_id,) = r.unpack("<B3x", "env id")
    frames, c, h, w = r.unpack("<IIII", "dimensions")
    (dt,) = r.unpack("<d", "dt")
    (n_params,) = r.unpack("<I", "param count")
    params = {}
    for _ in range(n_params):
        (nlen,) = r.unpack("<H", "param name length")
        name = r.take(nlen, "param name").decode("utf-8")
        (value,) = r.unpack("<d", "param value")
        params[name] = value
    n_values = frames * c * h * w
    payload = r.take(4 * n_values, "frame payload")
    (crc_stored,) = r.unpack("<I", "checksum")
    crc = zlib.crc32(buf[: r.pos - 4]) & 0xFFFFFFFF
    if crc != crc_stored:
        raise ChecksumError(f"{path}: CRC mismatch (stored {crc_stored:#x}, computed {crc:#x})")
    if expect_env_id is not None and env_id != expect_env_id:
        raise EnvMismatchError(f"{path}: env id {env_id}, expected {expect_env_id}")
    arr = np.frombuffer(payload, dtype="<f4").reshape(frames, c, h, w)
    if h == 1 and w == 1:
        arr = arr.reshape(frames, c)
    return Trajectory(env_id=env_id, dt=dt, params=params, frames=arr.copy())


def valid_trajectory_file(path):
    """True iff the file parses and its checksum matches (for resumable generation)."""
    try:
        read_trajectory(path)
        return True
    except (OSError, BadMagicError, VersionMismatchError, TruncatedFileError, ChecksumError):
        return False
