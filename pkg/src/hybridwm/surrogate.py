"""Checkpoint-backed surrogate: a forward model in normalized state space.

Every trust signal and deployment mode talks to the `predict_norm(state, T)`
interface; wrappers with the same duck type (exact-solver wrapper, identity
model, hand-built toys) are interchangeable with a trained network.

Checkpoint file layout (little-endian):

    magic "HWMM" | u32 version=1 | u32 json length | UTF-8 JSON descriptor
    u32 channels | f64 means | f64 stds            (normalization block)
    u64 weight count | f32 weights | u32 CRC32 of everything preceding
"""

import json
import os
import struct
import zlib

import numpy as np

from .data.norm import NormStats, denormalize, normalize
from .errors import (
    BadMagicError,
    ChecksumError,
    ShapeMismatchError,
    TruncatedFileError,
    VersionMismatchError,
)
from .tnn import SurrogateNet

CKPT_MAGIC = b"HWMM"
CKPT_VERSION = 1


class Surrogate:
    def __init__(self, net, norm, ladder, env_name, meta=None):
        self.net = net
        self.norm = norm
        self.ladder = tuple(sorted(int(t) for t in ladder))
        self.env_name = env_name
        self.meta = dict(meta or {})

    @property
    def is_multi_horizon(self):
        return len(self.ladder) > 1

    @property
    def forward_calls(self):
        return self.net.forward_calls

    def predict_norm(self, state_norm, horizon):
        return self.net.predict(np.asarray(state_norm, dtype=np.float32), int(horizon))

    def predict(self, state, horizon):
        """Raw-space prediction: normalize, forward, denormalize."""
        sn = normalize(np.asarray(state, dtype=np.float32), self.norm)
        return denormalize(self.predict_norm(sn, horizon), self.norm)


def write_checkpoint(surrogate, path):
    desc = {
        "arch": surrogate.net.arch,
        "ladder": list(surrogate.ladder),
        "env": surrogate.env_name,
        "meta": surrogate.meta,
    }
    jb = json.dumps(desc, sort_keys=True).encode("utf-8")
    weights = surrogate.net.flat_weights().astype("<f4")
    parts = [
        CKPT_MAGIC,
        struct.pack("<I", CKPT_VERSION),
        struct.pack("<I", len(jb)),
        jb,
        struct.pack("<I", surrogate.norm.channels),
        surrogate.norm.mean.astype("<f8").tobytes(),
        surrogate.norm.std.astype("<f8").tobytes(),
        struct.pack("<Q", weights.size),
        weights.tobytes(),
    ]
    blob = b"".join(parts)
    crc = zlib.crc32(blob) & 0xFFFFFFFF
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
        fh.write(struct.pack("<I", crc))
    os.replace(tmp, path)


def read_checkpoint(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    pos = 0

    def take(n, what):
        nonlocal pos
        if pos + n > len(buf):
            raise TruncatedFileError(f"{path}: ends inside {what}")
        out = buf[pos : pos + n]
        pos += n
        return out

    if take(4, "magic") != CKPT_MAGIC:
        raise BadMagicError(f"{path}: bad checkpoint magic")
    (version,) = struct.unpack("<I", take(4, "version"))
    if version != CKPT_VERSION:
        raise VersionMismatchError(f"{path}: checkpoint version {version}")
    (jlen,) = struct.unpack("<I", take(4, "descriptor length"))
    desc = json.loads(take(jlen, "descriptor").decode("utf-8"))
    (channels,) = struct.unpack("<I", take(4, "channel count"))
    mean = np.frombuffer(take(8 * channels, "means"), dtype="<f8").copy()
    std = np.frombuffer(take(8 * channels, "stds"), dtype="<f8").copy()
    (wcount,) = struct.unpack("<Q", take(8, "weight count"))
    weights = np.frombuffer(take(4 * wcount, "weights"), dtype="<f4").copy()
    (crc_stored,) = struct.unpack("<I", take(4, "checksum"))
    crc = zlib.crc32(buf[: pos - 4]) & 0xFFFFFFFF
    if crc != crc_stored:
        raise ChecksumError(f"{path}: checkpoint CRC mismatch")
    net = SurrogateNet(desc["arch"])
    expected = sum(p.data.size for p in net.param_list())
    if wcount != expected:
        raise ShapeMismatchError(f"{path}: {wcount} weights for a net of {expected}")
    net.load_flat_weights(weights)
    return Surrogate(
        net=net,
        norm=NormStats(mean=mean, std=std),
        ladder=desc["ladder"],
        env_name=desc["env"],
        meta=desc.get("meta", {}),
    )
