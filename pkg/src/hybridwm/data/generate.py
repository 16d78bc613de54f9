"""Trajectory-set generation: resumable, manifest-tracked, deterministic."""

import json
import os

from .. import envs
from ..errors import SolverAbortError
from . import trajio
from .splits import sample_params, trajectory_rng

MANIFEST_NAME = "manifest.json"


def split_dir(base_dir, env, split):
    return os.path.join(base_dir, env, split)


def traj_filename(split, index):
    return f"{split}_{index:05d}.hwm"


def generate_split(spec, out_dir):
    """Generate spec.count trajectories under out_dir; skip existing valid files.

    Returns the manifest dict. Solver aborts mark the trajectory failed in the
    manifest and generation continues.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for index in range(spec.count):
        fname = traj_filename(spec.split, index)
        path = os.path.join(out_dir, fname)
        rng = trajectory_rng(spec, index)
        params, kind, kwargs = sample_params(spec, index, rng)
        entry = {
            "file": fname,
            "seed": spec.seed_start + index,
            "params": envs.params_to_dict(params),
            "status": "ok",
            "crc": None,
        }
        if os.path.exists(path) and trajio.valid_trajectory_file(path):
            entry["crc"] = _crc_of(path)
            entries.append(entry)
            continue
        try:
            ic = envs.make_initial(params, kind, rng, **kwargs)
            traj = envs.rollout(params, ic, spec.frames)
            entry["crc"] = trajio.write_trajectory(traj, path)
        except SolverAbortError as ex:
            entry["status"] = "failed"
            entry["error"] = str(ex)
        entries.append(entry)
    manifest = {
        "env": spec.env,
        "split": spec.split,
        "frames": spec.frames,
        "count": spec.count,
        "seed_start": spec.seed_start,
        "root_seed": spec.root_seed,
        "files": entries,
    }
    with open(os.path.join(out_dir, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


def _crc_of(path):
    import struct

    with open(path, "rb") as fh:
        fh.seek(-4, os.SEEK_END)
        return struct.unpack("<I", fh.read(4))[0]


def load_manifest(out_dir):
    with open(os.path.join(out_dir, MANIFEST_NAME)) as fh:
        return json.load(fh)


def load_split(out_dir, expect_env_id=None, status="ok"):
    """All trajectories of a generated split, in manifest order."""
    manifest = load_manifest(out_dir)
    out = []
    for entry in manifest["files"]:
        if entry["status"] != status:
            continue
        out.append(trajio.read_trajectory(os.path.join(out_dir, entry["file"]), expect_env_id))
    return out
