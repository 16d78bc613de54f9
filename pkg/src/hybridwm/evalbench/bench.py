"""Wall-clock benchmarking with an explicit thread-count protocol.

Timings are medians over repeats after discarded warmup runs; if the median is
too close to the timer resolution, the repeat count escalates automatically and
the record is flagged. Records missing the thread or repeat fields fail
validation.
"""

import os
import time
from dataclasses import dataclass, asdict

import numpy as np

from .. import envs
from ..errors import ConfigError

BENCH_COLUMNS = (
    "env", "horizon", "batch_mode", "surrogate_seconds", "solver_seconds",
    "speedup", "threads", "repeats", "escalated",
)


@dataclass
class BenchRecord:
    env: str
    horizon: int
    batch_mode: str
    surrogate_seconds: float
    solver_seconds: float
    speedup: float
    threads: int
    repeats: int
    escalated: bool

    def as_row(self):
        return asdict(self)


def validate_record(row):
    for key in BENCH_COLUMNS:
        if row.get(key) in (None, ""):
            raise ConfigError(f"benchmark record missing field {key!r}")
    return True


def current_threads():
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        if os.environ.get(var):
            return int(os.environ[var])
    return os.cpu_count() or 1


def measure(fn, repeats, warmup=1, max_escalations=6):
    """Median wall time of fn(); returns (seconds, repeats_used, escalated)."""
    resolution = time.get_clock_info("perf_counter").resolution
    floor = 50.0 * resolution
    escalated = False
    for _ in range(max_escalations + 1):
        for _ in range(warmup):
            fn()
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        med = float(np.median(times))
        if med >= floor:
            return med, repeats, escalated
        repeats *= 4
        escalated = True
    return med, repeats, escalated


def bench_walltime(model, solver_params, state, horizons, repeats=5, warmup=1, threads=None):
    """Surrogate forward vs reference solver advance, per horizon, same process."""
    threads = threads if threads is not None else current_threads()
    env_name = envs.ENV_NAMES[envs.env_id_of(solver_params)]
    records = []
    s32 = np.asarray(state, dtype=np.float32)
    for t in horizons:
        sur, rep_s, esc_s = measure(lambda: model.predict(s32, t), repeats, warmup)

        def solve():
            cur = s32
            for _ in range(t):
                cur = envs.advance_frame(cur.astype(np.float64), solver_params).astype(np.float32)
            return cur

        sol, rep_r, esc_r = measure(solve, repeats, warmup)
        records.append(BenchRecord(
            env=env_name, horizon=int(t), batch_mode="B1",
            surrogate_seconds=sur, solver_seconds=sol, speedup=sol / sur,
            threads=threads, repeats=max(rep_s, rep_r), escalated=esc_s or esc_r,
        ))
    return records
