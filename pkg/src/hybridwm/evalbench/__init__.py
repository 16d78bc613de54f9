"""Metrics, experiment drivers, wall-clock benchmarking, and report emission."""

from .metrics import auroc, auroc_bruteforce, label_by_percentile, bootstrap_ci
from .experiments import closed_loop, eval_cell, beyond_tmax
from .bench import BenchRecord, bench_walltime, measure, validate_record, current_threads, BENCH_COLUMNS
from .reports import (
    EVAL_COLUMNS,
    write_csv,
    read_csv,
    render_error_map,
    render_shared_pair,
    read_graymap,
    read_sidecar,
    quantize,
)

__all__ = [
    "auroc", "auroc_bruteforce", "label_by_percentile", "bootstrap_ci",
    "closed_loop", "eval_cell", "beyond_tmax",
    "BenchRecord", "bench_walltime", "measure", "validate_record",
    "current_threads", "BENCH_COLUMNS",
    "EVAL_COLUMNS", "write_csv", "read_csv", "render_error_map",
    "render_shared_pair", "read_graymap", "read_sidecar", "quantize",
]
