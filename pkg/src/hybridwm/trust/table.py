"""TrustScoreTable: one row per (trajectory, split, horizon, method)."""

import csv

COLUMNS = ("traj_id", "split", "horizon", "method", "score", "true_rmse", "cost_seconds")


def write_table(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([
                r["traj_id"], r["split"], r["horizon"], r["method"],
                repr(float(r["score"])), repr(float(r["true_rmse"])),
                repr(float(r.get("cost_seconds", 0.0))),
            ])


def read_table(path):
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({
                "traj_id": int(r["traj_id"]),
                "split": r["split"],
                "horizon": int(r["horizon"]),
                "method": r["method"],
                "score": float(r["score"]),
                "true_rmse": float(r["true_rmse"]),
                "cost_seconds": float(r["cost_seconds"]),
            })
    return rows


def select(rows, split=None, horizon=None, method=None):
    out = rows
    if split is not None:
        out = [r for r in out if r["split"] == split]
    if horizon is not None:
        out = [r for r in out if r["horizon"] == horizon]
    if method is not None:
        out = [r for r in out if r["method"] == method]
    return out
