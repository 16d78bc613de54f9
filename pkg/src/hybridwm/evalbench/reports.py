"""CSV emission and grayscale map rendering.

Error maps are written as 8-bit binary PGM (P5), min-max scaled per image, with
the scale recorded in a sidecar text file. Two maps meant to share a color
scale are rendered through one shared sidecar.
"""

import csv

import numpy as np

EVAL_COLUMNS = ("env", "split", "horizon", "method", "auroc", "ci_lo", "ci_hi", "n")


def write_csv(rows, columns, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def quantize(field, lo, hi):
    f = np.asarray(field, dtype=np.float64)
    if hi <= lo:
        return np.full(f.shape, 128, dtype=np.uint8)
    scaled = np.clip((f - lo) / (hi - lo), 0.0, 1.0)
    return np.rint(scaled * 255.0).astype(np.uint8)


def write_sidecar(path, lo, hi, images):
    with open(path, "w") as fh:
        fh.write(f"min {lo!r}\nmax {hi!r}\n")
        for img in images:
            fh.write(f"image {img}\n")


def render_error_map(field, path, scale=None, sidecar_path=None):
    """One graymap with its own scale sidecar (unless a shared scale is passed)."""
    f = np.asarray(field, dtype=np.float64)
    lo, hi = scale if scale is not None else (float(f.min()), float(f.max()))
    img = quantize(f, lo, hi)
    _write_pgm(img, path)
    if sidecar_path is None:
        sidecar_path = path + ".scale.txt"
    if scale is None:
        write_sidecar(sidecar_path, lo, hi, [path])
    return lo, hi


def render_shared_pair(field_a, field_b, path_a, path_b, sidecar_path):
    """Two maps on one color scale (e.g. e_hat next to the true error field)."""
    a = np.asarray(field_a, dtype=np.float64)
    b = np.asarray(field_b, dtype=np.float64)
    lo = float(min(a.min(), b.min()))
    hi = float(max(a.max(), b.max()))
    _write_pgm(quantize(a, lo, hi), path_a)
    _write_pgm(quantize(b, lo, hi), path_b)
    write_sidecar(sidecar_path, lo, hi, [path_a, path_b])
    return lo, hi


def _write_pgm(img, path):
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_graymap(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM")
    parts = data.split(b"\n", 3)
    w, h = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    if maxval != 255:
        raise ValueError(f"{path}: expected 8-bit graymap")
    return np.frombuffer(parts[3][: w * h], dtype=np.uint8).reshape(h, w)


def read_sidecar(path):
    out = {"images": []}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.strip().partition(" ")
            if key in ("min", "max"):
                out[key] = float(value)
            elif key == "image":
                out["images"].append(value)
    return out
