"""Deterministic file emission: CSV, JSON, and binary PPM heatmaps.

Reproducibility contract: identical inputs produce byte-identical files.
CSV cells are formatted with '%.12e', '.' decimal separator, Unix line
endings, one header line.  JSON is emitted with sorted keys and 2-space
indentation.  Images are binary PPM (P6, 8-bit) through a fixed
monochrome-to-hot 256-entry lookup table (see `colormap`), normalized by the
maximum value of the rendered array; CSV stays the authoritative output.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "format_cell",
    "write_csv",
    "write_json",
    "colormap",
    "write_ppm",
    "density_image",
    "polyline_image",
]


def format_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12e" % float(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(c) for c in row) + "\n")


def write_json(path, payload) -> None:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def colormap() -> np.ndarray:
    """256-entry monochrome-to-hot RGB lookup table (uint8).

    Channel laws over t = i/255: red = min(1, 3t), green = min(1, max(0,
    3t - 1)), blue = min(1, max(0, 3t - 2)), each quantized by round(255 c).
    The table is reproduced in docs/colormap.txt.
    """
    t = np.arange(256) / 255.0
    r = np.clip(3.0 * t, 0.0, 1.0)
    g = np.clip(3.0 * t - 1.0, 0.0, 1.0)
    b = np.clip(3.0 * t - 2.0, 0.0, 1.0)
    return np.round(255.0 * np.stack([r, g, b], axis=1)).astype(np.uint8)


def write_ppm(path, rgb: np.ndarray) -> None:
    """Binary PPM (P6, maxval 255); rgb has shape (height, width, 3)."""
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("rgb must have shape (height, width, 3)")
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def _apply_lut(scalar: np.ndarray) -> np.ndarray:
    top = float(scalar.max())
    if top <= 0.0:
        idx = np.zeros(scalar.shape, dtype=np.uint8)
    else:
        idx = np.clip(np.floor(scalar / top * 255.0), 0, 255).astype(np.uint8)
    return colormap()[idx]


def density_image(
    r: np.ndarray,
    phi: np.ndarray,
    density: np.ndarray,
    size: int = 512,
) -> np.ndarray:
    """Cartesian heatmap of a polar density sample, (size, size, 3) uint8.

    Pixels map to the square [-r_max, r_max]^2 (row 0 at the top, +y up) and
    are filled by bilinear interpolation in (log r, phi), with phi reduced to
    the principal branch [phi_min, phi_min + 2 pi).  For states with a
    non-integer number of angular periods per turn this branch restriction
    shows a seam; the CSV output carries the full covering-range data.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r_max = float(r.max())
    axis = np.linspace(-r_max, r_max, size)
    xx, yy = np.meshgrid(axis, -axis)  # row 0 at +y
    rr = np.hypot(xx, yy)
    theta = np.arctan2(yy, xx)
    log_r = np.log(r)
    span = phi[-1] - phi[0] + (phi[1] - phi[0] if phi.size > 1 else 2 * math.pi)
    theta = phi[0] + np.mod(theta - phi[0], 2.0 * math.pi)

    inside = (rr >= r[0]) & (rr <= r_max)
    out = np.zeros((size, size))
    if np.any(inside):
        lr = np.log(np.where(inside, rr, r[0]))
        i = np.clip(np.searchsorted(log_r, lr) - 1, 0, r.size - 2)
        tr = (lr - log_r[i]) / (log_r[i + 1] - log_r[i])
        dphi = span / phi.size
        jf = (theta - phi[0]) / dphi
        j = np.clip(np.floor(jf).astype(int), 0, phi.size - 1)
        tp = jf - j
        j2 = (j + 1) % phi.size
        val = (
            density[i, j] * (1 - tr) * (1 - tp)
            + density[i + 1, j] * tr * (1 - tp)
            + density[i, j2] * (1 - tr) * tp
            + density[i + 1, j2] * tr * tp
        )
        out[inside] = val[inside]
    return _apply_lut(out)


def polyline_image(points_xy: np.ndarray, size: int = 512, pad: float = 1.05) -> np.ndarray:
    """Raster image of a sampled curve, (size, size, 3) uint8.

    Each sample marks its nearest pixel on a square canvas centered at the
    origin and scaled to the largest |coordinate| times `pad`; row 0 is the
    top of the +y half.
    """
    pts = np.asarray(points_xy, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points_xy must have shape (N, 2)")
    extent = float(np.max(np.abs(pts))) * pad
    if extent == 0.0:
        extent = 1.0
    cols = np.clip(((pts[:, 0] / extent) * 0.5 + 0.5) * (size - 1), 0, size - 1)
    rows = np.clip((0.5 - (pts[:, 1] / extent) * 0.5) * (size - 1), 0, size - 1)
    canvas = np.zeros((size, size))
    canvas[np.round(rows).astype(int), np.round(cols).astype(int)] = 1.0
    return _apply_lut(canvas)
