"""Reference kernels in Python/numpy; used when the compiled core is absent."""

import math

import numpy as np

from .relations import COINCIDENT_EPS, DegeneratePairError, bin_relation

MEAN, MAX = 0, 1


def relation_matrix(centers, fx, fy):
    """Pairwise relation indices; entry (i, j) says where j lies from i."""
    centers = np.asarray(centers, dtype=np.float64)
    n = centers.shape[0]
    out = np.full((n, n), -1, dtype=np.int8)
    pts = centers.tolist()
    for i in range(n):
        xi, yi = pts[i]
        for j in range(n):
            if i == j:
                continue
            dx = pts[j][0] - xi
            dy = pts[j][1] - yi
            if math.sqrt(dx * dx + dy * dy) < COINCIDENT_EPS:
                raise DegeneratePairError(f"degenerate pair: nodes {i} and {j} share a center")
            theta = math.degrees(math.atan2(fx * dy - fy * dx, fx * dx + fy * dy))
            if theta <= -180.0:
                theta = 180.0
            out[i, j] = bin_relation(theta).index
    return out


def _window(center, extent, size):
    lo = max(int(math.floor(center - extent - 0.5)), 0)
    hi = min(int(math.ceil(center + extent - 0.5)), size - 1)
    return lo, hi


def pool_rotated(data, cx, cy, hx, hy, cos_yaw, sin_yaw, mode):
    """Pool the cells of ``data`` (H, W, d) whose centers lie in the rectangle.

    Cell (row r, column c) has center (c + 0.5, r + 0.5). Returns the pooled
    vector and the number of cells inside; with zero cells the vector is
    all-NaN and the caller decides what to do.
    """
    h, w, d = data.shape
    ex = abs(hx * cos_yaw) + abs(hy * sin_yaw)
    ey = abs(hx * sin_yaw) + abs(hy * cos_yaw)
    c0, c1 = _window(cx, ex, w)
    r0, r1 = _window(cy, ey, h)
    if c0 > c1 or r0 > r1:
        return np.full(d, np.nan), 0
    dx = (np.arange(c0, c1 + 1, dtype=np.float64) + 0.5 - cx)[None, :]
    dy = (np.arange(r0, r1 + 1, dtype=np.float64) + 0.5 - cy)[:, None]
    u = dx * cos_yaw + dy * sin_yaw
    v = -dx * sin_yaw + dy * cos_yaw
    mask = (np.abs(u) <= hx) & (np.abs(v) <= hy)
    count = int(mask.sum())
    if count == 0:
        return np.full(d, np.nan), 0
    cells = data[r0 : r1 + 1, c0 : c1 + 1][mask]
    if mode == MAX:
        return cells.max(axis=0), count
    return cells.mean(axis=0), count
