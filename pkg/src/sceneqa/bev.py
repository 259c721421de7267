"""Bird's-eye-view geometry: box projection, rotated rectangles, crop and pool.

Grid convention: a BEV grid has shape (H, W, d). Cell (row r, column c)
covers [c, c+1) x [r, r+1) in grid units, so its center is (c + 0.5, r + 0.5)
with x along columns and y along rows.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from . import _kernels
from .scene import Box3D

STRATEGIES = {"mean": _kernels.MEAN, "max": _kernels.MAX}


class EmptyRegionError(ValueError):
    """No grid cell center falls inside the rectangle."""


@dataclass(frozen=True)
class BEVConfig:
    voxel_size: Tuple[float, float] = (0.075, 0.075)
    out_size_factor: int = 8
    pc_range: Tuple[float, ...] = (-54.0, -54.0, -5.0, 54.0, 54.0, 3.0)

    def __post_init__(self):
        if min(self.voxel_size) <= 0:
            raise ValueError(f"voxel size must be positive, got {self.voxel_size}")
        if int(self.out_size_factor) != self.out_size_factor or self.out_size_factor < 1:
            raise ValueError(f"out_size_factor must be a positive integer, got {self.out_size_factor}")
        if len(self.pc_range) != 6:
            raise ValueError("pc_range needs (xmin, ymin, zmin, xmax, ymax, zmax)")
        for lo, hi in zip(self.pc_range[:3], self.pc_range[3:]):
            if not lo < hi:
                raise ValueError(f"empty point cloud range {self.pc_range}")

    def cell_size(self, axis: int) -> float:
        return self.voxel_size[axis] * self.out_size_factor

    @property
    def grid_shape(self) -> Tuple[int, int]:
        """(H, W) of the feature grid covering the point cloud range."""
        w = round((self.pc_range[3] - self.pc_range[0]) / self.cell_size(0))
        h = round((self.pc_range[4] - self.pc_range[1]) / self.cell_size(1))
        return h, w


@dataclass(frozen=True)
class RotatedRect:
    cx: float
    cy: float
    hx: float
    hy: float
    yaw: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.cx, self.cy, self.hx, self.hy, self.yaw)):
            raise ValueError(f"non-finite rectangle {self}")
        if self.hx <= 0 or self.hy <= 0:
            raise ValueError(f"half extents must be positive, got {(self.hx, self.hy)}")


def project_box_to_bev(box: Box3D, config: BEVConfig) -> RotatedRect:
    """Map a box in meters to a rectangle in grid cells; yaw is unchanged."""
    sx, sy = config.cell_size(0), config.cell_size(1)
    rect = RotatedRect(
        cx=(box.x - config.pc_range[0]) / sx,
        cy=(box.y - config.pc_range[1]) / sy,
        hx=box.x_size / sx / 2.0,
        hy=box.y_size / sy / 2.0,
        yaw=box.yaw,
    )
    return rect


def rotated_vertices(rect: RotatedRect) -> np.ndarray:
    """Corners as a (4, 2) array, counterclockwise from (+hx, +hy) before rotation."""
    c, s = math.cos(rect.yaw), math.sin(rect.yaw)
    offsets = np.array(
        [[rect.hx, rect.hy], [-rect.hx, rect.hy], [-rect.hx, -rect.hy], [rect.hx, -rect.hy]]
    )
    rot = np.array([[c, -s], [s, c]])
    return offsets @ rot.T + np.array([rect.cx, rect.cy])


def contains(rect: RotatedRect, point: Sequence[float]) -> bool:
    """Dot-product membership test against the rectangle's own axes."""
    c, s = math.cos(rect.yaw), math.sin(rect.yaw)
    dx = point[0] - rect.cx
    dy = point[1] - rect.cy
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return abs(u) <= rect.hx and abs(v) <= rect.hy


def circumscribed_rect(rect: RotatedRect) -> RotatedRect:
    """Tight axis-aligned rectangle around the rotated corners."""
    v = rotated_vertices(rect)
    lo, hi = v.min(axis=0), v.max(axis=0)
    center = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    return RotatedRect(float(center[0]), float(center[1]), float(half[0]), float(half[1]), 0.0)


def crop_pool(grid: np.ndarray, rect: RotatedRect, strategy: str = "mean", kernels=None) -> np.ndarray:
    """Pool the features of every cell whose center lies in ``rect``.

    Args:
        grid: (H, W, d) feature array.
        rect: rectangle in grid units.
        strategy: "mean" or "max", applied channelwise.
        kernels: kernel module override; defaults to the selected backend.

    Raises:
        EmptyRegionError: no cell center is inside the rectangle.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown pooling strategy {strategy!r}")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3:
        raise ValueError(f"grid must be (H, W, d), got shape {grid.shape}")
    k = kernels if kernels is not None else _kernels
    out, count = k.pool_rotated(
        grid, rect.cx, rect.cy, rect.hx, rect.hy, math.cos(rect.yaw), math.sin(rect.yaw),
        STRATEGIES[strategy],
    )
    if count == 0:
        raise EmptyRegionError(f"no cell center inside {rect}")
    return np.asarray(out)


def object_embeddings(grid: np.ndarray, boxes: Sequence[Box3D], config: BEVConfig,
                      strategy: str = "mean", crop: str = "rotated") -> np.ndarray:
    """Embeddings for a batch of boxes, one row per box (N, d)."""
    rows: List[np.ndarray] = []
    for box in boxes:
        rect = project_box_to_bev(box, config)
        if crop == "circumscribed":
            rect = circumscribed_rect(rect)
        elif crop != "rotated":
            raise ValueError(f"unknown crop variant {crop!r}")
        rows.append(crop_pool(grid, rect, strategy))
    return np.stack(rows) if rows else np.zeros((0, np.shape(grid)[-1]))


# ------------------------------------------------------------------ grid I/O

_HEADER = struct.Struct("<QQQ")


def save_grid(path, grid: np.ndarray) -> Path:
    """Write ``grid`` as a raw little-endian file plus a JSON descriptor.

    The binary file holds three uint64 (H, W, d) followed by H*W*d float64
    values in row-major order; the descriptor sits next to it as ``.json``.
    """
    path = Path(path)
    grid = np.ascontiguousarray(grid, dtype="<f8")
    h, w, d = grid.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(h, w, d))
        f.write(grid.tobytes())
    desc = {"data_file": path.name, "height": h, "width": w, "channels": d,
            "dtype": "float64", "byte_order": "little", "layout": "row-major (H, W, d)"}
    path.with_suffix(".json").write_text(json.dumps(desc, indent=2) + "\n")
    return path


def load_grid(path) -> np.ndarray:
    """Read a grid from its binary file or its JSON descriptor."""
    path = Path(path)
    if path.suffix == ".json":
        desc = json.loads(path.read_text())
        path = path.parent / desc["data_file"]
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated grid header")
    h, w, d = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * h * w * d
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for a {h}x{w}x{d} grid, found {len(raw)}")
    grid = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(h, w, d)
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{path}: grid contains non-finite values")
    return grid.astype(np.float64)
