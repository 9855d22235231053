"""Orthographic ±x depth textures over the design-space footprint.

The normative semantics is ray sampling: texel (u, v) is the ray with
constant (y, z) fixed at the texel center; the +x view records the maximum
x over all ray/triangle intersections (the surface nearest a +x camera),
the -x view the minimum. The compiled rasterizer evaluates exactly this:
barycentric depth interpolation at a texel center equals the ray/plane
intersection, with an inclusive point-in-triangle rule.

Reduction pools every s-by-s texel footprint into one block column index,
keeping only surface-hitting texels. Boundary depths snap toward the
camera (+x: higher block index, -x: lower), so the occupied interval is
never under-estimated.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from . import _kernels
from .errors import DimensionMismatch
from .mesh_core import TriangleMesh

# Column index for an all-miss footprint.
EMPTY = -1

# Boundary snap in block units; covers depth-interpolation FP noise while the
# snap direction matches the conservative boundary rule, so it can only grow
# the occupied interval (by 1e-6 mm at default block sizes).
_BOUNDARY_EPS = 1e-7


class Direction(Enum):
    PLUS_X = "+x"
    MINUS_X = "-x"


@dataclass(frozen=True)
class DesignSpace:
    """Block grid for the case interior, centered on the origin.

    nx, ny, nz blocks of size bx, by, bz mm; block (i, j, k) occupies
    [x_min + i*bx, x_min + (i+1)*bx] and likewise in y, z.
    """

    nx: int
    ny: int
    nz: int
    bx: float
    by: float
    bz: float

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("block resolution must be positive")
        if min(self.bx, self.by, self.bz) <= 0 or not np.isfinite([self.bx, self.by, self.bz]).all():
            raise ValueError("block sizes must be positive and finite")

    @property
    def width(self) -> float:
        return self.nx * self.bx

    @property
    def height(self) -> float:
        return self.ny * self.by

    @property
    def depth(self) -> float:
        return self.nz * self.bz

    @property
    def x_min(self) -> float:
        return -self.width / 2.0

    @property
    def y_min(self) -> float:
        return -self.height / 2.0

    @property
    def z_min(self) -> float:
        return -self.depth / 2.0

    @property
    def total_blocks(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def block_volume(self) -> float:
        return self.bx * self.by * self.bz

    def block_centers_x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.bx

    def block_centers_y(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.by

    def block_centers_z(self) -> np.ndarray:
        return self.z_min + (np.arange(self.nz) + 0.5) * self.bz


DEFAULT_SPACE = DesignSpace(nx=30, ny=18, nz=18, bx=15.0, by=15.0, bz=22.0)
DEFAULT_SUPERSAMPLE = 8


@dataclass
class DepthTexture:
    """First-hit depth per texel; NaN marks a ray that misses the object.

    values has shape (nz*s, ny*s) indexed [v, u] with u along y, v along z.
    """

    direction: Direction
    supersample: int
    values: np.ndarray

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


@dataclass
class ColumnDepthMap:
    """Per-(j, k) block index of the visible surface, EMPTY where unseen."""

    direction: Direction
    indices: np.ndarray  # (ny, nz) int32, EMPTY = -1

    def is_empty(self) -> np.ndarray:
        return self.indices == EMPTY


def render_depth_pair(
    mesh: TriangleMesh, space: DesignSpace, supersample: int = DEFAULT_SUPERSAMPLE
) -> Tuple[DepthTexture, DepthTexture]:
    """Render the +x and -x depth textures in one sweep over the triangles."""
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    n_u = space.ny * supersample
    n_v = space.nz * supersample
    if mesh.triangle_count == 0:
        nan = np.full((n_v, n_u), np.nan)
        return (
            DepthTexture(Direction.PLUS_X, supersample, nan),
            DepthTexture(Direction.MINUS_X, supersample, nan.copy()),
        )
    tri = mesh.triangle_corners()
    out_max, out_min = _kernels.raster_dual(
        tri,
        space.y_min,
        space.z_min,
        space.by / supersample,
        space.bz / supersample,
        n_u,
        n_v,
        space.width / 2.0,
    )
    vals_plus = np.where(np.isinf(out_max), np.nan, out_max)
    vals_minus = np.where(np.isinf(out_min), np.nan, out_min)
    return (
        DepthTexture(Direction.PLUS_X, supersample, vals_plus),
        DepthTexture(Direction.MINUS_X, supersample, vals_minus),
    )


def render_depth(
    mesh: TriangleMesh,
    space: DesignSpace,
    direction: Direction,
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> DepthTexture:
    """Render one view direction (see render_depth_pair)."""
    plus, minus = render_depth_pair(mesh, space, supersample)
    return plus if direction == Direction.PLUS_X else minus


def reduce_to_blocks(tex: DepthTexture, space: DesignSpace) -> ColumnDepthMap:
    """Pool each s-by-s texel footprint to a conservative block column index.

    +x: index of the block containing the pooled maximum, exact-boundary
    depths assigned to the higher block. -x: pooled minimum, boundary depths
    to the lower block. Footprints with no hit become EMPTY.
    """
    s = tex.supersample
    if tex.values.shape != (space.nz * s, space.ny * s):
        raise DimensionMismatch(
            f"texture {tex.values.shape} does not match space "
            f"({space.nz}*{s}, {space.ny}*{s})"
        )
    vals = tex.values
    if tex.direction == Direction.PLUS_X:
        filled = np.where(np.isnan(vals), -np.inf, vals)
        pooled = filled.reshape(space.nz, s, space.ny, s).max(axis=(1, 3)).T
    else:
        filled = np.where(np.isnan(vals), np.inf, vals)
        pooled = filled.reshape(space.nz, s, space.ny, s).min(axis=(1, 3)).T
    hit = np.isfinite(pooled)
    t = (np.where(hit, pooled, space.x_min) - space.x_min) / space.bx
    if tex.direction == Direction.PLUS_X:
        idx = np.floor(t + _BOUNDARY_EPS).astype(np.int64)
    else:
        idx = (np.ceil(t - _BOUNDARY_EPS) - 1).astype(np.int64)
    idx = np.clip(idx, 0, space.nx - 1).astype(np.int32)
    idx[~hit] = EMPTY
    return ColumnDepthMap(tex.direction, idx)


def write_pgm(tex: DepthTexture, space: DesignSpace) -> bytes:
    """16-bit PGM dump of a depth texture for inspection (debug aid only).

    Hits map linearly from [x_min, x_min + width] to [1, 65535]; misses are 0.
    """
    v = tex.values
    scaled = np.zeros(v.shape, dtype=np.uint16)
    hit = ~np.isnan(v)
    if hit.any():
        norm = (v[hit] - space.x_min) / space.width
        scaled[hit] = (1 + np.clip(norm, 0.0, 1.0) * 65534).astype(np.uint16)
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n65535\n".encode()
    return header + scaled.astype(">u2").tobytes()
