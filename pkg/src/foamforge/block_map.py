"""Block map construction, foam region split, gap metrics, serialization.

A block map labels every design-space block Occupied / FoamPlus / FoamMinus.
Occupancy per (j, k) column is the interval between the -x and +x visible
surfaces: occupied_A = {i <= index_A}, occupied_B = {i >= index_B}, and the
foam set is the complement of their intersection. The split into the two
foam regions keeps each one a height field: per column, FoamPlus is a
contiguous suffix touching the +x case face and FoamMinus a contiguous
prefix touching the -x face, which is what makes the blocks fabricable and
lets the object slide out along x.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .depth_raster import EMPTY, ColumnDepthMap, DesignSpace, Direction
from .errors import DegenerateRay, DimensionMismatch
from .mesh_core import TriangleMesh

# Label values (uint8 grid). FOAM is provisional and only exists between
# build_block_map and split_regions.
OCCUPIED = 0
FOAM_PLUS = 1
FOAM_MINUS = 2
FOAM = 3

LABEL_NAMES = {OCCUPIED: "occupied", FOAM_PLUS: "foam_plus", FOAM_MINUS: "foam_minus", FOAM: "foam"}

_BLOB_MAGIC = b"FFBM"
_BLOB_VERSION = 1


@dataclass
class Diagnostics:
    occupied_blocks: int = 0
    foam_blocks: int = 0
    one_sided_columns: int = 0


@dataclass
class BlockMap:
    """3D label grid over a design space, plus bookkeeping counters."""

    space: DesignSpace
    labels: np.ndarray  # (nx, ny, nz) uint8
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    @property
    def foam_block_count(self) -> int:
        return int((self.labels != OCCUPIED).sum())

    @property
    def occupied_block_count(self) -> int:
        return int((self.labels == OCCUPIED).sum())

    def is_split(self) -> bool:
        return not (self.labels == FOAM).any()

    def check_invariants(self) -> None:
        """Assert the partition and per-column height-field structure."""
        sp = self.space
        if self.labels.shape != (sp.nx, sp.ny, sp.nz):
            raise DimensionMismatch("label grid does not match the design space")
        if not np.isin(self.labels, (OCCUPIED, FOAM_PLUS, FOAM_MINUS)).all():
            raise AssertionError("provisional foam labels remain after split")
        occ = self.labels == OCCUPIED
        plus = self.labels == FOAM_PLUS
        minus = self.labels == FOAM_MINUS
        for name, mask, anchor_hi in (("occupied", occ, None), ("foam_plus", plus, True), ("foam_minus", minus, False)):
            runs = np.diff(mask.astype(np.int8), axis=0)
            starts = (runs == 1).sum(axis=0) + mask[0]
            if (starts > 1).any():
                raise AssertionError(f"{name} is not contiguous in some column")
            if anchor_hi is True and not mask[-1][mask.any(axis=0)].all():
                raise AssertionError("foam_plus run does not touch the +x face")
            if anchor_hi is False and not mask[0][mask.any(axis=0)].all():
                raise AssertionError("foam_minus run does not touch the -x face")

    # -- serialization -----------------------------------------------------

    def to_bytes(self) -> bytes:
        sp = self.space
        head = _BLOB_MAGIC + struct.pack(
            "<HIII3d", _BLOB_VERSION, sp.nx, sp.ny, sp.nz, sp.bx, sp.by, sp.bz
        )
        return head + np.ascontiguousarray(self.labels, dtype=np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BlockMap":
        from .errors import MalformedFile

        head_len = 4 + struct.calcsize("<HIII3d")
        if blob[:4] != _BLOB_MAGIC or len(blob) < head_len:
            raise MalformedFile("not a block-map blob")
        ver, nx, ny, nz, bx, by, bz = struct.unpack_from("<HIII3d", blob, 4)
        if ver != _BLOB_VERSION:
            raise MalformedFile(f"unsupported block-map blob version {ver}")
        if len(blob) != head_len + nx * ny * nz:
            raise MalformedFile("block-map blob length mismatch")
        labels = np.frombuffer(blob, dtype=np.uint8, offset=head_len).reshape(nx, ny, nz).copy()
        return cls(DesignSpace(nx, ny, nz, bx, by, bz), labels)

    def to_json_obj(self) -> dict:
        """Lossless JSON form: dims plus run-length-encoded labels per column."""
        sp = self.space
        columns = []
        for j in range(sp.ny):
            for k in range(sp.nz):
                col = self.labels[:, j, k]
                change = np.flatnonzero(np.diff(col)) + 1
                bounds = np.concatenate(([0], change, [sp.nx]))
                columns.append(
                    [[int(col[a]), int(b - a)] for a, b in zip(bounds[:-1], bounds[1:])]
                )
        return {
            "version": _BLOB_VERSION,
            "resolution": [sp.nx, sp.ny, sp.nz],
            "block_size_mm": [sp.bx, sp.by, sp.bz],
            "columns": columns,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BlockMap":
        nx, ny, nz = obj["resolution"]
        bx, by, bz = obj["block_size_mm"]
        labels = np.empty((nx, ny, nz), dtype=np.uint8)
        cols = iter(obj["columns"])
        for j in range(ny):
            for k in range(nz):
                runs = next(cols)
                labels[:, j, k] = np.repeat([r[0] for r in runs], [r[1] for r in runs])
        return cls(DesignSpace(nx, ny, nz, bx, by, bz), labels)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"), sort_keys=True)


def build_block_map(A: ColumnDepthMap, B: ColumnDepthMap, space: DesignSpace) -> BlockMap:
    """Occupied/foam labels from the two column depth maps.

    Columns where only one side saw the object are counted as one-sided and
    treated as foam (fail-soft for open scans).
    """
    if A.direction != Direction.PLUS_X or B.direction != Direction.MINUS_X:
        raise DimensionMismatch("build_block_map expects (+x map, -x map)")
    if A.indices.shape != (space.ny, space.nz) or B.indices.shape != (space.ny, space.nz):
        raise DimensionMismatch("column depth maps do not match the design space")
    idx_a = A.indices
    idx_b = B.indices
    i_grid = np.arange(space.nx, dtype=np.int32)[:, None, None]
    occ_a = (idx_a != EMPTY)[None, :, :] & (i_grid <= idx_a[None, :, :])
    occ_b = (idx_b != EMPTY)[None, :, :] & (i_grid >= idx_b[None, :, :])
    occupied = occ_a & occ_b
    labels = np.where(occupied, OCCUPIED, FOAM).astype(np.uint8)
    diag = Diagnostics(
        occupied_blocks=int(occupied.sum()),
        foam_blocks=int(space.total_blocks - occupied.sum()),
        one_sided_columns=int(((idx_a == EMPTY) ^ (idx_b == EMPTY)).sum()),
    )
    return BlockMap(space, labels, diag)


def _dilate6(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    out[:, :, 1:] |= mask[:, :, :-1]
    out[:, :, :-1] |= mask[:, :, 1:]
    return out


def split_regions(bm: BlockMap) -> BlockMap:
    """Relabel provisional foam into FoamPlus / FoamMinus.

    Columns crossed by the object are forced: foam above the +x surface is
    FoamPlus, below the -x surface FoamMinus. Fully-foam columns are labeled
    by layer-synchronous 6-connected growth seeded on the two x case faces
    (ties at the meeting front go FoamPlus iff 2*i >= nx), then a repair
    pass cuts each of those columns at its lowest FoamPlus block so the
    height-field property holds per column exactly.
    """
    nx = bm.space.nx
    labels = bm.labels.copy()
    foam = labels != OCCUPIED
    occupied_col = (labels == OCCUPIED).any(axis=0)

    # Forced split in columns that contain occupied blocks: the occupied run
    # is [index_B, index_A], so foam splits at the run boundaries.
    if occupied_col.any():
        occ = labels == OCCUPIED
        first_occ = np.argmax(occ, axis=0)
        last_occ = nx - 1 - np.argmax(occ[::-1], axis=0)
        i_grid = np.arange(nx)[:, None, None]
        above = foam & (i_grid > last_occ[None]) & occupied_col[None]
        below = foam & (i_grid < first_occ[None]) & occupied_col[None]
        labels[above] = FOAM_PLUS
        labels[below] = FOAM_MINUS

    # Layer-synchronous growth across all foam blocks, seeded at the faces.
    # Blocks pre-labeled above relay their own label when the wave reaches
    # them; ties in the same layer resolve by the 2*i >= nx rule.
    tie_plus = (2 * np.arange(nx) >= nx)[:, None, None]
    front_plus = np.zeros_like(foam)
    front_minus = np.zeros_like(foam)
    front_plus[nx - 1] = foam[nx - 1]
    front_minus[0] = foam[0]
    both = front_plus & front_minus  # only when nx == 1
    front_plus &= ~both | (both & tie_plus)
    front_minus &= ~both | (both & ~tie_plus)
    provisional = labels == FOAM
    labels[front_plus & provisional] = FOAM_PLUS
    labels[front_minus & provisional] = FOAM_MINUS
    visited = front_plus | front_minus
    while front_plus.any() or front_minus.any():
        cand_plus = _dilate6(front_plus) & foam & ~visited
        cand_minus = _dilate6(front_minus) & foam & ~visited
        if not (cand_plus.any() or cand_minus.any()):
            break
        both = cand_plus & cand_minus
        new_plus = (cand_plus & ~both) | (both & tie_plus)
        new_minus = (cand_minus & ~both) | (both & ~tie_plus)
        reached = new_plus | new_minus
        provisional = labels == FOAM
        labels[new_plus & provisional] = FOAM_PLUS
        labels[new_minus & provisional] = FOAM_MINUS
        visited |= reached
        # Pre-labeled blocks relay their own label, not the wave's.
        front_plus = reached & (labels == FOAM_PLUS)
        front_minus = reached & (labels == FOAM_MINUS)

    # Repair pass: in fully-foam columns, cut at the lowest FoamPlus block.
    empty_col = ~occupied_col
    if empty_col.any():
        plus = labels == FOAM_PLUS
        has_plus = plus.any(axis=0)
        cut = np.where(has_plus, np.argmax(plus, axis=0), nx)
        i_grid = np.arange(nx)[:, None, None]
        col_sel = empty_col[None]
        labels[col_sel & (i_grid >= cut[None])] = FOAM_PLUS
        labels[col_sel & (i_grid < cut[None])] = FOAM_MINUS

    out = BlockMap(bm.space, labels, replace(bm.diagnostics))
    out.check_invariants()
    return out


@dataclass
class GapReport:
    """Occupied-overestimate minus solid-voxel count; negative is possible.

    The solid reference is center-parity voxelization, so the signed value
    quantifies blocks the two-sided depth extrusion claims beyond (or, near
    the surface, misses against) the actual solid.
    """

    available: bool
    reason: Optional[str] = None
    occupied_blocks: int = 0
    solid_blocks: int = 0
    gap_blocks: int = 0
    gap_mm3: float = 0.0

    def to_json_obj(self) -> dict:
        return {
            "available": self.available,
            "reason": self.reason,
            "occupied_blocks": self.occupied_blocks,
            "solid_blocks": self.solid_blocks,
            "gap_blocks": self.gap_blocks,
            "gap_mm3": self.gap_mm3,
            "metric": "formalized_gap",
        }


def solid_voxels(mesh: TriangleMesh, space: DesignSpace) -> np.ndarray:
    """Center-parity solid voxelization: (nx, ny, nz) bool, True inside.

    Rays that graze edges/vertices or cross exactly at a block center are
    perturbed by +bz/1000 in z and retried, up to 3 times, then reported
    as DegenerateRay.
    """
    tri = mesh.triangle_corners()
    centers_x = space.block_centers_x()
    y_pts = space.block_centers_y()
    z_pts = space.block_centers_z()
    counts, degenerate = _kernels.parity_counts_columns(
        tri, y_pts, z_pts, centers_x, space.y_min, space.by, space.z_min, space.bz
    )
    bad = np.argwhere(degenerate == 1)
    step = space.bz / 1000.0
    for attempt in range(1, 4):
        if bad.size == 0:
            break
        pts = np.stack(
            [y_pts[bad[:, 0]], z_pts[bad[:, 1]] + attempt * step], axis=1
        )
        c2, d2 = _kernels.parity_counts(tri, pts, centers_x)
        counts[bad[:, 0], bad[:, 1]] = c2
        bad = bad[d2 == 1]
    if bad.size:
        raise DegenerateRay(f"{len(bad)} parity rays still degenerate after 3 retries")
    inside = (counts % 2 == 1).transpose(2, 0, 1)  # (ny,nz,nx) -> (nx,ny,nz)
    return inside


def gap_volume(bm: BlockMap, mesh: TriangleMesh, space: Optional[DesignSpace] = None) -> GapReport:
    """Signed gap between the block map's occupied set and the parity solid."""
    space = space or bm.space
    if space != bm.space:
        raise DimensionMismatch("gap_volume space differs from the block map's")
    if not mesh.is_watertight():
        return GapReport(available=False, reason="mesh is not watertight")
    solid = solid_voxels(mesh, space)
    occupied = int((bm.labels == OCCUPIED).sum())
    inside = int(solid.sum())
    gap = occupied - inside
    return GapReport(
        available=True,
        occupied_blocks=occupied,
        solid_blocks=inside,
        gap_blocks=gap,
        gap_mm3=gap * space.block_volume,
    )
