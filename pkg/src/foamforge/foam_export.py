"""Blocky foam meshes, slice stacks, and standard output formats.

Region meshes are closed boundary surfaces on the exact block lattice: one
quad (two triangles, outward winding) per block face whose neighbor is
outside the region. Quad corners are not welded across faces, so a face
contributes exactly four vertices; STL is a face soup anyway and PLY keeps
the per-face structure. Faces are emitted in (i, j, k, face) lexicographic
order with faces numbered -x, +x, -y, +y, -z, +z, which pins the output
bytes for identical inputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .block_map import FOAM_MINUS, FOAM_PLUS, OCCUPIED, BlockMap, GapReport
from .depth_raster import DesignSpace
from .errors import LayerOutOfRange
from .mesh_core import TriangleMesh

SLICE_COLOR_FOAM_MINUS = "#1f77b4"
SLICE_COLOR_FOAM_PLUS = "#ff7f0e"
SLICE_COLOR_OCCUPIED = "#ffffff"
SLICE_OUTLINE = "#888888"

STL_HEADER = b"foamforge" + b"\0" * 71

# Quad corners (unit-block offsets) per face, ordered so (c0,c1,c2),(c0,c2,c3)
# wind outward.
_FACE_CORNERS = np.array(
    [
        [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]],  # -x
        [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]],  # +x
        [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]],  # -y
        [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]],  # +y
        [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]],  # -z
        [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],  # +z
    ],
    dtype=np.float64,
)


class ExportFormat(Enum):
    STL_BINARY = "stl"
    PLY_ASCII = "ply"


@dataclass
class SliceStack:
    """Per-x-layer label cross-sections; reassembling the layers is exactly
    the source block map's label grid."""

    space: DesignSpace
    labels: np.ndarray  # (nx, ny, nz) uint8

    @property
    def layer_count(self) -> int:
        return int(self.labels.shape[0])

    def layer(self, i: int) -> np.ndarray:
        if not 0 <= i < self.layer_count:
            raise LayerOutOfRange(f"layer {i} outside [0, {self.layer_count})")
        return self.labels[i]

    def layer_histogram(self, i: int) -> dict:
        lay = self.layer(i)
        return {
            "occupied": int((lay == OCCUPIED).sum()),
            "foam_plus": int((lay == FOAM_PLUS).sum()),
            "foam_minus": int((lay == FOAM_MINUS).sum()),
        }


@dataclass
class FoamResult:
    """Everything one generation produces."""

    block_map: BlockMap
    mesh_plus: TriangleMesh
    mesh_minus: TriangleMesh
    slices: SliceStack
    timing_ms: float
    gap_report: Optional[GapReport] = None


def extract_slices(bm: BlockMap) -> SliceStack:
    return SliceStack(bm.space, bm.labels.copy())


def extract_region_mesh(bm: BlockMap, region: int) -> TriangleMesh:
    """Closed blocky boundary mesh of one foam region (or the occupied set)."""
    sp = bm.space
    mask = bm.labels == region
    if not mask.any():
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))

    pad = np.zeros((sp.nx + 2, sp.ny + 2, sp.nz + 2), dtype=bool)
    pad[1:-1, 1:-1, 1:-1] = mask
    shifts = [
        pad[:-2, 1:-1, 1:-1],  # neighbor at -x
        pad[2:, 1:-1, 1:-1],  # +x
        pad[1:-1, :-2, 1:-1],  # -y
        pad[1:-1, 2:, 1:-1],  # +y
        pad[1:-1, 1:-1, :-2],  # -z
        pad[1:-1, 1:-1, 2:],  # +z
    ]
    rows = []
    for face, nb in enumerate(shifts):
        exposed = np.argwhere(mask & ~nb)
        if exposed.size:
            rows.append(
                np.concatenate([exposed, np.full((len(exposed), 1), face, dtype=np.int64)], axis=1)
            )
    faces = np.concatenate(rows)
    order = np.lexsort((faces[:, 3], faces[:, 2], faces[:, 1], faces[:, 0]))
    faces = faces[order]

    size = np.array([sp.bx, sp.by, sp.bz])
    origin = np.array([sp.x_min, sp.y_min, sp.z_min])
    corners = faces[:, :3][:, None, :] + _FACE_CORNERS[faces[:, 3]]
    verts = (corners * size + origin).reshape(-1, 3)
    base = np.arange(len(faces), dtype=np.int32)[:, None] * 4
    tris = np.concatenate(
        [base + np.array([0, 1, 2], dtype=np.int32), base + np.array([0, 2, 3], dtype=np.int32)],
        axis=1,
    ).reshape(-1, 3)
    return TriangleMesh(verts, tris)


def signed_volume(mesh: TriangleMesh) -> float:
    """Divergence-theorem volume; positive for outward-wound closed surfaces."""
    if mesh.triangle_count == 0:
        return 0.0
    c = mesh.triangle_corners()
    return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)


def write_mesh(mesh: TriangleMesh, fmt: ExportFormat) -> bytes:
    if fmt == ExportFormat.STL_BINARY:
        return _write_stl(mesh)
    if fmt == ExportFormat.PLY_ASCII:
        return _write_ply(mesh)
    raise ValueError(f"unknown export format {fmt!r}")


def _write_stl(mesh: TriangleMesh) -> bytes:
    n = mesh.triangle_count
    rec = np.zeros(n, dtype=np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]))
    if n:
        c = mesh.triangle_corners()
        normals = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        lengths = np.linalg.norm(normals, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            normals = np.where(lengths > 0, normals / lengths, 0.0)
        rec["normal"] = normals.astype("<f4")
        rec["v"] = c.astype("<f4")
    return STL_HEADER + struct.pack("<I", n) + rec.tobytes()


def _fmt_coord(x: float) -> str:
    return f"{x:.9g}"


def _write_ply(mesh: TriangleMesh) -> bytes:
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {mesh.vertex_count}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {mesh.triangle_count}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for v in mesh.vertices:
        lines.append(f"{_fmt_coord(v[0])} {_fmt_coord(v[1])} {_fmt_coord(v[2])}")
    for t in mesh.triangles:
        lines.append(f"3 {t[0]} {t[1]} {t[2]}")
    return ("\n".join(lines) + "\n").encode("ascii")


def render_slice_svg(stack: SliceStack, i: int) -> str:
    """One layer as an SVG grid; user units are millimeters, +z is up."""
    lay = stack.layer(i)
    sp = stack.space
    w, h = sp.height, sp.depth  # slice plane spans the (y, z) footprint
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{w:g}mm" height="{h:g}mm" viewBox="0 0 {w:g} {h:g}">'
    ]
    for j in range(sp.ny):
        for k in range(sp.nz):
            x = j * sp.by
            y = (sp.nz - 1 - k) * sp.bz
            label = int(lay[j, k])
            if label == FOAM_MINUS:
                style = f'fill="{SLICE_COLOR_FOAM_MINUS}"'
            elif label == FOAM_PLUS:
                style = f'fill="{SLICE_COLOR_FOAM_PLUS}"'
            else:
                style = (
                    f'fill="{SLICE_COLOR_OCCUPIED}" '
                    f'stroke="{SLICE_OUTLINE}" stroke-width="{min(sp.by, sp.bz) * 0.04:g}"'
                )
            parts.append(
                f'<rect x="{x:g}" y="{y:g}" width="{sp.by:g}" height="{sp.bz:g}" {style}/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
