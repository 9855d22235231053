"""Triangle mesh loading, validation, rigid transforms and measurement.

All geometry is in millimeters. Meshes are indexed triangle soups; STL input
is welded on exact coordinates so repeated facet corners collapse to shared
vertices. Rotations are extrinsic X-then-Y-then-Z (R = Rz @ Ry @ Rx) about
the origin, angles in degrees.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import EmptyMesh, MalformedFile, UnsupportedFeature


class MeshFormat(Enum):
    STL = "stl"
    PLY = "ply"
    OBJ = "obj"


@dataclass
class TriangleMesh:
    """Indexed triangle soup in millimeters.

    vertices: (n, 3) float64, triangles: (m, 3) int32 vertex indices.
    Invariants (checked by validate()): indices in range, no triangle repeats
    a vertex index, coordinates finite.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    source_format: Optional[MeshFormat] = None
    warnings: Tuple[str, ...] = ()
    _watertight: Optional[bool] = field(default=None, repr=False, compare=False)

    @property
    def vertex_count(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def triangle_count(self) -> int:
        return int(self.triangles.shape[0])

    def validate(self) -> None:
        v, t = self.vertices, self.triangles
        if v.ndim != 2 or v.shape[1] != 3 or t.ndim != 2 or t.shape[1] != 3:
            raise MalformedFile("mesh arrays must be (n,3) vertices and (m,3) triangles")
        if not np.isfinite(v).all():
            raise MalformedFile("mesh contains non-finite vertex coordinates")
        if t.size:
            if t.min() < 0 or t.max() >= len(v):
                raise MalformedFile("triangle index out of range")
            if ((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])).any():
                raise MalformedFile("triangle repeats a vertex index")

    def is_watertight(self) -> bool:
        """True when every undirected edge is shared by exactly two triangles.

        Vertices are welded on exact coordinates first so that face-soup input
        (unwelded STL round trips) is judged on geometry, not on indexing.
        """
        if self._watertight is None:
            self._watertight = _edges_all_paired(self.vertices, self.triangles)
        return self._watertight

    def triangle_corners(self) -> np.ndarray:
        """Per-triangle corner coordinates, shape (m, 3, 3) float64 C-contiguous."""
        return np.ascontiguousarray(self.vertices[self.triangles], dtype=np.float64)


@dataclass(frozen=True)
class EulerAngles:
    """Rotation angles in degrees: psi about x, theta about y, phi about z.

    Normalized into the canonical range [0, 360) on construction.
    """

    psi: float
    theta: float
    phi: float

    def __post_init__(self):
        for name in ("psi", "theta", "phi"):
            a = float(getattr(self, name))
            if not np.isfinite(a):
                raise ValueError(f"angle {name} must be finite")
            object.__setattr__(self, name, a % 360.0)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.psi, self.theta, self.phi)


def _edges_all_paired(vertices: np.ndarray, triangles: np.ndarray) -> bool:
    if triangles.size == 0:
        return False
    _, inverse = np.unique(np.round(vertices, 12), axis=0, return_inverse=True)
    tri = inverse.reshape(-1)[triangles] if inverse.ndim > 1 else inverse[triangles]
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    e.sort(axis=1)
    key = e[:, 0].astype(np.int64) * len(vertices) + e[:, 1]
    _, counts = np.unique(key, return_counts=True)
    return bool((counts == 2).all())


def rotation_matrix(angles: EulerAngles) -> np.ndarray:
    """R = Rz(phi) @ Ry(theta) @ Rx(psi), angles in degrees."""
    sp, cp = np.sin(np.deg2rad(angles.psi)), np.cos(np.deg2rad(angles.psi))
    st, ct = np.sin(np.deg2rad(angles.theta)), np.cos(np.deg2rad(angles.theta))
    sf, cf = np.sin(np.deg2rad(angles.phi)), np.cos(np.deg2rad(angles.phi))
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
    ry = np.array([[ct, 0, st], [0, 1, 0], [-st, 0, ct]])
    rz = np.array([[cf, -sf, 0], [sf, cf, 0], [0, 0, 1]])
    return rz @ ry @ rx


def rotate_mesh(mesh: TriangleMesh, angles: EulerAngles) -> TriangleMesh:
    """Rotate every vertex about the origin; connectivity is unchanged."""
    if angles.psi == 0.0 and angles.theta == 0.0 and angles.phi == 0.0:
        return mesh
    r = rotation_matrix(angles)
    return replace(mesh, vertices=mesh.vertices @ r.T, _watertight=mesh._watertight)


def bounding_box(mesh: TriangleMesh) -> Tuple[np.ndarray, np.ndarray]:
    """Componentwise (min, max) over all vertices."""
    if mesh.vertex_count == 0:
        raise EmptyMesh("bounding box of an empty mesh")
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def center_mesh(mesh: TriangleMesh) -> TriangleMesh:
    """Translate so the bounding-box center lands on the origin."""
    lo, hi = bounding_box(mesh)
    c = (lo + hi) / 2.0
    if not c.any():
        return mesh
    return replace(mesh, vertices=mesh.vertices - c, _watertight=mesh._watertight)


# ---------------------------------------------------------------------------
# Parsers
# ---------------------------------------------------------------------------

_ASCII_STL_FACET = re.compile(
    rb"vertex\s+(\S+)\s+(\S+)\s+(\S+)\s+"
    rb"vertex\s+(\S+)\s+(\S+)\s+(\S+)\s+"
    rb"vertex\s+(\S+)\s+(\S+)\s+(\S+)"
)


def load_mesh(data: bytes, fmt: MeshFormat) -> TriangleMesh:
    """Parse mesh bytes in the declared format.

    STL (binary or ASCII) is welded on exact coordinates; PLY (ASCII) and OBJ
    keep their file indexing. Zero-area triangles that weld to a repeated
    index are dropped with a warning so the mesh invariants hold.
    """
    if fmt == MeshFormat.STL:
        mesh = _load_stl(data)
    elif fmt == MeshFormat.PLY:
        mesh = _load_ply(data)
    elif fmt == MeshFormat.OBJ:
        mesh = _load_obj(data)
    else:
        raise MalformedFile(f"unknown format {fmt!r}")
    if mesh.triangle_count == 0:
        raise EmptyMesh("file contains no triangles")
    mesh.validate()
    if not mesh.is_watertight():
        mesh.warnings = mesh.warnings + ("not watertight",)
    return mesh


def _weld(corners: np.ndarray, fmt: MeshFormat) -> TriangleMesh:
    """Weld (m,3,3) facet corners on exact coordinates and drop degenerates."""
    flat = corners.reshape(-1, 3)
    verts, inverse = np.unique(flat, axis=0, return_inverse=True)
    tris = inverse.reshape(-1, 3).astype(np.int32)
    degen = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
    warnings: Tuple[str, ...] = ()
    if degen.any():
        warnings = (f"degenerate_triangles_dropped:{int(degen.sum())}",)
        tris = tris[~degen]
    return TriangleMesh(verts.astype(np.float64), tris, fmt, warnings)


def _load_stl(data: bytes) -> TriangleMesh:
    if len(data) == 0:
        raise MalformedFile("empty file")
    if data[:5].lower() == b"solid" and b"facet" in data[:2048]:
        return _load_stl_ascii(data)
    return _load_stl_binary(data)


def _load_stl_binary(data: bytes) -> TriangleMesh:
    if len(data) < 84:
        raise MalformedFile("binary STL shorter than header + count")
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) < 84 + 50 * count:
        raise MalformedFile(f"binary STL truncated: {count} facets declared")
    raw = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    rec = raw.reshape(count, 50)[:, 12:48].copy().view("<f4").reshape(count, 3, 3)
    return _weld(rec.astype(np.float64), MeshFormat.STL)


def _load_stl_ascii(data: bytes) -> TriangleMesh:
    tris = [list(map(float, m.groups())) for m in _ASCII_STL_FACET.finditer(data)]
    if not tris and b"facet" in data:
        raise MalformedFile("ASCII STL contains facets but no parseable vertices")
    corners = np.array(tris, dtype=np.float64).reshape(-1, 3, 3)
    return _weld(corners, MeshFormat.STL)


def _load_ply(data: bytes) -> TriangleMesh:
    text = data.decode("ascii", errors="replace")
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MalformedFile("missing 'ply' magic line")
    # Header scan: element declarations in order, vertex property order matters.
    elements = []  # (name, count)
    vertex_props = []
    in_header = True
    body_start = 0
    for ln, line in enumerate(lines[1:], start=1):
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise UnsupportedFeature(f"PLY format {tok[1]} not supported (ASCII only)")
        elif tok[0] == "element":
            elements.append((tok[1], int(tok[2])))
        elif tok[0] == "property":
            if elements and elements[-1][0] == "vertex":
                vertex_props.append(tok[-1])
        elif tok[0] == "end_header":
            body_start = ln + 1
            in_header = False
            break
    if in_header:
        raise MalformedFile("PLY header never ends")
    for name, count in elements:
        if name not in ("vertex", "face") and count > 0:
            raise UnsupportedFeature(f"PLY element '{name}' not supported")
    try:
        xi, yi, zi = (vertex_props.index(c) for c in ("x", "y", "z"))
    except ValueError:
        raise MalformedFile("PLY vertex element lacks x/y/z properties")

    body = [l.split() for l in lines[body_start:] if l.strip()]
    verts, faces = [], []
    cursor = 0
    for name, count in elements:
        rows = body[cursor : cursor + count]
        if len(rows) < count:
            raise MalformedFile(f"PLY body truncated in element '{name}'")
        cursor += count
        if name == "vertex":
            for r in rows:
                verts.append((float(r[xi]), float(r[yi]), float(r[zi])))
        elif name == "face":
            for r in rows:
                n = int(r[0])
                if len(r) < 1 + n:
                    raise MalformedFile("PLY face row shorter than its declared list")
                idx = [int(v) for v in r[1 : 1 + n]]
                for k in range(1, n - 1):  # fan triangulation
                    faces.append((idx[0], idx[k], idx[k + 1]))
    return TriangleMesh(
        np.asarray(verts, dtype=np.float64).reshape(-1, 3),
        np.asarray(faces, dtype=np.int32).reshape(-1, 3),
        MeshFormat.PLY,
    )


def _load_obj(data: bytes) -> TriangleMesh:
    verts, faces = [], []
    try:
        text = data.decode("utf-8", errors="replace")
    except Exception as exc:  # pragma: no cover - decode with replace never raises
        raise MalformedFile(str(exc))
    for line in text.splitlines():
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        if tok[0] == "v":
            if len(tok) < 4:
                raise MalformedFile("OBJ vertex line with fewer than 3 coordinates")
            verts.append((float(tok[1]), float(tok[2]), float(tok[3])))
        elif tok[0] == "f":
            refs = []
            for t in tok[1:]:
                i = int(t.split("/")[0])
                refs.append(i - 1 if i > 0 else len(verts) + i)
            if len(refs) < 3:
                raise MalformedFile("OBJ face with fewer than 3 vertices")
            for k in range(1, len(refs) - 1):
                faces.append((refs[0], refs[k], refs[k + 1]))
    if not verts:
        raise MalformedFile("OBJ contains no vertices")
    return TriangleMesh(
        np.asarray(verts, dtype=np.float64).reshape(-1, 3),
        np.asarray(faces, dtype=np.int32).reshape(-1, 3),
        MeshFormat.OBJ,
    )


def format_from_extension(name: str) -> MeshFormat:
    ext = name.rsplit(".", 1)[-1].lower() if "." in name else ""
    try:
        return MeshFormat(ext)
    except ValueError:
        raise MalformedFile(f"cannot infer mesh format from extension {ext!r}")
