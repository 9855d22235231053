"""Shared mesh builders and fixtures.

Shapes are built welded (indexed, no duplicate positions) so watertightness
checks see clean connectivity. All dimensions in millimeters.
"""

import numpy as np
import pytest

from foamforge import TriangleMesh, warmup

# Triangulation of a box: corner index bits are (x<<2 | y<<1 | z).
BOX_FACES = [
    (0, 1, 3), (0, 3, 2),  # -x
    (4, 6, 7), (4, 7, 5),  # +x
    (0, 4, 5), (0, 5, 1),  # -y
    (2, 3, 7), (2, 7, 6),  # +y
    (0, 2, 6), (0, 6, 4),  # -z
    (1, 5, 7), (1, 7, 3),  # +z
]


def make_box(lo, hi) -> TriangleMesh:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array(
        [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
    )
    return TriangleMesh(corners, np.array(BOX_FACES, dtype=np.int32))


def make_octasphere(radius: float, subdivisions: int = 3, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Octahedron-subdivided sphere; the tessellation maps onto itself under
    90-degree rotations about each axis, so depth renders are exactly
    symmetric under those poses."""
    verts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    faces = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    verts = [np.array(v, dtype=np.float64) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                m /= np.linalg.norm(m)
                verts.append(m)
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(v, np.array(faces, dtype=np.int32))


def make_torus(ring_radius: float, tube_radius: float, n_major: int, n_minor: int,
               axis: str = "z") -> TriangleMesh:
    """Parametric torus with n_major*n_minor vertices. axis is the hole axis;
    axis='z' keeps the ring in the (x, y) plane, so the hole is invisible
    from the +/-x view directions."""
    u = np.linspace(0, 2 * np.pi, n_major, endpoint=False)
    v = np.linspace(0, 2 * np.pi, n_minor, endpoint=False)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    a = (ring_radius + tube_radius * np.cos(vv)) * np.cos(uu)
    b = (ring_radius + tube_radius * np.cos(vv)) * np.sin(uu)
    c = tube_radius * np.sin(vv)
    if axis == "z":
        coords = (a, b, c)
    elif axis == "y":
        coords = (a, c, b)
    else:
        coords = (c, a, b)
    verts = np.stack([coords[0].ravel(), coords[1].ravel(), coords[2].ravel()], axis=1)
    idx = np.arange(n_major * n_minor).reshape(n_major, n_minor)
    p = idx
    q = np.roll(idx, -1, axis=0)
    r = np.roll(q, -1, axis=1)
    s = np.roll(idx, -1, axis=1)
    t1 = np.stack([p.ravel(), q.ravel(), r.ravel()], axis=1)
    t2 = np.stack([p.ravel(), r.ravel(), s.ravel()], axis=1)
    return TriangleMesh(verts, np.concatenate([t1, t2]).astype(np.int32))


def make_tetra(scale: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    c = np.asarray(center, dtype=np.float64)
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64) * scale + c
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]], dtype=np.int32)
    return TriangleMesh(v, f)


def make_box_union(rng: np.random.Generator, extent: float) -> TriangleMesh:
    """Two overlapping axis-aligned boxes as one triangle soup (watertight as
    a union of closed surfaces, non-convex)."""
    meshes = []
    for _ in range(2):
        lo = rng.uniform(-extent, 0.0, 3)
        hi = lo + rng.uniform(extent * 0.3, extent, 3)
        meshes.append(make_box(lo, hi))
    verts = np.concatenate([m.vertices for m in meshes])
    tris = np.concatenate([meshes[0].triangles, meshes[1].triangles + 8])
    return TriangleMesh(verts, tris.astype(np.int32))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    warmup()


# Lines recorded by the acceptance suite; echoed after the run so they stay
# visible even with output capture on.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
