"""Compiled inner loops: depth rasterization and parity ray crossings.

Both kernels use the same inclusive point-in-triangle predicate over the
(y, z) projection: edge functions all >= 0 or all <= 0 (either winding).
Triangles whose projected area is zero cannot be hit by an x-parallel ray
at a single point and are skipped by the rasterizer; the parity kernel
flags such grazing configurations as degenerate instead.

A pure-numpy fallback is provided so the package imports without numba;
the compiled path is required to meet the interactive latency budget.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba present in supported envs
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


@njit(cache=True)
def _raster_dual_jit(tri, y_lo, z_lo, dy, dz, n_u, n_v, x_half, out_max, out_min):
    for t in range(tri.shape[0]):
        x0 = tri[t, 0, 0]
        y0 = tri[t, 0, 1]
        z0 = tri[t, 0, 2]
        x1 = tri[t, 1, 0]
        y1 = tri[t, 1, 1]
        z1 = tri[t, 1, 2]
        x2 = tri[t, 2, 0]
        y2 = tri[t, 2, 1]
        z2 = tri[t, 2, 2]
        area2 = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        if area2 == 0.0:
            continue
        ymin = min(y0, min(y1, y2))
        ymax = max(y0, max(y1, y2))
        zmin = min(z0, min(z1, z2))
        zmax = max(z0, max(z1, z2))
        # First/last texel whose center can fall inside the projected bbox.
        u_lo = int(np.ceil((ymin - y_lo) / dy - 0.5))
        u_hi = int(np.floor((ymax - y_lo) / dy - 0.5))
        v_lo = int(np.ceil((zmin - z_lo) / dz - 0.5))
        v_hi = int(np.floor((zmax - z_lo) / dz - 0.5))
        if u_lo < 0:
            u_lo = 0
        if v_lo < 0:
            v_lo = 0
        if u_hi > n_u - 1:
            u_hi = n_u - 1
        if v_hi > n_v - 1:
            v_hi = n_v - 1
        flat = x0 == x1 and x1 == x2
        for v in range(v_lo, v_hi + 1):
            zc = z_lo + (v + 0.5) * dz
            for u in range(u_lo, u_hi + 1):
                yc = y_lo + (u + 0.5) * dy
                w0 = (y2 - y1) * (zc - z1) - (z2 - z1) * (yc - y1)
                w1 = (y0 - y2) * (zc - z2) - (z0 - z2) * (yc - y2)
                w2 = (y1 - y0) * (zc - z0) - (z1 - z0) * (yc - y0)
                inside = (w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0) or (
                    w0 <= 0.0 and w1 <= 0.0 and w2 <= 0.0
                )
                if not inside:
                    continue
                if flat:
                    xs = x0
                else:
                    xs = (w0 * x0 + w1 * x1 + w2 * x2) / (w0 + w1 + w2)
                if xs > x_half:
                    xs = x_half
                elif xs < -x_half:
                    xs = -x_half
                if xs > out_max[v, u]:
                    out_max[v, u] = xs
                if xs < out_min[v, u]:
                    out_min[v, u] = xs


def _raster_dual_numpy(tri, y_lo, z_lo, dy, dz, n_u, n_v, x_half, out_max, out_min):
    for t in range(tri.shape[0]):
        (x0, y0, z0), (x1, y1, z1), (x2, y2, z2) = tri[t]
        area2 = (y1 - y0) * (z2 - z0) - (z1 - z0) * (y2 - y0)
        if area2 == 0.0:
            continue
        u_lo = max(0, int(np.ceil((min(y0, y1, y2) - y_lo) / dy - 0.5)))
        u_hi = min(n_u - 1, int(np.floor((max(y0, y1, y2) - y_lo) / dy - 0.5)))
        v_lo = max(0, int(np.ceil((min(z0, z1, z2) - z_lo) / dz - 0.5)))
        v_hi = min(n_v - 1, int(np.floor((max(z0, z1, z2) - z_lo) / dz - 0.5)))
        if u_lo > u_hi or v_lo > v_hi:
            continue
        yc = y_lo + (np.arange(u_lo, u_hi + 1) + 0.5) * dy
        zc = z_lo + (np.arange(v_lo, v_hi + 1) + 0.5) * dz
        yy, zz = np.meshgrid(yc, zc)
        w0 = (y2 - y1) * (zz - z1) - (z2 - z1) * (yy - y1)
        w1 = (y0 - y2) * (zz - z2) - (z0 - z2) * (yy - y2)
        w2 = (y1 - y0) * (zz - z0) - (z1 - z0) * (yy - y0)
        inside = ((w0 >= 0) & (w1 >= 0) & (w2 >= 0)) | ((w0 <= 0) & (w1 <= 0) & (w2 <= 0))
        if not inside.any():
            continue
        if x0 == x1 == x2:
            xs = np.full_like(w0, x0)
        else:
            xs = (w0 * x0 + w1 * x1 + w2 * x2) / (w0 + w1 + w2)
        xs = np.clip(xs, -x_half, x_half)
        sub_max = out_max[v_lo : v_hi + 1, u_lo : u_hi + 1]
        sub_min = out_min[v_lo : v_hi + 1, u_lo : u_hi + 1]
        np.maximum(sub_max, np.where(inside, xs, -np.inf), out=sub_max)
        np.minimum(sub_min, np.where(inside, xs, np.inf), out=sub_min)


def raster_dual(tri, y_lo, z_lo, dy, dz, n_u, n_v, x_half):
    """Rasterize both view directions in one sweep.

    Returns (out_max, out_min), each (n_v, n_u) float64 with -inf/+inf where
    no triangle covers the texel center. out_max is the first-hit depth seen
    from +x, out_min from -x.
    """
    out_max = np.full((n_v, n_u), -np.inf)
    out_min = np.full((n_v, n_u), np.inf)
    impl = _raster_dual_jit if NUMBA_AVAILABLE else _raster_dual_numpy
    impl(tri, float(y_lo), float(z_lo), float(dy), float(dz), int(n_u), int(n_v), float(x_half), out_max, out_min)
    return out_max, out_min


@njit(cache=True)
def _parity_points_jit(tri, pts, centers_x, counts, degenerate):
    # counts[q, i] = number of surface crossings with x < centers_x[i] for ray q.
    for q in range(pts.shape[0]):
        yc = pts[q, 0]
        zc = pts[q, 1]
        for t in range(tri.shape[0]):
            x0 = tri[t, 0, 0]
            y0 = tri[t, 0, 1]
            z0 = tri[t, 0, 2]
            x1 = tri[t, 1, 0]
            y1 = tri[t, 1, 1]
            z1 = tri[t, 1, 2]
            x2 = tri[t, 2, 0]
            y2 = tri[t, 2, 1]
            z2 = tri[t, 2, 2]
            if yc < min(y0, min(y1, y2)) or yc > max(y0, max(y1, y2)):
                continue
            if zc < min(z0, min(z1, z2)) or zc > max(z0, max(z1, z2)):
                continue
            w0 = (y2 - y1) * (zc - z1) - (z2 - z1) * (yc - y1)
            w1 = (y0 - y2) * (zc - z2) - (z0 - z2) * (yc - y2)
            w2 = (y1 - y0) * (zc - z0) - (z1 - z0) * (yc - y0)
            pos = w0 > 0.0 and w1 > 0.0 and w2 > 0.0
            neg = w0 < 0.0 and w1 < 0.0 and w2 < 0.0
            if pos or neg:
                xs = (w0 * x0 + w1 * x1 + w2 * x2) / (w0 + w1 + w2)
                hit_center = False
                for i in range(centers_x.shape[0]):
                    if xs == centers_x[i]:
                        hit_center = True
                    elif xs < centers_x[i]:
                        counts[q, i] += 1
                if hit_center:
                    degenerate[q] = 1
            elif (w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0) or (
                w0 <= 0.0 and w1 <= 0.0 and w2 <= 0.0
            ):
                # On the closed projection boundary (or an area-zero triangle's
                # line): grazing configuration, let the caller perturb.
                degenerate[q] = 1


def _parity_points_numpy(tri, pts, centers_x, counts, degenerate):
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    for q in range(pts.shape[0]):
        yc, zc = pts[q]
        w0 = (v2[:, 1] - v1[:, 1]) * (zc - v1[:, 2]) - (v2[:, 2] - v1[:, 2]) * (yc - v1[:, 1])
        w1 = (v0[:, 1] - v2[:, 1]) * (zc - v2[:, 2]) - (v0[:, 2] - v2[:, 2]) * (yc - v2[:, 1])
        w2 = (v1[:, 1] - v0[:, 1]) * (zc - v0[:, 2]) - (v1[:, 2] - v0[:, 2]) * (yc - v0[:, 1])
        strict = ((w0 > 0) & (w1 > 0) & (w2 > 0)) | ((w0 < 0) & (w1 < 0) & (w2 < 0))
        closed = ((w0 >= 0) & (w1 >= 0) & (w2 >= 0)) | ((w0 <= 0) & (w1 <= 0) & (w2 <= 0))
        if (closed & ~strict).any():
            degenerate[q] = 1
        if not strict.any():
            continue
        s = (w0 + w1 + w2)[strict]
        xs = (w0[strict] * v0[strict, 0] + w1[strict] * v1[strict, 0] + w2[strict] * v2[strict, 0]) / s
        if np.isin(xs, centers_x).any():
            degenerate[q] = 1
        counts[q] += (xs[:, None] < centers_x[None, :]).sum(axis=0)


def parity_counts(tri, pts, centers_x):
    """Crossing counts below each block-center x for x-parallel rays.

    Returns (counts (Q, nx) int64, degenerate (Q,) uint8). A ray is flagged
    degenerate when it grazes a projected triangle boundary or a crossing
    coincides exactly with a block center.
    """
    counts = np.zeros((pts.shape[0], centers_x.shape[0]), dtype=np.int64)
    degenerate = np.zeros(pts.shape[0], dtype=np.uint8)
    impl = _parity_points_jit if NUMBA_AVAILABLE else _parity_points_numpy
    impl(tri, pts, centers_x, counts, degenerate)
    return counts, degenerate


@njit(cache=True)
def _bucket_fill_jit(tri, y_lo, z_lo, by, bz, ny, nz, cell_count, cell_start, cell_items, fill):
    for t in range(tri.shape[0]):
        ymin = min(tri[t, 0, 1], min(tri[t, 1, 1], tri[t, 2, 1]))
        ymax = max(tri[t, 0, 1], max(tri[t, 1, 1], tri[t, 2, 1]))
        zmin = min(tri[t, 0, 2], min(tri[t, 1, 2], tri[t, 2, 2]))
        zmax = max(tri[t, 0, 2], max(tri[t, 1, 2], tri[t, 2, 2]))
        j_lo = max(0, int(np.floor((ymin - y_lo) / by)))
        j_hi = min(ny - 1, int(np.floor((ymax - y_lo) / by)))
        k_lo = max(0, int(np.floor((zmin - z_lo) / bz)))
        k_hi = min(nz - 1, int(np.floor((zmax - z_lo) / bz)))
        for j in range(j_lo, j_hi + 1):
            for k in range(k_lo, k_hi + 1):
                c = j * nz + k
                if fill:
                    cell_items[cell_start[c] + cell_count[c]] = t
                cell_count[c] += 1


def build_column_buckets(tri, y_lo, z_lo, by, bz, ny, nz):
    """CSR buckets of triangle indices per (j, k) column, keyed by (y,z) bbox."""
    cell_count = np.zeros(ny * nz, dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)
    if NUMBA_AVAILABLE:
        _bucket_fill_jit(tri, y_lo, z_lo, by, bz, ny, nz, cell_count, empty, empty, False)
        cell_start = np.zeros(ny * nz + 1, dtype=np.int64)
        np.cumsum(cell_count, out=cell_start[1:])
        cell_items = np.empty(int(cell_start[-1]), dtype=np.int64)
        cell_count[:] = 0
        _bucket_fill_jit(tri, y_lo, z_lo, by, bz, ny, nz, cell_count, cell_start[:-1], cell_items, True)
        return cell_start, cell_items
    # numpy fallback: per-triangle python loop (tests use small meshes)
    buckets = [[] for _ in range(ny * nz)]
    for t in range(tri.shape[0]):
        ys = tri[t, :, 1]
        zs = tri[t, :, 2]
        j_lo = max(0, int(np.floor((ys.min() - y_lo) / by)))
        j_hi = min(ny - 1, int(np.floor((ys.max() - y_lo) / by)))
        k_lo = max(0, int(np.floor((zs.min() - z_lo) / bz)))
        k_hi = min(nz - 1, int(np.floor((zs.max() - z_lo) / bz)))
        for j in range(j_lo, j_hi + 1):
            for k in range(k_lo, k_hi + 1):
                buckets[j * nz + k].append(t)
    cell_start = np.zeros(ny * nz + 1, dtype=np.int64)
    cell_start[1:] = np.cumsum([len(b) for b in buckets])
    cell_items = np.array([t for b in buckets for t in b], dtype=np.int64)
    return cell_start, cell_items


@njit(cache=True)
def _parity_columns_jit(tri, cell_start, cell_items, y_pts, z_pts, nz, centers_x, counts, degenerate):
    ny = y_pts.shape[0]
    for j in range(ny):
        yc = y_pts[j]
        for k in range(nz):
            zc = z_pts[k]
            c = j * nz + k
            for s in range(cell_start[c], cell_start[c + 1]):
                t = cell_items[s]
                x0 = tri[t, 0, 0]
                y0 = tri[t, 0, 1]
                z0 = tri[t, 0, 2]
                x1 = tri[t, 1, 0]
                y1 = tri[t, 1, 1]
                z1 = tri[t, 1, 2]
                x2 = tri[t, 2, 0]
                y2 = tri[t, 2, 1]
                z2 = tri[t, 2, 2]
                w0 = (y2 - y1) * (zc - z1) - (z2 - z1) * (yc - y1)
                w1 = (y0 - y2) * (zc - z2) - (z0 - z2) * (yc - y2)
                w2 = (y1 - y0) * (zc - z0) - (z1 - z0) * (yc - y0)
                pos = w0 > 0.0 and w1 > 0.0 and w2 > 0.0
                neg = w0 < 0.0 and w1 < 0.0 and w2 < 0.0
                if pos or neg:
                    xs = (w0 * x0 + w1 * x1 + w2 * x2) / (w0 + w1 + w2)
                    hit_center = False
                    for i in range(centers_x.shape[0]):
                        if xs == centers_x[i]:
                            hit_center = True
                        elif xs < centers_x[i]:
                            counts[j, k, i] += 1
                    if hit_center:
                        degenerate[j, k] = 1
                elif (w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0) or (
                    w0 <= 0.0 and w1 <= 0.0 and w2 <= 0.0
                ):
                    degenerate[j, k] = 1


def parity_counts_columns(tri, y_pts, z_pts, centers_x, y_lo, by, z_lo, bz):
    """Crossing counts for the full (j, k) column grid, bucketed for big meshes."""
    ny, nz, nx = y_pts.shape[0], z_pts.shape[0], centers_x.shape[0]
    counts = np.zeros((ny, nz, nx), dtype=np.int64)
    degenerate = np.zeros((ny, nz), dtype=np.uint8)
    if ny == 0 or nz == 0:
        return counts, degenerate
    cell_start, cell_items = build_column_buckets(tri, y_lo, z_lo, by, bz, ny, nz)
    if NUMBA_AVAILABLE:
        _parity_columns_jit(tri, cell_start, cell_items, y_pts, z_pts, nz, centers_x, counts, degenerate)
        return counts, degenerate
    for j in range(ny):
        for k in range(nz):
            sel = cell_items[cell_start[j * nz + k] : cell_start[j * nz + k + 1]]
            if sel.size == 0:
                continue
            cnt, deg = parity_counts(tri[sel], np.array([[y_pts[j], z_pts[k]]]), centers_x)
            counts[j, k] = cnt[0]
            degenerate[j, k] = deg[0]
    return counts, degenerate


def warmup():
    """Force JIT compilation so first-use latency lands here, not in a request."""
    tri = np.array([[[0.0, -1.0, -1.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]]])
    raster_dual(tri, -1.0, -1.0, 0.5, 0.5, 4, 4, 10.0)
    parity_counts(tri, np.array([[0.1, 0.1]]), np.array([1.0]))
    parity_counts_columns(tri, np.array([0.0]), np.array([0.0]), np.array([1.0]), -1.0, 2.0, -1.0, 2.0)
