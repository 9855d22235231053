"""depth_raster: render semantics vs the ray-cast oracle, conservative pooling."""

import numpy as np
import pytest

from foamforge import (
    EMPTY,
    DepthTexture,
    DesignSpace,
    DimensionMismatch,
    Direction,
    EulerAngles,
    TriangleMesh,
    reduce_to_blocks,
    render_depth,
    render_depth_pair,
    rotate_mesh,
)
from foamforge.depth_raster import write_pgm
from conftest import make_box, make_box_union, make_octasphere, make_torus
import oracles


def empty_mesh():
    return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))


class TestRenderDepth:
    def test_empty_mesh_all_no_hit(self):
        space = DesignSpace(4, 4, 4, 10, 10, 10)
        tex = render_depth(empty_mesh(), space, Direction.PLUS_X, supersample=2)
        assert np.isnan(tex.values).all()
        assert tex.width == 8 and tex.height == 8

    def test_axis_aligned_cube_analytic(self):
        space = DesignSpace(6, 6, 6, 10, 10, 10)
        cube = make_box((-10, -10, -10), (10, 10, 10))
        s = 4
        tex = render_depth(cube, space, Direction.PLUS_X, supersample=s)
        for v in range(tex.height):
            zc = space.z_min + (v + 0.5) * (space.bz / s)
            for u in range(tex.width):
                yc = space.y_min + (u + 0.5) * (space.by / s)
                if abs(yc) <= 10 and abs(zc) <= 10:
                    assert tex.values[v, u] == 10.0
                else:
                    assert np.isnan(tex.values[v, u])

    def test_sphere_against_closed_form(self):
        r = 21.0
        space = DesignSpace(8, 8, 8, 8, 8, 8)
        sphere = make_octasphere(r, 4)
        s = 4
        tex = render_depth(sphere, space, Direction.PLUS_X, supersample=s)
        # Every point of the faceted surface lies between the sphere and the
        # inscribed sphere whose radius is the min facet-plane distance, so
        # the exact ray-sphere depths of those two spheres bound each texel.
        corners = sphere.vertices[sphere.triangles]
        normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        r_in = np.abs(np.einsum("ij,ij->i", normals, corners[:, 0])).min()
        assert r_in < r
        for v in range(tex.height):
            zc = space.z_min + (v + 0.5) * (space.bz / s)
            for u in range(tex.width):
                yc = space.y_min + (u + 0.5) * (space.by / s)
                rho2 = yc * yc + zc * zc
                got = tex.values[v, u]
                if rho2 < r_in * r_in:
                    # ray crosses the insphere: must hit, depth bracketed
                    assert not np.isnan(got)
                    hi = np.sqrt(r * r - rho2)
                    lo = np.sqrt(r_in * r_in - rho2)
                    assert lo - 1e-9 <= got <= hi + 1e-9
                elif rho2 > r * r:
                    assert np.isnan(got)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rasterizer_matches_raycast_oracle(self, seed):
        rng = np.random.default_rng(seed)
        space = DesignSpace(6, 5, 4, 9, 11, 13)
        mesh = rotate_mesh(
            make_box_union(rng, 18.0), EulerAngles(*rng.uniform(0, 360, 3))
        )
        s = 2
        plus, minus = render_depth_pair(mesh, space, supersample=s)
        for direction, tex in ((Direction.PLUS_X, plus), (Direction.MINUS_X, minus)):
            want = oracles.raycast_texture(mesh, space, direction, s)
            hit_got = ~np.isnan(tex.values)
            hit_want = ~np.isnan(want)
            np.testing.assert_array_equal(hit_got, hit_want)
            # contract tolerance: half a block along x
            assert np.nanmax(np.abs(np.where(hit_got, tex.values - want, 0.0))) <= space.bx / 2
            # in practice both paths evaluate the same plane equation
            np.testing.assert_allclose(
                tex.values[hit_got], want[hit_want], rtol=1e-9, atol=1e-9
            )

    def test_hit_values_stay_inside_space(self):
        space = DesignSpace(4, 6, 6, 5, 10, 10)  # narrow in x: cube pokes out
        cube = make_box((-30, -20, -20), (30, 20, 20))
        plus, minus = render_depth_pair(cube, space, supersample=2)
        assert np.nanmax(plus.values) <= space.width / 2
        assert np.nanmin(minus.values) >= -space.width / 2

    def test_supersample_must_be_positive(self):
        with pytest.raises(ValueError):
            render_depth(empty_mesh(), DesignSpace(2, 2, 2, 1, 1, 1), Direction.PLUS_X, 0)


class TestReduceToBlocks:
    def test_all_no_hit_all_empty(self):
        space = DesignSpace(4, 3, 2, 10, 10, 10)
        tex = DepthTexture(Direction.PLUS_X, 2, np.full((4, 6), np.nan))
        cdm = reduce_to_blocks(tex, space)
        assert (cdm.indices == EMPTY).all()

    def test_boundary_rule_plus_x(self):
        # Cube surface exactly on the block boundary at x=10: higher block.
        space = DesignSpace(6, 6, 6, 10, 10, 10)
        cube = make_box((-10, -10, -10), (10, 10, 10))
        tex = render_depth(cube, space, Direction.PLUS_X, supersample=4)
        cdm = reduce_to_blocks(tex, space)
        covered = cdm.indices != EMPTY
        assert covered.any()
        assert (cdm.indices[covered] == 4).all()  # block [10, 20]

    def test_boundary_rule_minus_x(self):
        space = DesignSpace(6, 6, 6, 10, 10, 10)
        cube = make_box((-10, -10, -10), (10, 10, 10))
        tex = render_depth(cube, space, Direction.MINUS_X, supersample=4)
        cdm = reduce_to_blocks(tex, space)
        covered = cdm.indices != EMPTY
        assert (cdm.indices[covered] == 1).all()  # block [-20, -10]

    @pytest.mark.parametrize("direction", [Direction.PLUS_X, Direction.MINUS_X])
    def test_random_textures_match_pooling_oracle(self, direction):
        rng = np.random.default_rng(7)
        space = DesignSpace(9, 5, 4, 7.5, 11.0, 6.0)
        s = 3
        for _ in range(20):
            vals = rng.uniform(-space.width / 2, space.width / 2, (space.nz * s, space.ny * s))
            vals[rng.random(vals.shape) < 0.3] = np.nan
            tex = DepthTexture(direction, s, vals)
            got = reduce_to_blocks(tex, space).indices
            want = oracles.pool_to_indices(vals, space, s, direction)
            np.testing.assert_array_equal(got, want)

    def test_dimension_mismatch(self):
        space = DesignSpace(4, 3, 2, 10, 10, 10)
        tex = DepthTexture(Direction.PLUS_X, 2, np.full((5, 6), np.nan))
        with pytest.raises(DimensionMismatch):
            reduce_to_blocks(tex, space)


class TestRenderReduceProperties:
    @pytest.mark.parametrize("seed", range(4))
    def test_minus_leq_plus_and_same_hit_set(self, seed):
        rng = np.random.default_rng(100 + seed)
        space = DesignSpace(8, 6, 6, 8, 9, 10)
        kind = seed % 3
        if kind == 0:
            mesh = make_octasphere(rng.uniform(8, 20), 3)
        elif kind == 1:
            mesh = make_torus(rng.uniform(10, 16), rng.uniform(3, 6), 48, 24)
        else:
            mesh = make_box_union(rng, 20.0)
        mesh = rotate_mesh(mesh, EulerAngles(*rng.uniform(0, 360, 3)))
        plus, minus = render_depth_pair(mesh, space, supersample=4)
        a = reduce_to_blocks(plus, space)
        b = reduce_to_blocks(minus, space)
        # same-footprint hit sets agree exactly
        np.testing.assert_array_equal(a.indices == EMPTY, b.indices == EMPTY)
        covered = a.indices != EMPTY
        assert (b.indices[covered] <= a.indices[covered]).all()

    @pytest.mark.parametrize("seed", range(6))
    def test_supersample_never_shrinks_extent(self, seed):
        rng = np.random.default_rng(200 + seed)
        space = DesignSpace(8, 6, 6, 9, 9, 9)
        kind = seed % 3
        if kind == 0:
            mesh = make_octasphere(rng.uniform(10, 22), 3)
        elif kind == 1:
            mesh = make_torus(rng.uniform(12, 18), rng.uniform(3, 6), 48, 24)
        else:
            mesh = make_box_union(rng, 22.0)
        mesh = rotate_mesh(mesh, EulerAngles(*rng.uniform(0, 360, 3)))
        prev_a = prev_b = None
        for s in (1, 2, 4, 8):
            plus, minus = render_depth_pair(mesh, space, supersample=s)
            a = reduce_to_blocks(plus, space).indices
            b = reduce_to_blocks(minus, space).indices
            if prev_a is not None:
                both = (prev_a != EMPTY) & (a != EMPTY)
                assert (a[both] >= prev_a[both]).all()
                assert (b[both] <= prev_b[both]).all()
                # once covered, coverage never disappears as sampling refines
                assert ((a != EMPTY) | (prev_a == EMPTY)).all()
            prev_a, prev_b = a, b


def test_pgm_dump_shape_and_header():
    space = DesignSpace(4, 4, 4, 10, 10, 10)
    tex = render_depth(make_box((-10, -10, -10), (10, 10, 10)), space, Direction.PLUS_X, 2)
    data = write_pgm(tex, space)
    assert data.startswith(b"P5\n8 8\n65535\n")
    assert len(data) == len(b"P5\n8 8\n65535\n") + 8 * 8 * 2
