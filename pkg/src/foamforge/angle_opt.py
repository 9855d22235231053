"""Rotation-angle initialization by greedy foam-volume maximization.

The objective is the normalized foam volume: the fraction of design-space
blocks left for foam after the two-sided depth extrusion. Coordinate
descent sweeps one Euler axis at a time over every multiple of the step in
[0, 360), accepting the argmax (ties keep the smallest angle), and stops
after a full round without change. This is an initializer for manual
editing, not a global optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

from .block_map import build_block_map
from .depth_raster import DEFAULT_SUPERSAMPLE, DesignSpace, reduce_to_blocks, render_depth_pair
from .mesh_core import EulerAngles, TriangleMesh, rotate_mesh

_AXES = ("psi", "theta", "phi")


@dataclass(frozen=True)
class OptimizerConfig:
    """Sweep schedule: step must divide 360, axes fixed as (psi, theta, phi)."""

    step: float = 5.0
    max_rounds: int = 10

    def __post_init__(self):
        if self.step <= 0 or abs(360.0 / self.step - round(360.0 / self.step)) > 1e-12:
            raise ValueError("step must be positive and divide 360")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")

    @property
    def candidates_per_axis(self) -> int:
        return int(round(360.0 / self.step))


@dataclass
class ScoreReport:
    angles: EulerAngles
    f_score: float
    rounds_used: int
    evaluations: int

    def to_json_obj(self) -> dict:
        return {
            "angles_deg": list(self.angles.as_tuple()),
            "f_score": self.f_score,
            "evaluations": self.evaluations,
            "rounds_used": self.rounds_used,
        }


def foam_volume_score(
    mesh: TriangleMesh,
    space: DesignSpace,
    angles: EulerAngles,
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> float:
    """Foam block fraction in [0, 1] for the mesh posed at the given angles."""
    rotated = rotate_mesh(mesh, angles)
    tex_a, tex_b = render_depth_pair(rotated, space, supersample)
    bm = build_block_map(reduce_to_blocks(tex_a, space), reduce_to_blocks(tex_b, space), space)
    return bm.foam_block_count / space.total_blocks


def optimize_rotation(
    mesh: TriangleMesh,
    space: DesignSpace,
    cfg: OptimizerConfig = OptimizerConfig(),
    start: EulerAngles = EulerAngles(0.0, 0.0, 0.0),
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> ScoreReport:
    """Coordinate descent on the foam fraction; deterministic and monotone.

    Each axis sweep evaluates every multiple of cfg.step in [0, 360) with the
    other axes held fixed and moves to the best candidate; the incumbent pose
    always stays in the candidate set, so the accepted score never drops.
    Repeated poses are memoized, so the evaluation count stays within
    max_rounds * 3 * (360 / step).
    """
    cache: Dict[Tuple[float, float, float], float] = {}
    evaluations = 0

    def score(angles: EulerAngles) -> float:
        nonlocal evaluations
        key = angles.as_tuple()
        if key not in cache:
            cache[key] = foam_volume_score(mesh, space, angles, supersample)
            evaluations += 1
        return cache[key]

    current = start
    best = score(current)
    rounds_used = 0
    for _ in range(cfg.max_rounds):
        rounds_used += 1
        changed = False
        for axis in _AXES:
            fixed = {a: getattr(current, a) for a in _AXES}
            best_angle = fixed[axis] % 360.0
            best_f = best
            for m in range(cfg.candidates_per_axis):
                angle = m * cfg.step
                cand = EulerAngles(**{**fixed, axis: angle})
                f = score(cand)
                if f > best_f or (f == best_f and angle < best_angle):
                    best_f, best_angle = f, angle
            if best_angle != fixed[axis] % 360.0:
                current = EulerAngles(**{**fixed, axis: best_angle})
                changed = True
            best = best_f
        if not changed:
            break
    return ScoreReport(angles=current, f_score=best, rounds_used=rounds_used, evaluations=evaluations)
