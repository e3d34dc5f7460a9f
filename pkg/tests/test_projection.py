"""Two-half-space projections and the level-set projection loops."""

import numpy as np
import pytest

from levelproj.constraints import ConstraintKind, ConstraintSpec, FeatureGraph
from levelproj.errors import NumericalError
from levelproj.oracles import (grid_projection, halfspace_pair_from_points,
                               halfspace_projection, l1_ball_projection)
from levelproj.projection import (ProjectionOptions, ProjectionOutcome,
                                  haugazeau_projection, project_level_set,
                                  project_level_set_multi,
                                  subgradient_projection)


def halfspace_gap(x, y, p):
    """Positive when p lies outside H(x, y) = {p : <p - y, x - y> <= 0}."""
    return float((p - y) @ (x - y))


class TestHaugazeauProjection:
    def test_degenerate_identical_points(self):
        q = haugazeau_projection(np.array([1.0, 1.0]), np.array([1.0, 1.0]),
                                 np.array([1.0, 1.0]))
        np.testing.assert_array_equal(q, [1.0, 1.0])

    def test_case_three(self):
        # QP oracle on {p1 + p2 >= 2, p2 <= 0} from the origin gives (2, 0).
        q = haugazeau_projection(np.array([0.0, 0.0]), np.array([1.0, 1.0]),
                                 np.array([1.0, 0.0]))
        np.testing.assert_allclose(q, [2.0, 0.0], atol=1e-14)

    def test_case_two(self):
        # QP oracle on {p1 >= 1, p2 <= p1 - 3} from the origin.
        q = haugazeau_projection(np.array([0.0, 0.0]), np.array([1.0, 0.0]),
                                 np.array([2.0, -1.0]))
        np.testing.assert_allclose(q, [1.5, -1.5], atol=1e-14)

    def test_inconsistent_halfspaces_detected(self):
        # H(x,y) = {p1 >= 1} and H(y,z) = {p1 <= 0} are disjoint.
        with pytest.raises(NumericalError):
            haugazeau_projection(np.array([0.0, 0.0]), np.array([1.0, 0.0]),
                                 np.array([0.0, 0.0]))

    def test_membership_and_optimality_on_random_triples(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            d = int(rng.integers(2, 11))
            x, y, z = rng.standard_normal((3, d)) * rng.uniform(0.2, 4.0)
            q = haugazeau_projection(x, y, z)
            scale = 1.0 + np.linalg.norm(x) + np.linalg.norm(y) + \
                np.linalg.norm(z)
            assert halfspace_gap(x, y, q) <= 1e-9 * scale
            assert halfspace_gap(y, z, q) <= 1e-9 * scale
            oracle = halfspace_projection(
                [halfspace_pair_from_points(x, y),
                 halfspace_pair_from_points(y, z)], x)
            assert np.linalg.norm(x - q) <= np.linalg.norm(x - oracle) + 1e-6


class TestSubgradientProjection:
    def test_feasible_point_unchanged(self):
        spec = ConstraintSpec(ConstraintKind.L1, 5.0)
        p = np.array([1.0, 1.0])
        out = subgradient_projection(spec, p)
        np.testing.assert_array_equal(out, p)
        assert out is not p

    def test_l1_single_cut(self):
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        np.testing.assert_allclose(
            subgradient_projection(spec, np.array([2.0, 0.0])), [1.0, 0.0],
            atol=1e-15)

    def test_l1_cut_can_coincide_with_projection(self):
        # One step from (3, 1) with eta = 2: slack -2, s = (1, 1) gives
        # (2, 0), which here equals the exact ball projection.
        spec = ConstraintSpec(ConstraintKind.L1, 2.0)
        out = subgradient_projection(spec, np.array([3.0, 1.0]))
        np.testing.assert_allclose(out, [2.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(out,
                                   l1_ball_projection(np.array([3.0, 1.0]),
                                                      2.0), atol=1e-15)

    def test_result_halfspace_contains_level_set(self):
        rng = np.random.default_rng(5)
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        for _ in range(100):
            p = rng.standard_normal(6) * 2.0
            if spec.value(p) <= spec.eta:
                continue
            q = subgradient_projection(spec, p)
            for _ in range(20):
                c = rng.standard_normal(6)
                c *= rng.uniform(0, spec.eta) / max(np.abs(c).sum(), 1e-12)
                assert halfspace_gap(p, q, c) <= 1e-9


class TestProjectLevelSet:
    def test_interior_point_returned_unchanged(self):
        spec = ConstraintSpec(ConstraintKind.L1, 5.0)
        p, status = project_level_set(spec, np.array([1.0, 1.0]))
        np.testing.assert_array_equal(p, [1.0, 1.0])
        assert status.outcome is ProjectionOutcome.FEASIBLE_HIT
        assert status.iterations_used == 0
        assert status.final_violation == 0.0

    def test_l1_matches_sort_oracle(self):
        spec = ConstraintSpec(ConstraintKind.L1, 2.0)
        p0 = np.array([3.0, 1.0])
        p, status = project_level_set(spec, p0,
                                      ProjectionOptions(max_inner_iters=20))
        np.testing.assert_allclose(p, l1_ball_projection(p0, 2.0), atol=1e-6)
        assert status.iterations_used <= 20

    def test_affine_constraint_exact_in_one_iteration(self):
        # A single pairwise-difference edge defines a slab; from outside,
        # the first cut is the exact projection onto the violated face.
        g = FeatureGraph([(0, 1)], 2)
        spec = ConstraintSpec(ConstraintKind.PAIRWISE_DIFF, 1.0, g)
        p0 = np.array([3.0, 0.0])
        p, status = project_level_set(spec, p0)
        assert status.outcome is ProjectionOutcome.FEASIBLE_HIT
        assert status.iterations_used == 1
        oracle = halfspace_projection([(np.array([1.0, -1.0]), 1.0)], p0)
        np.testing.assert_allclose(p, oracle, atol=1e-12)

    def test_monotone_distance_expansion(self):
        rng = np.random.default_rng(9)
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        p0 = rng.standard_normal(40)
        _, status = project_level_set(
            spec, p0, ProjectionOptions(max_inner_iters=40), collect_path=True)
        dists = np.linalg.norm(status.path - p0, axis=1)
        assert np.all(np.diff(dists) >= -1e-12)

    def test_distance_converges_fast_in_high_dimension(self):
        for trial in range(20):
            rng = np.random.default_rng(1000 + trial)
            p0 = rng.standard_normal(1000)
            eta = 0.1 * np.abs(p0).sum()
            spec = ConstraintSpec(ConstraintKind.L1, eta)
            p, _ = project_level_set(spec, p0,
                                     ProjectionOptions(max_inner_iters=10))
            exact = l1_ball_projection(p0, eta)
            dist_exact = np.linalg.norm(p0 - exact)
            gap = abs(np.linalg.norm(p0 - p) - dist_exact) / dist_exact
            assert gap <= 1e-3
            # The iterate itself trails the distance; see decisions ledger.
            assert np.linalg.norm(p - exact) / np.linalg.norm(p0) <= 5e-2

    def test_idempotent_on_feasible_input(self):
        rng = np.random.default_rng(10)
        spec = ConstraintSpec(ConstraintKind.L1, 3.0)
        for _ in range(20):
            w = rng.standard_normal(8)
            w *= rng.uniform(0, 3.0) / max(np.abs(w).sum(), 1e-12)
            p, status = project_level_set(spec, w)
            np.testing.assert_array_equal(p, w)
            assert status.iterations_used == 0

    def test_budget_exhaustion_reports_violation(self):
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        p0 = np.random.default_rng(15).standard_normal(50)
        p, status = project_level_set(spec, p0,
                                      ProjectionOptions(max_inner_iters=3))
        assert status.outcome is ProjectionOutcome.BUDGET_EXHAUSTED
        assert status.iterations_used == 3
        assert status.final_violation == pytest.approx(
            max(spec.value(p) - 1.0, 0.0))

    def test_feasibility_tolerance_reports_tolerance_met(self):
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        p0 = np.random.default_rng(16).standard_normal(50)
        opts = ProjectionOptions(max_inner_iters=2000,
                                 feasibility_tolerance=5e-3)
        p, status = project_level_set(spec, p0, opts)
        assert status.outcome is ProjectionOutcome.TOLERANCE_MET
        assert 0.0 < status.final_violation <= 5e-3
        assert status.iterations_used < 2000

    def test_distance_tolerance_stops_early(self):
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        p0 = np.random.default_rng(17).standard_normal(50)
        opts = ProjectionOptions(max_inner_iters=500, distance_tolerance=1e-2)
        _, status = project_level_set(spec, p0, opts)
        assert status.outcome is ProjectionOutcome.TOLERANCE_MET
        assert status.iterations_used < 500

    def test_options_validation(self):
        with pytest.raises(ValueError):
            ProjectionOptions(max_inner_iters=0)
        with pytest.raises(ValueError):
            ProjectionOptions(feasibility_tolerance=-1.0)

    def test_path_collection_layout(self):
        spec = ConstraintSpec(ConstraintKind.L1, 2.0)
        p0 = np.array([3.0, 1.0])
        p, status = project_level_set(spec, p0, collect_path=True)
        np.testing.assert_array_equal(status.path[0], p0)
        np.testing.assert_array_equal(status.path[-1], p)
        assert len(status.path) == status.iterations_used + 1


class TestProjectLevelSetMulti:
    def test_single_constraint_reduces_to_plain_routine(self):
        rng = np.random.default_rng(12)
        spec = ConstraintSpec(ConstraintKind.L1, 2.0)
        for _ in range(20):
            p0 = rng.standard_normal(15) * 2.0
            opts = ProjectionOptions(max_inner_iters=30)
            p1, s1 = project_level_set(spec, p0, opts, collect_path=True)
            p2, s2 = project_level_set_multi([spec], [1.0], p0, opts,
                                             collect_path=True)
            assert s1.iterations_used == s2.iterations_used
            assert len(s1.path) == len(s2.path)
            for a, b in zip(s1.path, s2.path):
                np.testing.assert_allclose(a, b, atol=1e-12)

    def test_duplicated_constraint_same_limit(self):
        spec = ConstraintSpec(ConstraintKind.L1, 2.0)
        p0 = np.array([3.0, 1.0])
        opts = ProjectionOptions(max_inner_iters=50)
        p_single, _ = project_level_set(spec, p0, opts)
        p_double, _ = project_level_set_multi([spec, spec], [0.5, 0.5], p0,
                                              opts)
        np.testing.assert_allclose(p_double, p_single, atol=1e-9)

    def test_intersection_matches_grid_oracle(self):
        # {||w||_1 <= 2} intersected with {|w_0| <= 0.5} from (3, 1).
        ball = ConstraintSpec(ConstraintKind.L1, 2.0)
        coord = ConstraintSpec(ConstraintKind.L1, 0.5, support=[0])
        p0 = np.array([3.0, 1.0])
        opts = ProjectionOptions(max_inner_iters=2000,
                                 feasibility_tolerance=1e-10)
        p, _ = project_level_set_multi([ball, coord], [0.5, 0.5], p0, opts)

        def value_batch(pts):
            # Encode the intersection as one level set at eta = 1.
            return np.maximum(np.abs(pts).sum(axis=1) / 2.0,
                              np.abs(pts[:, 0]) / 0.5)

        oracle = grid_projection(value_batch, 1.0, p0, box_radius=4.0)
        np.testing.assert_allclose(p, oracle, atol=1e-4)
        # Closed form: first coordinate clamps to 0.5, second stays at 1.
        np.testing.assert_allclose(p, [0.5, 1.0], atol=1e-4)

    def test_interior_point_feasible_hit(self):
        ball = ConstraintSpec(ConstraintKind.L1, 5.0)
        coord = ConstraintSpec(ConstraintKind.L1, 2.0, support=[0])
        p, status = project_level_set_multi([ball, coord], [0.5, 0.5],
                                            np.array([1.0, 1.0]))
        np.testing.assert_array_equal(p, [1.0, 1.0])
        assert status.outcome is ProjectionOutcome.FEASIBLE_HIT
        assert status.iterations_used == 0

    def test_weight_validation(self):
        spec = ConstraintSpec(ConstraintKind.L1, 1.0)
        with pytest.raises(ValueError):
            project_level_set_multi([spec], [0.5], np.zeros(2))
        with pytest.raises(ValueError):
            project_level_set_multi([spec, spec], [0.7, 0.6], np.zeros(2))
        with pytest.raises(ValueError):
            project_level_set_multi([], [], np.zeros(2))
