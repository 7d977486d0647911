import numpy as np
import pytest

from dcjac.dcmax import load_problem
from dcjac.instances import random_affine_problem
from dcjac.jacobian import clarke_jacobian_element
from dcjac.oracle import (
    brute_force_subdifferential,
    finite_diff_dd,
    hull_membership,
    is_affine,
    sample_limiting_jacobians,
)
from dcjac.dcmax import dd_F
from util import ABS_DOC


class TestSampleLimitingJacobians:
    def test_smooth_instance_one_profile(self):
        F = load_problem({"n": 2, "m": 1, "components": [{"g": ["x1 + 2*x2"]}]})
        samples = sample_limiting_jacobians(F, [0.0, 0.0], radius=0.5, count=32)
        assert len(samples) == 1
        np.testing.assert_allclose(samples[0].jacobian, [[1.0, 2.0]])

    def test_abs_two_profiles(self):
        F = load_problem(ABS_DOC)
        samples = sample_limiting_jacobians(F, [0.0], radius=1.0, count=64)
        assert sorted(s.jacobian.tolist() for s in samples) == [[[-1.0]], [[1.0]]]
        for s in samples:
            assert len(s.active_profile) == 1

    def test_max_of_coordinates(self):
        F = load_problem({"n": 2, "m": 1, "components": [{"g": ["x1", "x2"]}]})
        samples = sample_limiting_jacobians(F, [0.0, 0.0], radius=1.0, count=128)
        assert sorted(s.jacobian.tolist() for s in samples) == [[[0.0, 1.0]], [[1.0, 0.0]]]

    def test_every_sampled_jacobian_in_brute_force_output(self):
        for seed in (1, 12, 31):
            F = random_affine_problem(seed % 3 + 1, seed % 2 + 1, 4, seed=seed)
            x = np.zeros(F.n)
            mats = brute_force_subdifferential(F, x)
            for s in sample_limiting_jacobians(F, x, radius=1e-3, count=400, seed=seed):
                assert any(np.max(np.abs(s.jacobian - m)) <= 1e-10 for m in mats)

    def test_bad_arguments(self):
        F = load_problem(ABS_DOC)
        with pytest.raises(ValueError):
            sample_limiting_jacobians(F, [0.0], radius=0.0)
        with pytest.raises(ValueError):
            sample_limiting_jacobians(F, [0.0], count=0)


class TestHullMembership:
    def test_midpoint(self):
        cert = hull_membership(np.array([[0.0]]), [np.array([[-1.0]]), np.array([[1.0]])])
        assert cert.member is True
        np.testing.assert_allclose(cert.weights, [0.5, 0.5])

    def test_outside_point_violation(self):
        cert = hull_membership(np.array([[2.0]]), [np.array([[-1.0]]), np.array([[1.0]])])
        assert cert.member is False
        assert cert.violation >= 1.0 - 1e-12

    def test_single_candidate_weight_one(self):
        c = np.array([[3.0, -4.0], [0.5, 2.0]])
        cert = hull_membership(c, [c])
        assert cert.member is True
        np.testing.assert_allclose(cert.weights, [1.0])

    def test_invariant_under_duplication(self):
        cands = [np.array([[-1.0, 0.0]]), np.array([[1.0, 1.0]]), np.array([[0.0, -2.0]])]
        query = np.array([[0.1, -0.1]])
        base = hull_membership(query, cands)
        doubled = hull_membership(query, cands + cands)
        assert base.member == doubled.member
        assert doubled.violation == pytest.approx(base.violation, abs=1e-12)

    def test_invariant_under_positive_scaling(self):
        cands = [np.array([[-1.0, 0.0]]), np.array([[1.0, 1.0]]), np.array([[0.0, -2.0]])]
        inside = np.array([[0.1, -0.1]])
        outside = np.array([[5.0, 5.0]])
        for s in (1e-3, 1.0, 1e4):
            assert hull_membership(inside * s, [c * s for c in cands]).member is True
            assert hull_membership(outside * s, [c * s for c in cands]).member is False

    def test_interior_point_in_higher_dimension(self):
        rng = np.random.default_rng(8)
        cands = [rng.uniform(-3, 3, size=(2, 3)) for _ in range(9)]
        weights = rng.random(9)
        weights /= weights.sum()
        query = sum(w * c for w, c in zip(weights, cands))
        cert = hull_membership(query, cands)
        assert cert.member is True
        combo = sum(w * c for w, c in zip(cert.weights, cands))
        assert np.linalg.norm(combo - query) <= 1e-8
        assert cert.weights.min() >= 0.0
        assert cert.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_separated_point_distance(self):
        # hull is the segment x in [-1, 1], y = 0; query at (0, 3)
        cands = [np.array([[-1.0, 0.0]]), np.array([[1.0, 0.0]])]
        cert = hull_membership(np.array([[0.0, 3.0]]), cands)
        assert cert.member is False
        assert cert.violation == pytest.approx(3.0, rel=1e-12)

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            hull_membership(np.zeros((1, 1)), [])


class TestBruteForce:
    def test_abs(self):
        F = load_problem(ABS_DOC)
        mats = brute_force_subdifferential(F, [0.0])
        assert sorted(m.tolist() for m in mats) == [[[-1.0]], [[1.0]]]

    def test_three_region_max(self):
        F = load_problem({"n": 2, "m": 1, "components": [{"g": ["x1 + x2", "2*x1", "0"]}]})
        mats = brute_force_subdifferential(F, [0.0, 0.0])
        assert sorted(m.tolist() for m in mats) == [
            [[0.0, 0.0]],
            [[1.0, 1.0]],
            [[2.0, 0.0]],
        ]

    def test_smooth_affine_single_jacobian(self):
        F = load_problem({"n": 3, "m": 2, "components": [{"g": ["x1 - x3"]}, {"g": ["2*x2"]}]})
        mats = brute_force_subdifferential(F, [0.0, 0.0, 0.0])
        assert len(mats) == 1
        np.testing.assert_allclose(mats[0], [[1.0, 0.0, -1.0], [0.0, 2.0, 0.0]])

    def test_non_affine_rejected(self):
        F = load_problem({"n": 1, "m": 1, "components": [{"g": ["sin(x1)"]}]})
        assert not is_affine(F)
        with pytest.raises(ValueError, match="affine"):
            brute_force_subdifferential(F, [0.0])

    def test_report_fields(self):
        F = load_problem(ABS_DOC)
        mats, report = brute_force_subdifferential(F, [0.0], return_report=True)
        assert report.profiles_found == len(mats) == 2
        assert report.samples_kept > 0
        assert report.enumerated

    def test_zero_measure_region_excluded(self):
        # the "0" piece only wins on the line x1 = x2, which has empty
        # interior, so only two regions exist
        doc = {"n": 2, "m": 1, "components": [{"g": ["0", "5*x1 - 5*x2", "5*x2 - 5*x1"]}]}
        F = load_problem(doc)
        mats = brute_force_subdifferential(F, [0.0, 0.0])
        assert sorted(m.tolist() for m in mats) == [[[-5.0, 5.0]], [[5.0, -5.0]]]

    def test_enumeration_supplements_starved_sampling(self):
        # with almost no probes the sampler cannot see all three regions;
        # the exhaustive pattern enumeration must still find them
        F = load_problem({"n": 2, "m": 1, "components": [{"g": ["x1 + x2", "2*x1", "0"]}]})
        mats = brute_force_subdifferential(F, [0.0, 0.0], probe_count=2)
        assert sorted(m.tolist() for m in mats) == [
            [[0.0, 0.0]],
            [[1.0, 1.0]],
            [[2.0, 0.0]],
        ]


class TestFiniteDiffDD:
    def test_abs_at_origin(self):
        F = load_problem(ABS_DOC)
        res = finite_diff_dd(F, [0.0], [1.0])
        np.testing.assert_allclose(res.value, [1.0])

    def test_smooth_slope(self):
        F = load_problem({"n": 1, "m": 1, "components": [{"g": ["x1^2"]}]})
        res = finite_diff_dd(F, [1.0], [1.0])
        assert res.value[0] == pytest.approx(2.0, abs=1e-6)
        assert res.convergence <= 1e-2

    def test_agrees_with_dd_F(self):
        rng = np.random.default_rng(19)
        for seed in (4, 9, 27):
            F = random_affine_problem(2, 2, 4, seed=seed)
            x = rng.uniform(-1, 1, size=2)
            y = rng.uniform(-1, 1, size=2)
            res = finite_diff_dd(F, x, y, t_schedule=(1e-3, 1e-5, 1e-7))
            np.testing.assert_allclose(res.value, dd_F(F, x, y), atol=1e-5)

    def test_schedule_validation(self):
        F = load_problem(ABS_DOC)
        with pytest.raises(ValueError, match="decreasing"):
            finite_diff_dd(F, [0.0], [1.0], t_schedule=(1e-5, 1e-3))


class TestTheoremOnRandomInstances:
    def test_selected_element_is_hull_member_both_conventions(self):
        for seed in range(25):
            F = random_affine_problem(seed % 4 + 1, seed % 3 + 1, 5, seed=seed + 2000)
            x = np.zeros(F.n)
            mats = brute_force_subdifferential(F, x)
            for conv in ("min", "max"):
                elem = clarke_jacobian_element(F, x, convention=conv)
                cert = hull_membership(elem.xi, mats)
                assert cert.member is True, (seed, conv, cert.violation)
