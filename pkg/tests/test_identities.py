import json

import numpy as np
import pytest

from polygen.identities import (
    IdentityReport,
    check_lemma_n_factors,
    check_lemma_two_factors,
    rel_error,
    run_claim_suite,
    run_lemma_suite,
)


class TestLemmaTwoFactors:
    def test_all_ones_2x1(self):
        ones = np.ones((2, 1))
        # both sides reduce to [[sum of four products]] = [[4]]
        report = check_lemma_two_factors(ones, ones, ones, ones, tol=1e-12)
        assert report.passed and report.max_rel_error <= 1e-15
        lhs = np.kron(ones, ones).T @ np.kron(ones, ones)
        np.testing.assert_array_equal(lhs, [[4.0]])

    def test_scalar_second_factor_reduces_to_matrix_product(self):
        rng = np.random.default_rng(0)
        a1, b1 = rng.standard_normal((3, 2)), rng.standard_normal((3, 4))
        one = np.ones((1, 2)), np.ones((1, 4))
        report = check_lemma_two_factors(a1, one[0], b1, one[1], tol=1e-12)
        assert report.passed

    def test_100_random_instances(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(100):
            i1, i2, kk, ll = rng.integers(1, 6, size=4)
            a1, a2 = rng.uniform(-1, 1, (i1, kk)), rng.uniform(-1, 1, (i2, kk))
            b1, b2 = rng.uniform(-1, 1, (i1, ll)), rng.uniform(-1, 1, (i2, ll))
            worst = max(worst, check_lemma_two_factors(a1, a2, b1, b2).max_rel_error)
        assert worst <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            check_lemma_two_factors(np.ones((2, 2)), np.ones((3, 2)), np.ones((3, 2)), np.ones((3, 2)))


class TestLemmaNFactors:
    def test_n2_reduces_to_base_case(self):
        rng = np.random.default_rng(2)
        a = [rng.uniform(-1, 1, (3, 2)), rng.uniform(-1, 1, (2, 2))]
        b = [rng.uniform(-1, 1, (3, 4)), rng.uniform(-1, 1, (2, 4))]
        r_n = check_lemma_n_factors(a, b)
        r_2 = check_lemma_two_factors(a[0], a[1], b[0], b[1])
        assert r_n.max_rel_error == r_2.max_rel_error

    def test_n4_random(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(50):
            rows = rng.integers(1, 5, size=4)
            a = [rng.uniform(-1, 1, (r, 3)) for r in rows]
            b = [rng.uniform(-1, 1, (r, 2)) for r in rows]
            worst = max(worst, check_lemma_n_factors(a, b).max_rel_error)
        assert worst <= 1e-11

    def test_identity_pair_insertion(self):
        rng = np.random.default_rng(4)
        a = [rng.uniform(-1, 1, (3, 2)), np.eye(2), rng.uniform(-1, 1, (2, 2))]
        b = [rng.uniform(-1, 1, (3, 2)), np.eye(2), rng.uniform(-1, 1, (2, 2))]
        assert check_lemma_n_factors(a, b).passed

    def test_bad_lists(self):
        with pytest.raises(ValueError):
            check_lemma_n_factors([np.ones((2, 2))], [np.ones((2, 2))])


class TestClaimSuite:
    def test_default_suite_passes(self):
        reports = run_claim_suite(seed=0, tol=1e-9)
        assert len(reports) == 4
        assert [r.name for r in reports] == [
            "claim1_model1_third_order",
            "claim2_nested_second_order",
            "claim3_model2_third_order",
            "claim4_model1_general_order",
        ]
        assert all(r.passed for r in reports)
        assert all(r.instances == 100 for r in reports)

    def test_zero_tolerance_fails_with_nonzero_error(self):
        reports = run_claim_suite(seed=0, tol=0.0, instances=20)
        assert any(not r.passed for r in reports)
        assert all(r.max_rel_error > 0.0 for r in reports)

    def test_deterministic_given_seed(self):
        a = run_claim_suite(seed=7, instances=10)
        b = run_claim_suite(seed=7, instances=10)
        assert [(r.name, r.max_rel_error) for r in a] == [(r.name, r.max_rel_error) for r in b]
        c = run_claim_suite(seed=8, instances=10)
        assert [r.max_rel_error for r in a] != [r.max_rel_error for r in c]


class TestLemmaSuite:
    def test_default_suite_passes(self):
        reports = run_lemma_suite(seed=0, tol=1e-9)
        assert [r.name for r in reports] == ["lemma_two_factors", "lemma_3_factors", "lemma_4_factors", "lemma_5_factors"]
        assert all(r.passed and r.instances == 100 for r in reports)

    def test_json_lines(self):
        for report in run_lemma_suite(seed=1, instances=5):
            doc = json.loads(report.to_json())
            assert set(doc) == {"name", "max_rel_error", "instances", "passed"}


class TestRelError:
    def test_stable_near_zero(self):
        assert rel_error(np.zeros(3), np.zeros(3)) == 0.0
        assert rel_error(np.zeros(3), 1e-12 * np.ones(3)) <= 1e-12

    def test_report_invariant(self):
        r = IdentityReport(name="x", max_rel_error=1e-10, instances=1, passed=True)
        assert r.passed == (r.max_rel_error <= 1e-9)
