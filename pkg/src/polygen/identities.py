"""Executable algebraic identities: Khatri-Rao/Hadamard lemmas and the
model-equivalence claims, run over randomized instances.

Each check reports the worst relative error it saw, with relative error
defined as ``max|lhs - rhs| / (1 + max|lhs|)`` so near-zero instances do
not blow up the ratio.  Suites are deterministic given their seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .models import (
    Model2Params,
    forward_explicit,
    forward_model1,
    forward_model1_sumform,
    forward_model2,
    init_model1,
    init_model2,
    materialize_model1,
    materialize_model2,
)
from .tensor_ops import khatri_rao, khatri_rao_list

DIM_CHOICES = (1, 2, 3, 5)


@dataclass
class IdentityReport:
    name: str
    max_rel_error: float
    instances: int
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "max_rel_error": self.max_rel_error,
                "instances": self.instances,
                "passed": self.passed,
            }
        )


def rel_error(lhs, rhs) -> float:
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    denom = 1.0 + np.max(np.abs(lhs)) if lhs.size else 1.0
    diff = np.max(np.abs(lhs - rhs)) if lhs.size else 0.0
    return float(diff / denom)


def _report(name: str, errors, tol: float) -> IdentityReport:
    worst = float(max(errors))
    return IdentityReport(name=name, max_rel_error=worst, instances=len(errors), passed=worst <= tol)


def _lemma_two_error(a1, a2, b1, b2) -> float:
    lhs = khatri_rao(a1, a2).T @ khatri_rao(b1, b2)
    rhs = (a1.T @ b1) * (a2.T @ b2)
    return rel_error(lhs, rhs)


def check_lemma_two_factors(a1, a2, b1, b2, tol: float = 1e-9) -> IdentityReport:
    """(A1 (.) A2)^T (B1 (.) B2) == (A1^T B1) * (A2^T B2)."""
    a1, a2, b1, b2 = (np.asarray(m, dtype=np.float64) for m in (a1, a2, b1, b2))
    if a1.shape[0] != b1.shape[0] or a2.shape[0] != b2.shape[0]:
        raise ValueError("paired factors must share row counts")
    if a1.shape[1] != a2.shape[1] or b1.shape[1] != b2.shape[1]:
        raise ValueError("each side must have uniform column counts")
    return _report("lemma_two_factors", [_lemma_two_error(a1, a2, b1, b2)], tol)


def _lemma_n_error(a_list, b_list) -> float:
    lhs = khatri_rao_list(a_list).T @ khatri_rao_list(b_list)
    rhs = a_list[0].T @ b_list[0]
    for a, b in zip(a_list[1:], b_list[1:]):
        rhs = rhs * (a.T @ b)
    return rel_error(lhs, rhs)


def check_lemma_n_factors(a_list, b_list, tol: float = 1e-9) -> IdentityReport:
    """The N-factor generalization of the two-factor identity."""
    a_list = [np.asarray(m, dtype=np.float64) for m in a_list]
    b_list = [np.asarray(m, dtype=np.float64) for m in b_list]
    if len(a_list) != len(b_list) or len(a_list) < 2:
        raise ValueError("need matched factor lists of length >= 2")
    for a, b in zip(a_list, b_list):
        if a.shape[0] != b.shape[0]:
            raise ValueError("paired factors must share row counts")
    if len({a.shape[1] for a in a_list}) != 1 or len({b.shape[1] for b in b_list}) != 1:
        raise ValueError("each side must have uniform column counts")
    return _report(f"lemma_{len(a_list)}_factors", [_lemma_n_error(a_list, b_list)], tol)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _uniform(rng, *shape):
    return rng.uniform(-1.0, 1.0, shape)


def run_lemma_suite(seed: int = 0, tol: float = 1e-9, instances: int = 100) -> list:
    """Randomized lemma checks: the two-factor base case plus N = 3..5."""
    rng = _rng(seed)
    reports = []
    errs = []
    for _ in range(instances):
        i1, i2, kk, ll = rng.integers(1, 6, size=4)
        errs.append(_lemma_two_error(_uniform(rng, i1, kk), _uniform(rng, i2, kk), _uniform(rng, i1, ll), _uniform(rng, i2, ll)))
    reports.append(_report("lemma_two_factors", errs, tol))
    for n in (3, 4, 5):
        errs = []
        for _ in range(instances):
            rows = rng.integers(1, 5, size=n)
            kk, ll = rng.integers(1, 5, size=2)
            a_list = [_uniform(rng, r, kk) for r in rows]
            b_list = [_uniform(rng, r, ll) for r in rows]
            errs.append(_lemma_n_error(a_list, b_list))
        reports.append(_report(f"lemma_{n}_factors", errs, tol))
    return reports


def _random_dims(rng, degenerate_first: bool, i: int):
    if degenerate_first and i == 0:
        return 1, 1, 1
    d, o, k = (int(rng.choice(DIM_CHOICES)) for _ in range(3))
    return d, o, k


def _nested_second_order_error(rng) -> float:
    """Second-layer feature of the nested model, network form vs unfolded form.

    Network form:  (A2^T z) * (B2^T b2 + S2^T [(A1^T z) * (B1^T b1)])
    Unfolded form: {A2 (.) [(A1 (.) B1) S2]}^T (z (.) z (.) b1)
                   + (A2 (.) B2)^T (z (.) b2)
    """
    d, k, w = int(rng.choice(DIM_CHOICES)), int(rng.choice(DIM_CHOICES)), int(rng.choice((1, 2, 3)))
    a1, a2 = _uniform(rng, d, k), _uniform(rng, d, k)
    b1m, b2m = _uniform(rng, w, k), _uniform(rng, w, k)
    s2 = _uniform(rng, k, k)
    z = _uniform(rng, d)
    bv1, bv2 = _uniform(rng, w), _uniform(rng, w)
    net = (a2.T @ z) * (b2m.T @ bv2 + s2.T @ ((a1.T @ z) * (b1m.T @ bv1)))
    unfolded = (khatri_rao(a2, khatri_rao(a1, b1m) @ s2)).T @ np.kron(np.kron(z, z), bv1) + khatri_rao(a2, b2m).T @ np.kron(z, bv2)
    return rel_error(net, unfolded)


def run_claim_suite(seed: int = 0, tol: float = 1e-9, instances: int = 100) -> list:
    """The four model-equivalence checks over randomized instances.

    * ``claim1_model1_third_order`` -- the order-3 coupled model evaluated
      by its recursion equals the materialized explicit polynomial.
    * ``claim2_nested_second_order`` -- the nested model's second-layer
      feature map equals its unfolded two-term expansion.
    * ``claim3_model2_third_order`` -- the order-3 nested model equals its
      materialized explicit polynomial.
    * ``claim4_model1_general_order`` -- the coupled recursion equals the
      literal chain-sum expansion for orders 1..4.
    """
    rng = _rng(seed)
    reports = []

    errs = []
    for i in range(instances):
        d, o, k = _random_dims(rng, True, i)
        p = init_model1(d, o, k, 3, rng)
        z = _uniform(rng, d)
        errs.append(rel_error(forward_model1(p, z), forward_explicit(materialize_model1(p), z)))
    reports.append(_report("claim1_model1_third_order", errs, tol))

    errs = [_nested_second_order_error(rng) for _ in range(instances)]
    reports.append(_report("claim2_nested_second_order", errs, tol))

    errs = []
    for i in range(instances):
        d, o, k = _random_dims(rng, True, i)
        w = int(rng.choice((1, 2, 3)))
        p = init_model2(d, o, k, 3, rng, omega=w)
        p = Model2Params(
            c=p.c,
            beta=_uniform(rng, o),
            a=p.a,
            s=[_uniform(rng, k, k) for _ in range(3)],
            bmat=[_uniform(rng, w, k) for _ in range(3)],
            bvec=[_uniform(rng, w) for _ in range(3)],
        )
        z = _uniform(rng, d)
        errs.append(rel_error(forward_model2(p, z), forward_explicit(materialize_model2(p), z)))
    reports.append(_report("claim3_model2_third_order", errs, tol))

    errs = []
    for i in range(instances):
        d, o, k = _random_dims(rng, True, i)
        n_order = int(rng.integers(1, 5))
        p = init_model1(d, o, k, n_order, rng)
        z = _uniform(rng, d)
        errs.append(rel_error(forward_model1(p, z), forward_model1_sumform(p, z)))
    reports.append(_report("claim4_model1_general_order", errs, tol))

    return reports
