"""Shared independent oracles for the behavioral tests.

Everything here checks generator outputs from the outside: polynomial
interpolation along a ray, finite differences, monomial counting.  None
of it reuses the factorized evaluation paths it is used to validate.
"""

import math

import numpy as np


def ray_values(g, z, alphas):
    """Evaluate ``alpha -> g(alpha * z)`` at the given nodes, stacked (len, o)."""
    return np.stack([np.asarray(g(a * np.asarray(z))) for a in alphas])


def interp_coeffs(g, z, degree):
    """Coefficients of the degree-`degree` interpolant of g along the ray."""
    nodes = np.linspace(-1.0, 1.0, degree + 1)
    vals = ray_values(g, z, nodes)
    vander = np.vander(nodes, degree + 1, increasing=True)
    return np.linalg.solve(vander, vals)  # (degree+1, o)


def interp_holdout_error(g, z, degree, n_holdout=5):
    """Worst relative error of the interpolant at held-out interior nodes."""
    coeffs = interp_coeffs(g, z, degree)
    holdout = np.linspace(-0.8, 0.8, n_holdout) + 0.013
    actual = ray_values(g, z, holdout)
    vander = np.vander(holdout, degree + 1, increasing=True)
    predicted = vander @ coeffs
    scale = 1.0 + np.max(np.abs(actual))
    return float(np.max(np.abs(predicted - actual)) / scale)


def forward_difference(g, z, order, h=0.25, a=-0.5):
    """`order`-th forward difference of alpha -> g(alpha z) at alpha = a."""
    total = 0.0
    for k in range(order + 1):
        total = total + (-1.0) ** (order - k) * math.comb(order, k) * np.asarray(g((a + k * h) * np.asarray(z)))
    return total


def leading_coeff_fd(g, z, degree, h=0.25):
    """Leading polynomial coefficient via the exact finite-difference identity
    ``Delta^N g / (h^N N!) = c_N`` (holds exactly for degree <= N)."""
    return forward_difference(g, z, degree, h=h) / (h**degree * math.factorial(degree))


def monomial_count(d, n_order, o):
    """Count coefficients of an o-valued degree-N polynomial over R^d by
    enumerating ordered index tuples per order (the dense-tensor layout)."""
    return o * sum(d**n for n in range(n_order + 1))
