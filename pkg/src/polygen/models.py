"""Polynomial generator parameterizations and their weight-tensor materializations.

Three ways to express the same family of maps ``G(z) = beta + sum_n <order-n
term>`` from a latent vector ``z in R^d`` to an output in ``R^o``:

* ``explicit`` -- one dense coefficient tensor per polynomial order.  The
  evaluator contracts each tensor with ``z`` mode by mode, which makes it
  slow and memory-hungry but unambiguous; it serves as the ground truth
  the factorized models are checked against.
* ``model1`` -- a coupled factorization in which every order shares the
  output mixing matrix ``C`` and the first-order factor ``U1``, and the
  order-n coefficient tensor is a sum of CP tensors over strictly
  decreasing index chains drawn from the higher-order factors.  Evaluates
  in a single multiplicative-skip recursion (see :func:`forward_model1`).
* ``model2`` -- a nested factorization where each layer owns an input
  factor ``A``, a mixing matrix ``S``, and a learned bias path ``B^T b``;
  the layers compose hierarchically (see :func:`forward_model2`).

Materialization converts a factorized model to explicit form so the two
evaluation routes can be compared on the same inputs.  Sizes grow as
``o * d**n``, so materialization is capped at small orders and exists for
verification, not training.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .tensor_ops import cp_reconstruct, khatri_rao, khatri_rao_list, mode_fold, mode_vec_product

MODEL1_MATERIALIZE_CAP = 4
MODEL2_MATERIALIZE_CAP = 3


def _vec(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {v.shape}")
    return v


def _mat(x, name: str) -> np.ndarray:
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {m.shape}")
    return m


@dataclass
class ExplicitPolyParams:
    """Dense per-order coefficient tensors.

    ``weights[n-1]`` holds the order-n coefficients: shape ``(o, d, ..., d)``
    (n latent modes) in the plain form, or ``(o, omega, d, ..., d)`` when
    per-order scaling vectors are present, in which case ``scalers[n-1]``
    is contracted against the second mode before the latent contractions.
    """

    beta: np.ndarray
    weights: list = field(default_factory=list)
    scalers: list | None = None

    def __post_init__(self):
        self.beta = _vec(self.beta, "beta")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        o = self.beta.shape[0]
        extra = 1 if self.scalers is not None else 0
        for n, w in enumerate(self.weights, start=1):
            if w.ndim != n + 1 + extra or w.shape[0] != o:
                raise ValueError(f"weights[{n - 1}] has shape {w.shape}, expected order {n + 1 + extra} with leading dim {o}")
        if self.scalers is not None:
            self.scalers = [_vec(b, f"scalers[{i}]") for i, b in enumerate(self.scalers)]
            if len(self.scalers) != len(self.weights):
                raise ValueError("need one scaling vector per order")
            for n, (w, b) in enumerate(zip(self.weights, self.scalers), start=1):
                if w.shape[1] != b.shape[0]:
                    raise ValueError(f"scalers[{n - 1}] length {b.shape[0]} != weight mode-2 size {w.shape[1]}")

    @property
    def order(self) -> int:
        return len(self.weights)

    @property
    def latent_dim(self) -> int:
        if not self.weights:
            raise ValueError("order-0 parameters have no latent dimension")
        return self.weights[0].shape[-1]

    @property
    def out_dim(self) -> int:
        return self.beta.shape[0]


@dataclass
class Model1Params:
    """Coupled factorization: output mix ``c`` (o x k), bias ``beta`` (o,),
    and per-order latent factors ``u[n]`` (d x k) sharing the rank k."""

    c: np.ndarray
    beta: np.ndarray
    u: list = field(default_factory=list)

    def __post_init__(self):
        self.c = _mat(self.c, "c")
        self.beta = _vec(self.beta, "beta")
        self.u = [_mat(m, f"u[{i}]") for i, m in enumerate(self.u)]
        if self.c.shape[0] != self.beta.shape[0]:
            raise ValueError("c and beta disagree on output dimension")
        if not self.u:
            raise ValueError("need at least one latent factor (order >= 1)")
        k = self.c.shape[1]
        d = self.u[0].shape[0]
        for i, m in enumerate(self.u):
            if m.shape != (d, k):
                raise ValueError(f"u[{i}] has shape {m.shape}, expected {(d, k)}")

    @property
    def order(self) -> int:
        return len(self.u)

    @property
    def dims(self) -> dict:
        return {"d": self.u[0].shape[0], "o": self.beta.shape[0], "k": self.c.shape[1], "N": self.order}


@dataclass
class Model2Params:
    """Nested factorization with per-layer input factors ``a[n]`` (d x k),
    mixing matrices ``s[n]`` (k x k, the first one allocated but never
    applied), bias factors ``bmat[n]`` (omega x k) and bias inputs
    ``bvec[n]`` (omega,)."""

    c: np.ndarray
    beta: np.ndarray
    a: list = field(default_factory=list)
    s: list = field(default_factory=list)
    bmat: list = field(default_factory=list)
    bvec: list = field(default_factory=list)

    def __post_init__(self):
        self.c = _mat(self.c, "c")
        self.beta = _vec(self.beta, "beta")
        self.a = [_mat(m, f"a[{i}]") for i, m in enumerate(self.a)]
        self.s = [_mat(m, f"s[{i}]") for i, m in enumerate(self.s)]
        self.bmat = [_mat(m, f"bmat[{i}]") for i, m in enumerate(self.bmat)]
        self.bvec = [_vec(v, f"bvec[{i}]") for i, v in enumerate(self.bvec)]
        if self.c.shape[0] != self.beta.shape[0]:
            raise ValueError("c and beta disagree on output dimension")
        n = len(self.a)
        if n < 1:
            raise ValueError("need at least one layer (order >= 1)")
        if not (len(self.s) == len(self.bmat) == len(self.bvec) == n):
            raise ValueError("a, s, bmat, bvec must all have one entry per order")
        k = self.c.shape[1]
        d = self.a[0].shape[0]
        omega = self.bmat[0].shape[0]
        for i in range(n):
            if self.a[i].shape != (d, k):
                raise ValueError(f"a[{i}] has shape {self.a[i].shape}, expected {(d, k)}")
            if self.s[i].shape != (k, k):
                raise ValueError(f"s[{i}] has shape {self.s[i].shape}, expected {(k, k)}")
            if self.bmat[i].shape != (omega, k):
                raise ValueError(f"bmat[{i}] has shape {self.bmat[i].shape}, expected {(omega, k)}")
            if self.bvec[i].shape != (omega,):
                raise ValueError(f"bvec[{i}] has length {self.bvec[i].shape[0]}, expected {omega}")

    @property
    def order(self) -> int:
        return len(self.a)

    @property
    def dims(self) -> dict:
        return {
            "d": self.a[0].shape[0],
            "o": self.beta.shape[0],
            "k": self.c.shape[1],
            "omega": self.bmat[0].shape[0],
            "N": self.order,
        }


# ---------------------------------------------------------------------------
# forward evaluation
# ---------------------------------------------------------------------------

def forward_explicit(p: ExplicitPolyParams, z) -> np.ndarray:
    """Ground-truth evaluation by repeated mode-vector contraction.

    Each order-n tensor is contracted with its scaling vector (if present)
    and then n times with ``z``; results accumulate onto ``beta``.
    """
    z = _vec(z, "z")
    if p.weights and z.shape[0] != p.latent_dim:
        raise ValueError(f"z has length {z.shape[0]}, expected {p.latent_dim}")
    out = p.beta.copy()
    for n, w in enumerate(p.weights, start=1):
        t = w
        if p.scalers is not None:
            t = mode_vec_product(t, 1, p.scalers[n - 1])
        for _ in range(n):
            # after each contraction the next latent mode slides into slot 1
            t = mode_vec_product(t, 1, z)
        out += t
    return out


def forward_model1(p: Model1Params, z) -> np.ndarray:
    """Multiplicative-skip recursion: kappa <- kappa + (Un^T z) * kappa."""
    z = _vec(z, "z")
    kappa = p.u[0].T @ z
    for un in p.u[1:]:
        kappa = kappa + (un.T @ z) * kappa
    return p.beta + p.c @ kappa


def forward_model1_sumform(p: Model1Params, z) -> np.ndarray:
    """Literal expansion over strictly decreasing index chains.

    The order-n contribution sums, over every chain
    ``j_1 > j_2 > ... > j_{n-1} >= 2``, the Hadamard product of the chain's
    projections with the shared first-order projection ``U1^T z``.  This is
    an independent (exponential-cost) oracle for :func:`forward_model1`.
    """
    z = _vec(z, "z")
    base = p.u[0].T @ z
    total = np.zeros_like(base)
    higher = range(2, p.order + 1)
    for chain_len in range(0, p.order):
        for chain in combinations(higher, chain_len):
            term = base.copy()
            for j in sorted(chain, reverse=True):
                term = (p.u[j - 1].T @ z) * term
            total += term
    return p.beta + p.c @ total


def forward_model2(p: Model2Params, z) -> np.ndarray:
    """Nested recursion: kappa <- (Sn kappa + Bn^T bn) * (An^T z)."""
    z = _vec(z, "z")
    kappa = (p.bmat[0].T @ p.bvec[0]) * (p.a[0].T @ z)
    for n in range(1, p.order):
        kappa = (p.s[n] @ kappa + p.bmat[n].T @ p.bvec[n]) * (p.a[n].T @ z)
    return p.beta + p.c @ kappa


# ---------------------------------------------------------------------------
# materialization to explicit form
# ---------------------------------------------------------------------------

def materialize_model1(p: Model1Params, cap: int = MODEL1_MATERIALIZE_CAP) -> ExplicitPolyParams:
    """Assemble the explicit coefficient tensors of a coupled factorization.

    The order-1 matrix is ``c @ u[0].T``; for n >= 2 the order-n tensor sums
    the CP tensors with factor lists ``[c, u1, u_{j_{n-1}}, ..., u_{j_1}]``
    over all strictly decreasing chains from ``{2..N}``.  Memory is
    ``o * d**n``, hence the order cap.
    """
    n_order = p.order
    if n_order > cap:
        raise ValueError(f"materialization capped at order {cap}, got {n_order}")
    d = p.u[0].shape[0]
    o = p.beta.shape[0]
    weights = [p.c @ p.u[0].T]
    for n in range(2, n_order + 1):
        w = np.zeros((o,) + (d,) * n)
        for chain in combinations(range(2, n_order + 1), n - 1):
            desc = sorted(chain, reverse=True)
            factors = [p.c, p.u[0]] + [p.u[j - 1] for j in reversed(desc)]
            w += cp_reconstruct(factors)
        weights.append(w)
    return ExplicitPolyParams(beta=p.beta.copy(), weights=weights)


def materialize_model2(p: Model2Params) -> ExplicitPolyParams:
    """Assemble explicit tensors for the nested factorization (order <= 3).

    Builds the mode-0 unfolded coefficient matrices layer by layer.  The
    nested chain for the order-n term is::

        A_N (.) [ (A_{N-1} (.) [ ... (A_{N-n+1} (.) B_{N-n+1}) S_{N-n+2}^T ... ]) S_N^T ]

    with ``(.)`` the Khatri-Rao product; the matching scaling vector is
    ``bvec[N-n]``, i.e. the *last* layer's bias input scales the first-order
    term.  The transposes make the unfolded tensors agree exactly with the
    ``Sn @ kappa`` recursion of :func:`forward_model2` (the untransposed
    chain corresponds to the same model family with ``S`` relabeled as its
    transpose).
    """
    n_order = p.order
    if n_order > MODEL2_MATERIALIZE_CAP:
        raise ValueError(f"nested materialization supports order <= {MODEL2_MATERIALIZE_CAP}, got {n_order}")
    dims = p.dims
    d, o, omega = dims["d"], dims["o"], dims["omega"]

    weights = []
    scalers = []
    for n in range(1, n_order + 1):
        # innermost pairing uses layer N-n+1 (1-based); build outward to layer N
        low = n_order - n  # 0-based index of the innermost layer
        m = khatri_rao(p.a[low], p.bmat[low])
        for layer in range(low + 1, n_order):
            m = khatri_rao(p.a[layer], m @ p.s[layer].T)
        unfolded = p.c @ m.T
        weights.append(mode_fold(unfolded, 0, (o, omega) + (d,) * n))
        scalers.append(p.bvec[low].copy())
    return ExplicitPolyParams(beta=p.beta.copy(), weights=weights, scalers=scalers)


# ---------------------------------------------------------------------------
# parameter counting
# ---------------------------------------------------------------------------

def param_count_explicit(d: int, o: int, n_order: int) -> int:
    """Number of scalars in the explicit form: ``o * sum_{n=0..N} d**n``.

    Equals ``(d**(N+1) - 1) * o / (d - 1)`` for d > 1 and ``o * (N + 1)``
    in the d = 1 limit.
    """
    if d < 1 or o < 1 or n_order < 0:
        raise ValueError("dimensions must be positive (order may be zero)")
    return o * sum(d**n for n in range(n_order + 1))


def param_count_model1(d: int, o: int, k: int, n_order: int) -> int:
    """Entries of c, beta and the N latent factors: ``o*k + o + N*d*k``."""
    if min(d, o, k, n_order) < 1:
        raise ValueError("dimensions must be positive")
    return o * k + o + n_order * d * k


def param_count_model2(d: int, o: int, k: int, omega: int, n_order: int) -> int:
    """Entries of c, beta, A, S, B and bias inputs.

    The first layer's mixing matrix is never applied, so S contributes
    ``(N-1) * k**2``.
    """
    if min(d, o, k, omega, n_order) < 1:
        raise ValueError("dimensions must be positive")
    return o * k + o + n_order * d * k + (n_order - 1) * k * k + n_order * omega * k + n_order * omega


# ---------------------------------------------------------------------------
# random initialization
# ---------------------------------------------------------------------------

def init_model1(d: int, o: int, k: int, n_order: int, rng: np.random.Generator) -> Model1Params:
    """Gaussian factors with std 1/sqrt(k) so first forwards stay O(1)."""
    sd = 1.0 / np.sqrt(k)
    return Model1Params(
        c=sd * rng.standard_normal((o, k)),
        beta=np.zeros(o),
        u=[sd * rng.standard_normal((d, k)) for _ in range(n_order)],
    )


def init_model2(
    d: int,
    o: int,
    k: int,
    n_order: int,
    rng: np.random.Generator,
    omega: int | None = None,
    b_identity: bool = False,
) -> Model2Params:
    """Gaussian factors (std 1/sqrt(k); 1/sqrt(omega) for B) with bias
    inputs started at one so no layer is born dead.  With ``b_identity``
    the bias factors are fixed identities (omega = k)."""
    if omega is None:
        omega = k
    if b_identity and omega != k:
        raise ValueError("identity bias factors require omega == k")
    sd = 1.0 / np.sqrt(k)
    sb = 1.0 / np.sqrt(omega)
    if b_identity:
        bmat = [np.eye(k) for _ in range(n_order)]
    else:
        bmat = [sb * rng.standard_normal((omega, k)) for _ in range(n_order)]
    return Model2Params(
        c=sd * rng.standard_normal((o, k)),
        beta=np.zeros(o),
        a=[sd * rng.standard_normal((d, k)) for _ in range(n_order)],
        s=[sd * rng.standard_normal((k, k)) for _ in range(n_order)],
        bmat=bmat,
        bvec=[np.ones(omega) for _ in range(n_order)],
    )
