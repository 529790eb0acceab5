"""Dense tensor primitives: unfolding, mode products, Khatri-Rao, CP reconstruction.

Conventions used throughout the package:

* A dense tensor is a C-contiguous ``numpy.ndarray`` of ``float64``; its
  ``shape`` is the dimension tuple ``(I_1, ..., I_M)`` and the order ``M``
  is ``ndim``.  Order-1 tensors are plain vectors.
* Modes are 0-based in code.  The textbook index map for the mode-m
  unfolding places element ``(i_1, ..., i_M)`` at row ``i_m`` and column
  ``j = sum_{k != m} i_k * J_k`` with ``J_k = prod_{n < k, n != m} I_n``
  (all 0-based here), i.e. the *earliest* remaining mode varies fastest.
  That is a Fortran-order flattening of the non-m modes, which is what
  :func:`mode_unfold` implements.
* ``khatri_rao(a, b)`` stacks column-wise Kronecker products with the
  *second* factor's row index varying fastest, so
  ``mode_unfold(cp_reconstruct([U1..UM]), 0)`` equals
  ``U1 @ khatri_rao_list([UM, ..., U2]).T`` exactly.
"""

from __future__ import annotations

import numpy as np


def as_tensor(x) -> np.ndarray:
    """Coerce input to a C-contiguous float64 array of order >= 1."""
    t = np.ascontiguousarray(x, dtype=np.float64)
    if t.ndim == 0:
        raise ValueError("tensor must have order >= 1")
    return t


def _check_mode(t: np.ndarray, mode: int) -> None:
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for order-{t.ndim} tensor")


def mode_unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Return the mode-`mode` unfolding of `t` as an ``(I_mode, prod rest)`` matrix.

    Parameters
    ----------
    t : ndarray
    mode : int
        0-based mode in ``range(t.ndim)``.

    Returns
    -------
    ndarray
        Matrix whose row index is the mode-`mode` index and whose column
        index flattens the remaining modes with the earliest one fastest.
    """
    t = as_tensor(t)
    _check_mode(t, mode)
    return np.reshape(np.moveaxis(t, mode, 0), (t.shape[mode], -1), order="F")


def mode_fold(mat: np.ndarray, mode: int, shape) -> np.ndarray:
    """Inverse of :func:`mode_unfold`: refold a matrix into a tensor of `shape`."""
    shape = tuple(int(s) for s in shape)
    if not 0 <= mode < len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    mat = np.asarray(mat, dtype=np.float64)
    rest = [s for i, s in enumerate(shape) if i != mode]
    if mat.shape != (shape[mode], int(np.prod(rest, dtype=np.int64))):
        raise ValueError(f"matrix shape {mat.shape} does not refold into {shape} at mode {mode}")
    t = np.reshape(mat, (shape[mode], *rest), order="F")
    return np.ascontiguousarray(np.moveaxis(t, 0, mode))


def mode_vec_product(t: np.ndarray, mode: int, u: np.ndarray) -> np.ndarray:
    """Contract tensor `t` with vector `u` along `mode`, dropping that mode.

    The result has order ``t.ndim - 1``; for an order-1 tensor the result
    is a 0-d array holding the inner product.
    """
    t = as_tensor(t)
    _check_mode(t, mode)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.shape[0] != t.shape[mode]:
        raise ValueError(
            f"vector of length {u.shape} cannot contract mode {mode} of shape {t.shape}"
        )
    return np.tensordot(t, u, axes=([mode], [0]))


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product of ``(I, N)`` and ``(J, N)`` matrices.

    Output row ``i * J + j`` of column ``n`` equals ``a[i, n] * b[j, n]``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("khatri_rao expects matrices")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    i, n = a.shape
    j, _ = b.shape
    return (a[:, None, :] * b[None, :, :]).reshape(i * j, n)


def khatri_rao_list(mats) -> np.ndarray:
    """Left fold of :func:`khatri_rao` over a list of matrices.

    The product is associative, so the fold direction only fixes which
    factor's row index varies slowest (the first one in `mats`).
    """
    mats = list(mats)
    if not mats:
        raise ValueError("khatri_rao_list needs at least one matrix")
    out = np.asarray(mats[0], dtype=np.float64)
    for m in mats[1:]:
        out = khatri_rao(out, m)
    return out


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two same-shape arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def _check_factors(factors) -> list:
    factors = [np.asarray(f, dtype=np.float64) for f in factors]
    if not factors:
        raise ValueError("factor set is empty")
    rank = factors[0].shape[1] if factors[0].ndim == 2 else -1
    for f in factors:
        if f.ndim != 2:
            raise ValueError("factors must be matrices")
        if f.shape[1] != rank:
            raise ValueError("factors must share a common column count")
    if rank < 1:
        raise ValueError("rank must be >= 1")
    return factors


def cp_reconstruct(factors) -> np.ndarray:
    """Dense tensor of the rank-R sum of outer products of factor columns.

    Parameters
    ----------
    factors : sequence of ndarray
        Matrices ``U^(1) .. U^(M)``, each ``I_m x R``.

    Returns
    -------
    ndarray
        Order-M tensor of shape ``(I_1, ..., I_M)``.
    """
    factors = _check_factors(factors)
    if len(factors) == 1:
        return factors[0].sum(axis=1)
    # einsum over one shared rank index: ar,br,cr,...->abc...
    letters = [chr(ord("a") + m) for m in range(len(factors))]
    spec = ",".join(f"{c}z" for c in letters) + "->" + "".join(letters)
    return np.einsum(spec, *factors)


def cp_mode1_matrix(factors) -> np.ndarray:
    """Mode-0 unfolding of the CP tensor, computed without materializing it.

    Equals ``U1 @ (UM ⊙ U(M-1) ⊙ ... ⊙ U2).T`` and therefore
    ``mode_unfold(cp_reconstruct(factors), 0)``.
    """
    factors = _check_factors(factors)
    if len(factors) < 2:
        raise ValueError("cp_mode1_matrix needs at least two factors")
    return factors[0] @ khatri_rao_list(factors[:0:-1]).T
