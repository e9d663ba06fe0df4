"""Dense complex matrix predicates.

Everything downstream (algebras, bundles, automorphisms) reduces to a small
set of numerical questions about dense complex matrices: adjoints, operator
norms, unitarity, partial isometries, positivity and span ranks.  All exact
algebraic identities become residual-norm bounds against a tolerance ``eps``
(default 1e-9, absolute on residual norms).

Matrices are plain numpy arrays of dtype complex128.  All functions are pure.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

DEFAULT_EPS = 1e-9


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-d complex array, raising on NaN/Inf or bad rank."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(m).conj().T


def operator_norm(m) -> float:
    """Largest singular value (the C*-norm of a matrix)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def is_unitary(m, eps: float = DEFAULT_EPS) -> bool:
    """True iff m is square with m*m ≈ I ≈ mm* within eps."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return (
        operator_norm(a.conj().T @ a - eye) <= eps
        and operator_norm(a @ a.conj().T - eye) <= eps
    )


def is_partial_isometry(m, eps: float = DEFAULT_EPS) -> bool:
    """True iff mm*m ≈ m within eps."""
    a = as_matrix(m)
    return operator_norm(a @ a.conj().T @ a - a) <= eps


def is_positive_semidefinite(m, eps: float = DEFAULT_EPS) -> bool:
    """True iff m is (numerically) Hermitian with spectrum ≥ -eps.

    Raises ValueError for non-square input.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"positivity needs a square matrix, got shape {a.shape}")
    if operator_norm(a - a.conj().T) > eps:
        return False
    herm = (a + a.conj().T) / 2
    return bool(np.min(np.linalg.eigvalsh(herm)) >= -eps)


def _stack(mats: Sequence[np.ndarray]) -> np.ndarray:
    rows = [as_matrix(m) for m in mats]
    shape = rows[0].shape
    for r in rows[1:]:
        if r.shape != shape:
            raise ValueError(f"shape mismatch in family: {r.shape} vs {shape}")
    return np.stack([r.reshape(-1) for r in rows])


def span_dimension(mats: Sequence[np.ndarray], eps: float = DEFAULT_EPS) -> int:
    """Rank of the vectorized family.

    Singular values below eps times the largest are treated as zero, so the
    result is invariant under rescaling any input by a nonzero scalar.
    """
    if len(mats) == 0:
        return 0
    sv = np.linalg.svd(_stack(mats), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > eps * sv[0]))


def is_in_span(m, mats: Sequence[np.ndarray], eps: float = DEFAULT_EPS) -> bool:
    """True iff vec(m) lies in span{vec(mats)} up to eps·(1+∥m∥)."""
    a = as_matrix(m)
    if len(mats) == 0:
        return operator_norm(a) <= eps
    basis = _stack(mats)
    v = a.reshape(-1)
    coeffs, *_ = np.linalg.lstsq(basis.T, v, rcond=None)
    residual = float(np.linalg.norm(basis.T @ coeffs - v))
    return residual <= eps * (1.0 + operator_norm(a))


def orthonormal_span_basis(
    mats: Sequence[np.ndarray], eps: float = DEFAULT_EPS
) -> list[np.ndarray]:
    """An orthonormal (Hilbert-Schmidt) basis of the span of the family."""
    if len(mats) == 0:
        return []
    shape = as_matrix(mats[0]).shape
    stacked = _stack(mats)
    u, sv, vh = np.linalg.svd(stacked, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return []
    keep = sv > eps * sv[0]
    return [vh[i].reshape(shape) for i in range(len(sv)) if keep[i]]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-distributed n×n unitary (QR of a Ginibre matrix, phases fixed)."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_matrix(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian matrix of the given shape."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
