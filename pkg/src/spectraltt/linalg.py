"""Dense linear-algebra kernels used by the tensor-train and quadrature layers."""

import numpy as np
import scipy.linalg

from .exceptions import InvalidInputError, NumericalFailureError

# Relative floor used when the truncation budget is exactly zero: keeping
# singular values below machine noise would only inflate ranks.
ZERO_DELTA_RELATIVE = 1e-14


def _check_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"expected a nonempty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix contains non-finite entries")
    return A


def truncated_svd(A, delta):
    """SVD of ``A`` truncated so the discarded tail has Frobenius norm <= delta.

    Returns ``(U, s, V, rank)`` with ``A ~ U @ diag(s) @ V.T``, singular values
    descending, and the smallest rank meeting the budget. ``delta == 0`` keeps
    the numerical rank at ``1e-14 * ||A||_F``.
    """
    A = _check_matrix(A)
    if delta < 0:
        raise InvalidInputError("delta must be nonnegative")
    try:
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NumericalFailureError("SVD did not converge") from exc
    if delta == 0.0:
        delta = ZERO_DELTA_RELATIVE * np.linalg.norm(s)
    # Smallest rank whose discarded tail fits in the budget.
    tail = np.sqrt(np.cumsum(s[::-1] ** 2))[::-1]  # tail[k] = ||s[k:]||
    rank = int(np.searchsorted(-tail, -delta))  # first k with tail[k] <= delta
    rank = max(rank, 1) if s.size else 0
    return U[:, :rank].copy(), s[:rank].copy(), Vt[:rank].T.copy(), rank


def qr_thin(A):
    """Thin QR factorization; requires rows >= cols."""
    A = _check_matrix(A)
    if A.shape[0] < A.shape[1]:
        raise InvalidInputError("qr_thin requires rows >= cols")
    Q, R = np.linalg.qr(A)
    return Q, R


def symtridiag_eig(diag, offdiag):
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal.

    Returns eigenvalues ascending and the first entries of the orthonormal
    eigenvectors (the Golub-Welsch ingredients).
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    if diag.ndim != 1 or diag.size < 1:
        raise InvalidInputError("diag must be a nonempty vector")
    if offdiag.shape != (diag.size - 1,):
        raise InvalidInputError("offdiag length must be len(diag) - 1")
    if diag.size == 1:
        return diag.copy(), np.ones(1)
    try:
        eigvals, eigvecs = scipy.linalg.eigh_tridiagonal(diag, offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailureError("tridiagonal eigensolver failed") from exc
    return eigvals, eigvecs[0, :].copy()
