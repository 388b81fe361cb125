"""Dense complex-matrix primitives and interlacing checks.

All functions are pure and operate on 2-d numpy arrays. Singular values are
returned in descending order; eigenvalues as an unordered array. Checks
return small report objects rather than raising, so Monte Carlo drivers can
aggregate margins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Residual tolerance for the eigen/SVD backend at desk scale (dim <= 2048).
TOL_EIG = 1e-9

# Singular values below RANK_TOL * s_1 count as zero.
RANK_TOL = 1e-8

# Least singular value of D / Schur complement must exceed this times the
# operator norm for block_inverse to proceed.
BLOCK_INV_TOL = 1e-10


class NumericBackendError(RuntimeError):
    """Raised when an eigen/SVD routine fails to converge."""


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise ValueError("matrix contains non-finite entries")
    return M


def eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a square matrix, as an unordered complex array."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"eigenvalues requires a square matrix, got {M.shape}")
    try:
        return scipy.linalg.eigvals(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - backend failure
        raise NumericBackendError(f"eigensolver failed: {exc}") from exc


def singular_values(M) -> np.ndarray:
    """Singular values of M, descending."""
    M = _as_matrix(M)
    try:
        return scipy.linalg.svdvals(M, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - backend failure
        raise NumericBackendError(f"SVD failed: {exc}") from exc


def least_singular_value(M) -> float:
    """Smallest singular value of a square matrix."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("least_singular_value requires a square matrix")
    return float(singular_values(M)[-1])


def operator_norm(M) -> float:
    """Largest singular value."""
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def hs_norm(M) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(_as_matrix(M)))


def numeric_rank(M, tol: float = RANK_TOL) -> int:
    """Number of singular values above tol * s_1."""
    s = singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def block_inverse(A, B, C, D) -> np.ndarray:
    """Inverse of the 2x2 block matrix [[A, B], [C, D]].

    Uses the Schur-complement factorization: the top-left block of the
    inverse is (A - B D^-1 C)^-1. Requires D and the Schur complement to be
    safely invertible.
    """
    A, B, C, D = (_as_matrix(Z) for Z in (A, B, C, D))
    p, q = A.shape[0], D.shape[0]
    if A.shape != (p, p) or D.shape != (q, q) or B.shape != (p, q) or C.shape != (q, p):
        raise ValueError("inconsistent block shapes")
    full = np.block([[A, B], [C, D]])
    if least_singular_value(D) <= BLOCK_INV_TOL * operator_norm(full):
        raise np.linalg.LinAlgError("block D is numerically singular")
    D_inv = np.linalg.inv(D)
    schur = A - B @ D_inv @ C
    if least_singular_value(schur) <= BLOCK_INV_TOL * operator_norm(full):
        raise np.linalg.LinAlgError("Schur complement A - B D^-1 C is numerically singular")
    S_inv = np.linalg.inv(schur)
    top_left = S_inv
    top_right = -S_inv @ B @ D_inv
    bottom_left = -D_inv @ C @ S_inv
    bottom_right = D_inv + D_inv @ C @ S_inv @ B @ D_inv
    return np.block([[top_left, top_right], [bottom_left, bottom_right]])


def column_distance(M, l: int) -> float:
    """Euclidean distance from column l to the span of the other columns.

    Evaluated through the Schur-complement quotient
    |M_ll - M_{l,~l} (M_{~l,~l})^-1 M_{~l,l}| / sqrt(1 + ||M_{l,~l} (M_{~l,~l})^-1||^2),
    which avoids forming a projector. The minor with row and column l removed
    must be invertible. Index l is 0-based.
    """
    M = _as_matrix(M)
    n = M.shape[0]
    if M.shape[0] != M.shape[1]:
        raise ValueError("column_distance requires a square matrix")
    if not 0 <= l < n:
        raise ValueError(f"column index {l} out of range for size {n}")
    rest = [i for i in range(n) if i != l]
    minor = M[np.ix_(rest, rest)]
    if least_singular_value(minor) <= RANK_TOL * max(operator_norm(M), 1.0):
        raise np.linalg.LinAlgError(f"minor with row/column {l} removed is singular")
    row = M[l, rest]
    col = M[rest, l]
    row_times_inv = np.linalg.solve(minor.T, row).T  # row @ minor^-1
    num = abs(M[l, l] - row_times_inv @ col)
    den = np.sqrt(1.0 + np.linalg.norm(row_times_inv) ** 2)
    return float(num / den)


@dataclass
class InterlacingReport:
    """Outcome of an interlacing check with per-index slack."""

    passed: bool
    margins: np.ndarray = field(repr=False)
    worst_margin: float = 0.0


def perturbation_interlacing_check(M1, M2, r: int, tol: float = 1e-10) -> InterlacingReport:
    """Check the rank-r perturbation interlacing s_i(M1) >= s_{i+r}(M2).

    The inequality (and its swap) follows from s_{i+j-1}(A+B) <= s_i(A) + s_j(B)
    when rank(M1 - M2) <= r; that rank precondition is verified numerically
    before asserting.
    """
    M1, M2 = _as_matrix(M1), _as_matrix(M2)
    if M1.shape != M2.shape:
        raise ValueError(f"shape mismatch: {M1.shape} vs {M2.shape}")
    diff_s = singular_values(M1 - M2)
    scale = max(operator_norm(M1), operator_norm(M2), 1.0)
    if diff_s.size > r and diff_s[r] > RANK_TOL * scale:
        raise ValueError(f"rank(M1 - M2) exceeds {r} (s_{r + 1} = {diff_s[r]:.3e})")
    s1 = singular_values(M1)
    s2 = singular_values(M2)
    m = s1.size
    margins = []
    for i in range(m - r):
        margins.append(s1[i] - s2[i + r])
        margins.append(s2[i] - s1[i + r])
    margins = np.array(margins) if margins else np.zeros(0)
    worst = float(margins.min()) if margins.size else 0.0
    return InterlacingReport(passed=bool(worst >= -tol * scale), margins=margins, worst_margin=worst)


def submatrix_interlacing_check(M, rows, cols, tol: float = 1e-10) -> InterlacingReport:
    """Check s_i(submatrix) <= s_i(M) for the minor M[rows, cols]."""
    M = _as_matrix(M)
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    if rows.size == 0 or cols.size == 0:
        raise ValueError("index sets must be nonempty")
    if rows.min() < 0 or rows.max() >= M.shape[0] or cols.min() < 0 or cols.max() >= M.shape[1]:
        raise ValueError("index set out of range")
    sub = M[np.ix_(rows, cols)]
    s_full = singular_values(M)
    s_sub = singular_values(sub)
    margins = s_full[: s_sub.size] - s_sub
    worst = float(margins.min()) if margins.size else 0.0
    scale = max(float(s_full[0]) if s_full.size else 0.0, 1.0)
    return InterlacingReport(passed=bool(worst >= -tol * scale), margins=margins, worst_margin=worst)
