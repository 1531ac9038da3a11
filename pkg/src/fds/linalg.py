"""Dense rank-revealing kernels used by every structured format.

All matrices are plain ``numpy.ndarray`` objects (real or complex,
2-dimensional). Truncation is always block-relative: a factorization at
tolerance ``tol`` keeps singular values (or pivots) above ``tol`` times
the largest one of the block being compressed, which keeps compression
scale-invariant.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "LowRankFactor",
    "InterpolativeFactor",
    "SingularMatrixError",
    "cpqr",
    "truncated_svd",
    "interpolative_decomposition",
    "dense_lu_solve",
    "complex_singular_values",
    "eps_rank",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a pivot or intermediate inverse is numerically singular."""


@dataclass(frozen=True)
class LowRankFactor:
    """Tall factor pair (U, V) representing the product U @ V.conj().T.

    U is m-by-k and V is n-by-k with shared rank k <= min(m, n).
    """

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != self.V.shape[1]:
            raise ValueError(
                f"factor shapes {self.U.shape} / {self.V.shape} are not a rank pair"
            )

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    @property
    def shape(self):
        return (self.U.shape[0], self.V.shape[0])

    def todense(self) -> np.ndarray:
        return self.U @ self.V.conj().T

    def matvec(self, x):
        return self.U @ (self.V.conj().T @ x)

    def rmatvec(self, x):
        """Apply the conjugate transpose: V @ (U* x)."""
        return self.V @ (self.U.conj().T @ x)

    def storage(self) -> int:
        return self.U.size + self.V.size


@dataclass(frozen=True)
class InterpolativeFactor:
    """Column interpolative decomposition A ~= A[:, skeleton] @ interp_full().

    ``skeleton`` indexes k columns of the source matrix; ``interp`` holds
    the k-by-(n-k) coefficients expressing the remaining columns;
    ``perm`` is the pivot order so that columns perm[:k] are the skeleton
    and perm[k:] the interpolated ones.
    """

    skeleton: np.ndarray
    interp: np.ndarray
    perm: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.skeleton)

    def interp_full(self) -> np.ndarray:
        """The k-by-n matrix X with X[:, perm] = [I | interp]."""
        k = self.rank
        n = len(self.perm)
        X = np.zeros((k, n), dtype=self.interp.dtype if self.interp.size else float)
        X[:, self.perm[:k]] = np.eye(k)
        if n > k:
            X[:, self.perm[k:]] = self.interp
        return X


def _check_input(A, tol=None):
    A = np.asarray(A)
    if A.ndim != 2 or A.size == 0:
        raise ValueError(f"expected a nonempty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    if tol is not None and not (0.0 < tol < 1.0):
        raise ValueError(f"relative tolerance must lie in (0,1), got {tol}")
    return A


def cpqr(A, tol):
    """Column-pivoted QR truncated at a relative pivot threshold.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    tol : float
        Relative stopping criterion in (0, 1).

    Returns
    -------
    Q : ndarray, shape (m, k)
        Orthonormal columns.
    R : ndarray, shape (k, n)
        Upper trapezoidal, so that A[:, perm] ~= Q @ R.
    perm : ndarray of int, shape (n,)
        Pivot order.
    rank : int
        Smallest k with |R[k, k]| <= tol * |R[0, 0]| (0 for a zero matrix).
    """
    A = _check_input(A, tol)
    Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        below = np.nonzero(diag <= tol * diag[0])[0]
        rank = int(below[0]) if below.size else diag.size
    return Q[:, :rank], R[:rank, :], perm, rank


def truncated_svd(A, tol=None, max_rank=None):
    """SVD truncated at sigma_j > tol * sigma_1 (and/or a hard rank cap).

    Returns (U, s, V) with A ~= U @ diag(s) @ V.conj().T and s
    non-increasing. A zero matrix yields rank 0 (empty factors).
    """
    A = _check_input(A, tol)
    if tol is None and max_rank is None:
        raise ValueError("need a tolerance or a rank cap")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    k = s.size
    if s.size == 0 or s[0] == 0.0:
        k = 0
    elif tol is not None:
        k = int(np.sum(s > tol * s[0]))
    if max_rank is not None:
        k = min(k, max_rank)
    return U[:, :k], s[:k], Vh[:k, :].conj().T


_DENSE_SVD_LIMIT = 512
_RANGE_FINDER_SEED = 0x5EED


def low_rank_approx(A, tol) -> LowRankFactor:
    """Compress a dense block to a LowRankFactor at the truncated-SVD cut.

    Small blocks go through the full SVD. Large ones use a seeded
    Gaussian range finder with power iteration, growing the sample block
    until the captured spectrum provably reaches below the truncation
    threshold; the projected SVD then reproduces the leading singular
    triplets to machine accuracy, so the returned factors match the
    dense path at the same tolerance.
    """
    A = np.asarray(A)
    m, n = A.shape
    if min(m, n) <= _DENSE_SVD_LIMIT:
        U, s, V = truncated_svd(A, tol)
        return LowRankFactor(U * s, V)
    rng = np.random.default_rng(_RANGE_FINDER_SEED)
    k = 32
    while True:
        k = min(k, min(m, n))
        Om = rng.standard_normal((n, k))
        if np.iscomplexobj(A):
            Om = Om + 1j * rng.standard_normal((n, k))
        Q, _ = np.linalg.qr(A @ Om)
        for _ in range(2):
            Q, _ = np.linalg.qr(A.conj().T @ Q)
            Q, _ = np.linalg.qr(A @ Q)
        B = Q.conj().T @ A
        Ub, s, Vh = np.linalg.svd(B, full_matrices=False)
        if k == min(m, n) or s.size == 0 or s[0] == 0.0 or s[-1] <= tol * s[0]:
            break
        k *= 2  # spectrum not exhausted down to the cut yet
    r = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return LowRankFactor((Q @ Ub[:, :r]) * s[:r], Vh[:r].conj().T)


def recompress(factor: LowRankFactor, tol) -> LowRankFactor:
    """Truncate a factor pair to the numerical rank of its product.

    Thin QR of both sides reduces the problem to an SVD of the k-by-k
    core, so the cost is O((m + n) k^2) and never touches the dense
    product.
    """
    if factor.rank == 0:
        return factor
    Qu, Ru = np.linalg.qr(factor.U)
    Qv, Rv = np.linalg.qr(factor.V)
    Uc, s, Vc = truncated_svd(Ru @ Rv.conj().T, tol)
    return LowRankFactor((Qu @ Uc) * s, Qv @ Vc)


def interpolative_decomposition(A, tol) -> InterpolativeFactor:
    """Column ID: a skeleton of A's own columns plus interpolation weights.

    Built from the column-pivoted QR: with A P = Q [R11 R12], the
    skeleton is the first k pivots and interp = R11^{-1} R12, so
    A ~= A[:, skeleton] @ [I | interp] P^T up to c * tol * ||A||.
    """
    A = _check_input(A, tol)
    _, R, perm, rank = cpqr(A, tol)
    if rank == 0:
        return InterpolativeFactor(
            skeleton=np.empty(0, dtype=int),
            interp=np.empty((0, A.shape[1]), dtype=A.dtype),
            perm=np.asarray(perm),
        )
    n = A.shape[1]
    if rank < n:
        interp = scipy.linalg.solve_triangular(R[:, :rank], R[:, rank:])
    else:
        interp = np.empty((rank, 0), dtype=R.dtype)
    return InterpolativeFactor(
        skeleton=np.asarray(perm[:rank]), interp=interp, perm=np.asarray(perm)
    )


def row_interpolative_decomposition(A, tol) -> InterpolativeFactor:
    """Row ID of A, i.e. the column ID of A*. Skeleton indexes rows."""
    return interpolative_decomposition(np.asarray(A).conj().T, tol)


def dense_lu_solve(A, B):
    """Solve A X = B by partially pivoted LU.

    Raises SingularMatrixError when a pivot falls below 1e-300 in
    magnitude.
    """
    A = _check_input(A)
    lu, piv = scipy.linalg.lu_factor(A)
    small = np.abs(np.diag(lu)) < 1e-300
    if np.any(small):
        raise SingularMatrixError(
            f"singular pivot at position {int(np.nonzero(small)[0][0])}"
        )
    return scipy.linalg.lu_solve((lu, piv), B)


def complex_singular_values(A):
    """Singular values of a complex matrix through its real embedding.

    The 2m-by-2n real matrix [[Re A, -Im A], [Im A, Re A]] has the same
    singular values as A, each with multiplicity doubled; every other
    value of its spectrum is returned. A pairing mismatch beyond
    1e-10 * sigma_1 signals an SVD failure and raises.
    """
    A = _check_input(A)
    X, Y = A.real, A.imag
    M = np.block([[X, -Y], [Y, X]])
    s = np.linalg.svd(M, compute_uv=False)
    if s.size and s[0] > 0:
        spread = np.abs(s[0::2] - s[1::2])
        if np.any(spread > 1e-10 * s[0]):
            raise np.linalg.LinAlgError(
                "real embedding produced unpaired singular values "
                f"(max spread {spread.max():.3e})"
            )
    return s[0::2]


def eps_rank(sigmas, eps) -> int:
    """Numerical rank: number of singular values with sigma_j > eps * sigma_1."""
    s = np.asarray(sigmas)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > eps * s[0]))
