"""
Dense linear algebra kernels.

Matrix exponential (fixed 13th order diagonal Pade with scaling and squaring),
the phi_1 function, thin QR with deflation detection, symmetric eigendecomposition,
spectral norm and the logarithmic norm.

Dense matrices are plain ``numpy.ndarray`` objects of dtype float64.
"""
import math
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sps

from .exceptions import DimensionError, NumericOverflowError

QR_DEFLATION_TOL = 1e-12
DENSE_THRESHOLD = 1000
LANCZOS_MAXITER = 60
LANCZOS_RTOL = 1e-6

# Pade(13, 13) numerator coefficients and the backward-error threshold on ||M||_1
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152

_PHI1_SWITCH = 1e-2
_PHI1_TERMS = 10


def as_dense(M, name="matrix"):
    """Validate ``M`` as a finite 2-d float array and return it."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _require_square(M, name="matrix"):
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")


def expm(M):
    """
    Matrix exponential by scaling and squaring with the [13/13] Pade approximant.

    The scaling power ``s`` is the smallest integer with ``||M / 2**s||_1 <= theta_13``.

    Parameters
    ----------
    M : ndarray
        Square, finite matrix.

    Returns
    -------
    ndarray
        ``e^M``.

    Raises
    ------
    DimensionError
        If ``M`` is not square.
    NumericOverflowError
        If the result overflows during squaring.
    """
    M = np.asarray(M, dtype=float)
    _require_square(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    if not np.all(np.isfinite(M)):
        raise ValueError("expm input has non-finite entries")
    norm_1 = np.linalg.norm(M, 1)
    s = 0
    if norm_1 > _THETA13:
        s = int(math.ceil(math.log2(norm_1 / _THETA13)))
    A = M / 2.0**s if s > 0 else M

    b = _PADE13
    ident = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = la.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise NumericOverflowError(
            f"matrix exponential overflowed: ||M||_1 = {norm_1:.3e}, "
            f"scaling 2^{s}", norm_1=norm_1, scaling=s)
    return R


def phi1(z):
    """
    ``(e^z - 1) / z`` with the removable singularity at 0 filled in.

    A 10-term Taylor series is used for ``|z| < 1e-2``. Accepts a scalar or an
    array; scalars come back as ``float``.
    """
    z_arr = np.asarray(z, dtype=float)
    out = np.empty_like(z_arr)
    small = np.abs(z_arr) < _PHI1_SWITCH
    zs = z_arr[small]
    # Horner on sum_{l<10} z^l / (l+1)!
    acc = np.full_like(zs, 1.0 / math.factorial(_PHI1_TERMS))
    for ell in range(_PHI1_TERMS - 2, -1, -1):
        acc = acc * zs + 1.0 / math.factorial(ell + 1)
    out[small] = acc
    zb = z_arr[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        out[~small] = np.expm1(zb) / zb
    # limits at +-inf: inf / inf and -1 / -inf
    out[z_arr == np.inf] = np.inf
    out[z_arr == -np.inf] = 0.0
    if out.ndim == 0:
        return float(out)
    return out


def spectral_norm(M):
    """Largest singular value of a dense matrix (0 for empty input)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))


class QRResult(NamedTuple):
    Q: np.ndarray
    R: np.ndarray
    deflated: tuple


def thin_qr(B, tol=QR_DEFLATION_TOL):
    """
    Thin QR factorization ``B = Q R`` with a nonnegative diagonal of ``R``.

    Columns ``i`` with ``|R_ii| <= tol * ||B||`` are reported in ``deflated``;
    they are not removed.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] < B.shape[1]:
        raise DimensionError(f"thin_qr needs rows >= cols, got shape {B.shape}")
    Q, R = np.linalg.qr(B, mode="reduced")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = R * signs[:, None]
    scale = spectral_norm(B)
    deflated = tuple(int(i) for i in np.flatnonzero(np.abs(np.diag(R)) <= tol * scale))
    return QRResult(Q, R, deflated)


def orthonormalize(W, scale, tol=QR_DEFLATION_TOL):
    """
    Rank-revealing thin QR used for Krylov blocks.

    Returns ``(Q, R, dropped)`` with ``W ~= Q @ R``, where ``Q`` keeps only the
    columns whose pivoted ``|R_ii|`` exceeds ``tol * scale``.
    """
    n, ell = W.shape
    if ell == 0:
        return np.zeros((n, 0)), np.zeros((0, 0)), 0
    Qp, Rp, perm = la.qr(W, mode="economic", pivoting=True)
    diag = np.abs(np.diag(Rp))
    r = int(np.count_nonzero(diag > tol * scale))
    Q = Qp[:, :r]
    R = np.zeros((r, ell))
    R[:, perm] = Rp[:r, :]
    return Q, R, ell - r


class SymEigDecomp(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(M):
    """Eigendecomposition of the symmetric part of ``M``, eigenvalues descending."""
    M = np.asarray(M, dtype=float)
    _require_square(M)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return SymEigDecomp(w[::-1].copy(), V[:, ::-1].copy())


def _sym_part_action(op):
    """Return ``(n, matvec)`` for the symmetric part of ``op``."""
    if hasattr(op, "apply_block") and hasattr(op, "apply_transpose"):
        n = op.shape[0]

        def mv(x):
            x = x.reshape(n, 1)
            return (0.5 * (op.apply_block(x) + op.apply_transpose(x))).ravel()
        return n, mv
    if sps.issparse(op):
        A = op.tocsr()
        return A.shape[0], lambda x: 0.5 * (A @ x + A.T @ x)
    A = np.asarray(op, dtype=float)
    return A.shape[0], lambda x: 0.5 * (A @ x + A.T @ x)


def _dense_of(op):
    if hasattr(op, "to_dense"):
        return op.to_dense()
    if sps.issparse(op):
        return op.toarray()
    return np.asarray(op, dtype=float)


def lanczos_max_eig(matvec, n, maxiter=LANCZOS_MAXITER, rtol=LANCZOS_RTOL, seed=0):
    """
    Largest eigenvalue of a symmetric operator by Lanczos with full reorthogonalization.

    Returns
    -------
    theta : float
        Best Ritz value found.
    converged : bool
        Whether the residual estimate ``|beta_j s_j|`` fell below ``rtol * |theta|``.
    """
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    Qs = [q]
    alphas, betas = [], []
    theta, converged = -np.inf, False
    for j in range(min(maxiter, n)):
        w = matvec(Qs[-1])
        alphas.append(float(Qs[-1] @ w))
        Qm = np.array(Qs).T
        w = w - Qm @ (Qm.T @ w)
        w = w - Qm @ (Qm.T @ w)
        beta = float(np.linalg.norm(w))
        T = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(T)
        theta = float(evals[-1])
        resid = abs(beta * evecs[-1, -1])
        if resid <= rtol * max(abs(theta), np.finfo(float).tiny) or beta == 0.0:
            converged = True
            break
        betas.append(beta)
        Qs.append(w / beta)
    return theta, converged


def log_norm(op, dense_threshold=DENSE_THRESHOLD, return_info=False):
    """
    Logarithmic norm ``mu(A)``: the largest eigenvalue of ``(A + A^T) / 2``.

    Dense eigenvalues are used up to ``dense_threshold``; above it, Lanczos on the
    symmetric part. With ``return_info=True`` a ``(value, exact_or_converged)`` pair
    is returned; ``False`` marks an approximate Lanczos estimate.
    """
    n, mv = _sym_part_action(op)
    if n <= dense_threshold:
        A = _dense_of(op)
        _require_square(A)
        value = float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])
        ok = True
    else:
        value, ok = lanczos_max_eig(mv, n)
    return (value, ok) if return_info else value


def norm_estimate(op, maxiter=30, rtol=1e-4, seed=0):
    """
    Spectral norm of an operator: exact for small dense input, otherwise
    power iteration on ``A^T A``.
    """
    if not hasattr(op, "apply_block"):
        return spectral_norm(_dense_of(op))
    n = op.shape[0]
    if n <= DENSE_THRESHOLD:
        return spectral_norm(op.to_dense())
    x = np.random.default_rng(seed).standard_normal((n, 1))
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(maxiter):
        y = op.apply_transpose(op.apply_block(x))
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        new = math.sqrt(lam)
        x = y / lam
        if abs(new - sigma) <= rtol * new:
            return new
        sigma = new
    return sigma
