"""
Linear operators for the large matrix ``A``.

Three kinds are supported: dense arrays, sparse CSR matrices, and mass pairs
``(M, A)`` acting as ``M^{-1} A``. Factorizations (of ``M`` and of shifted
matrices ``s I - A``) are cached and guarded by a lock so concurrent
``apply_block`` / ``shifted_solve`` calls are safe.
"""
import threading
import warnings

import numpy as np
import scipy.linalg as la
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .core_linalg import DENSE_THRESHOLD
from .exceptions import DimensionError, NotPositiveDefiniteError, SingularShiftError


class LinearOperator:
    """
    Action ``v -> A v`` of an ``n x n`` matrix.

    Use the constructors :meth:`dense`, :meth:`sparse`, :meth:`mass_pair` or
    :func:`aslinearoperator` rather than calling ``__init__`` directly.

    Attributes
    ----------
    kind : str
        ``"dense"``, ``"sparse"`` or ``"mass-pair"``.
    has_shifted_solve : bool
        Always ``True`` for the three built-in kinds.
    spectrum : ndarray or None
        Known eigenvalues (ascending), e.g. from an analytic formula.
    """

    def __init__(self, kind, A, M=None, spectrum=None, dense_threshold=DENSE_THRESHOLD):
        self.kind = kind
        self._A = A
        self._M = M
        self.spectrum = None if spectrum is None else np.sort(np.asarray(spectrum, float))
        self.dense_threshold = dense_threshold
        self.has_shifted_solve = True
        self._lock = threading.Lock()
        self._shift_cache = {}
        self._mass_solve = None
        self._log_norm = None
        if kind == "mass-pair":
            self._mass_solve = self._factor_mass(M)

    # -- constructors -------------------------------------------------------
    @classmethod
    def dense(cls, A, **kw):
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"operator matrix must be square, got {A.shape}")
        return cls("dense", A, **kw)

    @classmethod
    def sparse(cls, A, **kw):
        A = sps.csr_matrix(A, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"operator matrix must be square, got {A.shape}")
        A.sort_indices()
        return cls("sparse", A, **kw)

    @classmethod
    def mass_pair(cls, M, A, **kw):
        """Operator ``M^{-1} A`` with ``M`` symmetric positive definite."""
        if sps.issparse(A):
            A = sps.csr_matrix(A, dtype=float)
        else:
            A = np.array(A, dtype=float)
        if sps.issparse(M):
            M = sps.csc_matrix(M, dtype=float)
        else:
            M = np.array(M, dtype=float)
        if A.shape != M.shape or A.shape[0] != A.shape[1]:
            raise DimensionError(f"mass pair shapes differ: M {M.shape}, A {A.shape}")
        return cls("mass-pair", A, M=M, **kw)

    # -- basic properties ---------------------------------------------------
    @property
    def shape(self):
        return self._A.shape

    @property
    def n(self):
        return self._A.shape[0]

    def __repr__(self):
        return f"<LinearOperator kind={self.kind} n={self.n}>"

    def _factor_mass(self, M):
        if sps.issparse(M):
            if abs(M - M.T).max() > 1e-12 * abs(M).max():
                raise NotPositiveDefiniteError("mass matrix is not symmetric")
            if M.shape[0] <= self.dense_threshold:
                return self._dense_cholesky(M.toarray())
            # symmetric ordering, no pivoting: LU = L D L^T and SPD <=> all pivots > 0
            lu = spla.splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
            if np.any(lu.U.diagonal() <= 0):
                raise NotPositiveDefiniteError("mass matrix is not positive definite")
            return lu.solve
        return self._dense_cholesky(M)

    @staticmethod
    def _dense_cholesky(M):
        if not np.allclose(M, M.T, rtol=0, atol=1e-12 * np.abs(M).max()):
            raise NotPositiveDefiniteError("mass matrix is not symmetric")
        try:
            factor = la.cho_factor(M)
        except la.LinAlgError as err:
            raise NotPositiveDefiniteError(f"mass matrix is not positive definite: {err}")
        return lambda B: la.cho_solve(factor, B)

    # -- actions ------------------------------------------------------------
    def _check_block(self, B):
        B = np.asarray(B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != self.n:
            raise DimensionError(f"block has {B.shape[0]} rows, operator dimension is {self.n}")
        return B

    def apply_block(self, B):
        """Return ``A @ B`` (``M^{-1} (A @ B)`` for a mass pair)."""
        B = self._check_block(B)
        AB = self._A @ B
        if self.kind == "mass-pair":
            return np.asarray(self._mass_solve(np.asarray(AB)))
        return np.asarray(AB)

    def solve_mass(self, B):
        """``M^{-1} B`` for a mass pair (identity otherwise)."""
        B = self._check_block(B)
        if self.kind != "mass-pair":
            return B.copy()
        return np.asarray(self._mass_solve(B))

    def apply_transpose(self, B):
        """Return ``A^T @ B`` (``A^T M^{-1} B`` for a mass pair)."""
        B = self._check_block(B)
        if self.kind == "mass-pair":
            B = np.asarray(self._mass_solve(B))
        return np.asarray(self._A.T @ B)

    def to_dense(self):
        A = self._A.toarray() if sps.issparse(self._A) else np.array(self._A)
        if self.kind == "mass-pair":
            return np.asarray(self._mass_solve(A))
        return A

    def _shifted_matrix(self, s):
        if self.kind == "mass-pair":
            # (sI - M^{-1}A)^{-1} B = (sM - A)^{-1} M B
            M = self._M
        else:
            M = sps.identity(self.n, format="csc") if sps.issparse(self._A) else np.eye(self.n)
        if sps.issparse(self._A) or sps.issparse(M):
            return sps.csc_matrix(s * M - self._A)
        return s * M - self._A

    def _shift_factor(self, s):
        s = float(s)
        with self._lock:
            solve = self._shift_cache.get(s)
            if solve is not None:
                return solve
            K = self._shifted_matrix(s)
            if sps.issparse(K):
                try:
                    lu = spla.splu(K)
                except RuntimeError:
                    raise SingularShiftError(s) from None
                if np.any(lu.U.diagonal() == 0) or not np.all(np.isfinite(lu.U.diagonal())):
                    raise SingularShiftError(s)
                rcond = abs(lu.U.diagonal()).min() / abs(lu.U.diagonal()).max()
                solve = lu.solve
            else:
                with warnings.catch_warnings():
                    # singularity is reported below as SingularShiftError
                    warnings.simplefilter("ignore", la.LinAlgWarning)
                    lu, piv = la.lu_factor(K, check_finite=True)
                d = np.abs(np.diag(lu))
                rcond = d.min() / d.max() if d.max() > 0 else 0.0
                solve = lambda B, f=(lu, piv): la.lu_solve(f, B)
            if rcond < np.finfo(float).eps:
                raise SingularShiftError(s)
            self._shift_cache[s] = solve
            return solve

    def shifted_solve(self, s, B):
        """Return ``(s I - A)^{-1} B``; factorizations are cached per shift."""
        B = self._check_block(B)
        solve = self._shift_factor(s)
        if self.kind == "mass-pair":
            MB = self._M @ B
            return np.asarray(solve(np.asarray(MB)))
        return np.asarray(solve(B))

    def log_norm(self):
        """Cached logarithmic norm of the operator."""
        if self._log_norm is None:
            from .core_linalg import log_norm
            self._log_norm = log_norm(self, dense_threshold=self.dense_threshold)
        return self._log_norm


def aslinearoperator(A):
    """Wrap an array, a sparse matrix or an existing operator."""
    if isinstance(A, LinearOperator):
        return A
    if sps.issparse(A):
        return LinearOperator.sparse(A)
    return LinearOperator.dense(A)


def identity_operator(n):
    return LinearOperator.sparse(sps.identity(n, format="csr"))


def apply_block(op, B):
    return aslinearoperator(op).apply_block(B)


def shifted_solve(op, s, B):
    return aslinearoperator(op).shifted_solve(s, B)
