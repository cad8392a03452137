"""
Krylov projection solver for large symmetric differential Riccati equations

    X' = A X + X A^T + Q - X S X,   X(0) = X0,

with low-rank data ``X0 = Z Z^T`` and ``Q = C C^T``. The equation is projected
onto ``K_k(A, [Z C])``, the small system is solved by the modified Davison-Maki
method, and the result is lifted as ``X_k = V Y V^T``.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .core_linalg import spectral_norm, sym_eig
from .davison_maki import DEFAULT_SUBSTEPS, SmallDRE, solve_small_dre
from .exceptions import (DimensionError, ProjectionError, ToleranceNotMetError,
                         UnsupportedEstimateError)
from .krylov import block_arnoldi, extend
from .operators import aslinearoperator

CONTAINMENT_TOL = 1e-8


@dataclass
class DREProblem:
    """
    Problem data. ``S`` is given densely, as a factor ``B`` (``S = B B^T``),
    or omitted entirely (Lyapunov mode).

    Parameters
    ----------
    A : LinearOperator or array_like
    Z : ndarray, shape (n, p)
        Initial value factor; ``p = 0`` means ``X0 = 0``.
    C : ndarray, shape (n, q)
        Factor of the inhomogeneity ``Q = C C^T``.
    S : ndarray, optional
        Dense symmetric PSD quadratic coefficient.
    B : ndarray, optional
        Low-rank factor of ``S``.
    """

    A: object
    Z: np.ndarray
    C: np.ndarray
    S: np.ndarray = None
    B: np.ndarray = None

    def __post_init__(self):
        self.A = aslinearoperator(self.A)
        n = self.A.n
        self.Z = _as_factor(self.Z, n, "Z")
        self.C = _as_factor(self.C, n, "C")
        if self.S is not None and self.B is not None:
            raise ValueError("give either S or its factor B, not both")
        if self.S is not None:
            self.S = np.asarray(self.S, dtype=float)
            if self.S.shape != (n, n):
                raise DimensionError(f"S has shape {self.S.shape}, expected {(n, n)}")
            if np.abs(self.S - self.S.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(self.S).max()):
                raise ValueError("S must be symmetric")
        if self.B is not None:
            self.B = _as_factor(self.B, n, "B")

    @property
    def n(self):
        return self.A.n

    @property
    def lyapunov(self):
        return self.S is None and (self.B is None or self.B.shape[1] == 0)

    @property
    def start_block(self):
        """Krylov starting block ``[Z C]``."""
        return np.hstack([self.Z, self.C])

    def dense_S(self):
        if self.S is not None:
            return self.S
        if self.B is not None:
            return self.B @ self.B.T
        return np.zeros((self.n, self.n))

    def S_norm(self):
        if self.S is not None:
            return spectral_norm(self.S)
        if self.B is not None:
            return spectral_norm(self.B) ** 2
        return 0.0

    def with_initial_factor(self, Z):
        return DREProblem(self.A, Z, self.C, S=self.S, B=self.B)


def _as_factor(F, n, name):
    if F is None:
        return np.zeros((n, 0))
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2 or F.shape[0] != n:
        raise DimensionError(f"{name} must have {n} rows, got shape {F.shape}")
    return F


@dataclass(frozen=True)
class LowRankSym:
    """Symmetric PSD matrix ``X = V Y V^T`` with orthonormal ``V``."""

    V: np.ndarray
    Y: np.ndarray

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def rank(self):
        return self.V.shape[1]

    def to_dense(self):
        return self.V @ self.Y @ self.V.T

    def norm(self):
        return spectral_norm(self.Y)

    def factor(self):
        """``F`` with ``X = F F^T`` (negative eigenvalues of ``Y`` clamped to 0)."""
        lam, U = sym_eig(self.Y)
        lam = np.clip(lam, 0.0, None)
        keep = lam > 0
        return (self.V @ U[:, keep]) * np.sqrt(lam[keep])


@dataclass
class SolveOutcome:
    state: LowRankSym
    est: float
    k_used: int
    basis_cols: int
    decomp: object = None
    trajectory: object = None
    est_heuristic: bool = False
    timings: dict = field(default_factory=dict)

    @property
    def trajectory_kept(self):
        return self.trajectory is not None


def project_problem(p, decomp, check=True):
    """
    Project the problem onto ``range(decomp.V)``.

    Raises
    ------
    ProjectionError
        If ``[Z C]`` is not contained in the basis (wrong decomposition).
    """
    V = decomp.V
    ZC = p.start_block
    if check and ZC.shape[1]:
        leak = spectral_norm(ZC - V @ (V.T @ ZC))
        if leak > CONTAINMENT_TOL * spectral_norm(ZC):
            raise ProjectionError(
                f"[Z C] is not contained in the basis (leak {leak:.2e}); "
                "the decomposition was built for a different problem")
    Zk = V.T @ p.Z
    Ck = V.T @ p.C
    if p.S is not None:
        Sk = V.T @ p.S @ V
        Sk = 0.5 * (Sk + Sk.T)
    elif p.B is not None:
        Bk = V.T @ p.B
        Sk = Bk @ Bk.T
    else:
        Sk = np.zeros((V.shape[1], V.shape[1]))
    return SmallDRE(H=decomp.H, S=Sk, Q=Ck @ Ck.T, Y0=Zk @ Zk.T)


def aposteriori_estimate(decomp, traj):
    """
    Residual-based error estimate ``|| H_{k+1,k} E_k^T sum_l dt Y(l dt) ||``.

    The time integral of ``Y`` is the right-endpoint sum over the substeps.
    """
    if decomp.kind != "polynomial":
        raise UnsupportedEstimateError("the a posteriori estimate needs a polynomial decomposition")
    if decomp.H_next.shape[0] == 0:
        return 0.0
    integral = traj.dt * np.sum(traj.Ys[1:], axis=0)
    return spectral_norm(decomp.H_next @ integral[decomp.trailing_block(), :])


@dataclass(frozen=True)
class LowRankResidual:
    """Residual ``R = F G F^T`` with orthonormal ``F = [V, U_next]``."""

    F: np.ndarray
    G: np.ndarray

    def norm(self):
        return spectral_norm(self.G)

    def to_dense(self):
        return self.F @ self.G @ self.F.T


def residual(p, decomp, Y):
    """
    Residual ``R_k = U_{k+1} H_{k+1,k} E_k^T Y V^T + V Y E_k H_{k+1,k}^T U_{k+1}^T``
    of ``X_k = V Y V^T``, in factored form.

    This equals ``F(X_k) - X_k'`` for the problem ``p`` whenever ``decomp`` was
    built from ``p.start_block``; ``p`` itself only enters through that basis.
    """
    del p
    if decomp.kind != "polynomial":
        raise UnsupportedEstimateError("residual needs a polynomial decomposition")
    d = decomp.V.shape[1]
    r = decomp.U_next.shape[1]
    K = decomp.H_next @ np.asarray(Y)[decomp.trailing_block(), :]
    G = np.zeros((d + r, d + r))
    G[d:, :d] = K
    G[:d, d:] = K.T
    return LowRankResidual(np.hstack([decomp.V, decomp.U_next]), G)


def _finish(p, decomp, t, m, keep_trajectory, t_arnoldi):
    t0 = time.perf_counter()
    small = project_problem(p, decomp)
    traj = solve_small_dre(small, t, m)
    t_small = time.perf_counter() - t0
    est = aposteriori_estimate(decomp, traj) if decomp.kind == "polynomial" else None
    return SolveOutcome(
        state=LowRankSym(decomp.V, traj.final), est=est, k_used=decomp.steps,
        basis_cols=decomp.basis_cols, decomp=decomp,
        trajectory=traj if keep_trajectory else None,
        est_heuristic=p.A.log_norm() > 0,
        timings={"arnoldi": t_arnoldi, "small_solve": t_small})


def solve_in_basis(p, decomp, t, m=DEFAULT_SUBSTEPS, keep_trajectory=False):
    """
    Project onto an existing decomposition (polynomial or rational) and solve.

    ``est`` is ``None`` for rational decompositions, which carry no Arnoldi
    relation to estimate from.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    return _finish(p, decomp, t, m, keep_trajectory, 0.0)


def solve_single(p, t, k, m=DEFAULT_SUBSTEPS, keep_trajectory=False):
    """
    One projection step: ``k`` block Arnoldi steps on ``[Z C]``, small solve, lift.

    Parameters
    ----------
    p : DREProblem
    t : float
        Time horizon.
    k : int
        Number of block Arnoldi steps.
    m : int
        Davison-Maki substeps.

    Returns
    -------
    SolveOutcome
    """
    if not t > 0:
        raise ValueError("t must be positive")
    t0 = time.perf_counter()
    decomp = block_arnoldi(p.A, p.start_block, k)
    return _finish(p, decomp, t, m, keep_trajectory, time.perf_counter() - t0)


def solve_adaptive(p, t, tol, m=DEFAULT_SUBSTEPS, k_max=100, k_start=2, k_step=2,
                   keep_trajectory=False):
    """
    Grow the Krylov space ``k_step`` blocks at a time until ``est <= tol``.

    Raises
    ------
    ToleranceNotMetError
        If ``k_max`` is reached with ``est > tol``; ``err.outcome`` holds the last solve.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    t0 = time.perf_counter()
    decomp = block_arnoldi(p.A, p.start_block, min(k_start, k_max))
    t_arnoldi = time.perf_counter() - t0
    while True:
        out = _finish(p, decomp, t, m, keep_trajectory, t_arnoldi)
        if out.est <= tol or decomp.exhausted:
            return out
        if decomp.steps >= k_max:
            raise ToleranceNotMetError(
                f"estimate {out.est:.3e} > tol {tol:.3e} at k_max = {k_max}", outcome=out)
        t0 = time.perf_counter()
        decomp = extend(decomp, p.A, min(k_step, k_max - decomp.steps))
        t_arnoldi += time.perf_counter() - t0
