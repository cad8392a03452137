"""
Modified Davison-Maki integrator for small dense symmetric Riccati equations

    Y' = H Y + Y H^T + Q - Y S Y,   Y(0) = Y0.

The linearization ``d/dt [U; W] = Ham [U; W]`` with ``Ham = [[-H^T, S], [Q, H]]``
gives ``Y = W U^{-1}``. One exponential ``E = expm(dt * Ham)`` is reused over
``m`` substeps, each mapping ``[I; Y_j] -> [U; W]`` and ``Y_{j+1} = W U^{-1}``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.linalg.lapack import dgecon

from .core_linalg import expm
from .exceptions import DimensionError, SubstepBreakdownError

EPS_COND = 1e13
DEFAULT_SUBSTEPS = 10


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SmallDRE:
    """Projected problem data ``(H, S, Q, Y0)``, all ``d x d``."""

    H: np.ndarray
    S: np.ndarray
    Q: np.ndarray
    Y0: np.ndarray

    def __post_init__(self):
        d = self.H.shape[0]
        for name in ("H", "S", "Q", "Y0"):
            M = getattr(self, name)
            if M.shape != (d, d):
                raise DimensionError(f"{name} has shape {M.shape}, expected {(d, d)}")

    @property
    def d(self):
        return self.H.shape[0]

    def check_invariants(self, sym_tol=1e-12, psd_tol=1e-10):
        """Raise ``ValueError`` if S, Q or Y0 is not symmetric PSD."""
        for name in ("S", "Q", "Y0"):
            M = getattr(self, name)
            scale = max(np.abs(M).max(initial=0.0), 1.0)
            if np.abs(M - M.T).max(initial=0.0) > sym_tol * scale:
                raise ValueError(f"{name} is not symmetric")
            if M.size and np.linalg.eigvalsh(_sym(M))[0] < -psd_tol * scale:
                raise ValueError(f"{name} is not positive semidefinite")


@dataclass(frozen=True)
class SmallTrajectory:
    """Substep iterates ``Ys[j] ~ Y(j * dt)``, ``j = 0..m``."""

    times: np.ndarray
    Ys: tuple
    dt: float

    @property
    def final(self):
        return self.Ys[-1]


def assemble_hamiltonian(p):
    """
    Hamiltonian matrix ``[[-H^T, S], [Q, H]]`` of the small problem.

    ``J @ Ham`` is symmetric for ``J = [[0, I], [-I, 0]]``.
    """
    d = p.d
    M = np.empty((2 * d, 2 * d))
    M[:d, :d] = -p.H.T
    M[:d, d:] = p.S
    M[d:, :d] = p.Q
    M[d:, d:] = p.H
    return M


def hamiltonian_defect(M):
    """``||(J M)^T - J M||_max`` with ``J = [[0, I], [-I, 0]]``."""
    d = M.shape[0] // 2
    JM = np.vstack([M[d:], -M[:d]])
    return float(np.abs(JM - JM.T).max(initial=0.0))


def solve_small_dre(p, t, m=DEFAULT_SUBSTEPS, eps_cond=EPS_COND):
    """
    Integrate the small DRE to time ``t`` with ``m`` Davison-Maki substeps.

    Parameters
    ----------
    p : SmallDRE
    t : float
        Final time, ``t > 0``.
    m : int
        Number of substeps; ``m = 1`` is the unmodified Davison-Maki method.
    eps_cond : float
        Breakdown threshold on the condition number of ``U``.

    Returns
    -------
    SmallTrajectory

    Raises
    ------
    SubstepBreakdownError
        If ``U`` becomes numerically singular (reciprocal condition < 1/eps_cond).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    d = p.d
    dt = t / m
    Y = _sym(np.asarray(p.Y0, dtype=float))
    Ys = [Y]
    if d == 0:
        return SmallTrajectory(np.linspace(0.0, t, m + 1), tuple(Ys * (m + 1)), dt)
    E = expm(dt * assemble_hamiltonian(p))
    E11, E12 = E[:d, :d], E[:d, d:]
    E21, E22 = E[d:, :d], E[d:, d:]
    for j in range(m):
        U = E11 + E12 @ Y
        W = E21 + E22 @ Y
        lu, piv = la.lu_factor(U, check_finite=False)
        rcond, info = dgecon(lu, np.linalg.norm(U, 1), norm="1")
        if info != 0 or not rcond > 1.0 / eps_cond:
            raise SubstepBreakdownError(
                f"U is numerically singular at substep {j + 1} (rcond = {rcond:.2e}); "
                f"increase the number of substeps m (currently {m})",
                rcond=rcond, substep=j + 1)
        # Y U = W  <=>  U^T Y^T = W^T
        Y = la.lu_solve((lu, piv), W.T, trans=1, check_finite=False).T
        Y = _sym(Y)
        Ys.append(Y)
    return SmallTrajectory(np.linspace(0.0, t, m + 1), tuple(Ys), dt)
