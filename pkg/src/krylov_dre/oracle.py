"""
Dense reference solvers for desk-scale problems.

Two independent routes are provided: the full-size modified Davison-Maki
linearization and a classical fourth-order Runge-Kutta integration of the
matrix ODE. Closed forms cover the scalar and zero-``A`` cases and the heat
equation Lyapunov problem via the sine eigenbasis of the 1-d Laplacian.
"""
from dataclasses import dataclass

import numpy as np

from .core_linalg import phi1
from .davison_maki import DEFAULT_SUBSTEPS, SmallDRE, solve_small_dre
from .exceptions import InstabilityError, OracleSizeError

ORACLE_LIMIT = 500


@dataclass(frozen=True)
class DenseDRE:
    A: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    X0: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @classmethod
    def from_problem(cls, p, limit=ORACLE_LIMIT):
        """Densify a :class:`~krylov_dre.dre.DREProblem` (refused above ``limit``)."""
        if p.n > limit:
            raise OracleSizeError(f"n = {p.n} exceeds the oracle limit {limit}")
        return cls(A=p.A.to_dense(), Q=p.C @ p.C.T, S=p.dense_S(), X0=p.Z @ p.Z.T)

    def rhs(self, X):
        A = self.A
        return A @ X + X @ A.T + self.Q - X @ self.S @ X


def dense_dre_solve(p, t, m=DEFAULT_SUBSTEPS, limit=ORACLE_LIMIT):
    """Full-size modified Davison-Maki solution ``X(t)``."""
    if p.n > limit:
        raise OracleSizeError(f"n = {p.n} exceeds the oracle limit {limit}")
    small = SmallDRE(H=p.A, S=p.S, Q=p.Q, Y0=p.X0)
    return solve_small_dre(small, t, m).final


def dense_dre_trajectory(p, t, m=DEFAULT_SUBSTEPS):
    """All substep iterates of :func:`dense_dre_solve`."""
    return solve_small_dre(SmallDRE(H=p.A, S=p.S, Q=p.Q, Y0=p.X0), t, m)


def rk_dre_solve(p, t, steps):
    """
    Classical RK4 on ``X' = A X + X A^T + Q - X S X`` with ``steps`` equal steps.

    Raises
    ------
    InstabilityError
        If the iteration produces non-finite values.
    """
    h = t / steps
    X = 0.5 * (p.X0 + p.X0.T)
    f = p.rhs
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            k1 = f(X)
            k2 = f(X + 0.5 * h * k1)
            k3 = f(X + 0.5 * h * k2)
            k4 = f(X + h * k3)
            X = X + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            X = 0.5 * (X + X.T)
            if not np.all(np.isfinite(X)):
                raise InstabilityError(
                    f"RK4 diverged with {steps} steps (h = {h:.3e}); use more steps")
    return X


def laplacian_eigen(n, scale):
    """Eigenpairs of ``scale * tridiag(1, -2, 1)`` (ascending eigenvalues)."""
    j = np.arange(1, n + 1)
    lam = scale * (-2.0 + 2.0 * np.cos(j * np.pi / (n + 1)))
    Qm = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))
    order = np.argsort(lam)
    return lam[order], Qm[:, order]


def heat_lyapunov(n, scale, Z, C, t):
    """
    Exact ``X(t)`` for ``X' = A X + X A + C C^T``, ``X(0) = Z Z^T`` with
    ``A = scale * tridiag(1, -2, 1)``, from the eigenexpansion of ``A``.
    """
    lam, Qm = laplacian_eigen(n, scale)
    Zt = Qm.T @ np.asarray(Z).reshape(n, -1)
    Ct = Qm.T @ np.asarray(C).reshape(n, -1)
    e = np.exp(t * lam)
    Xt = (e[:, None] * (Zt @ Zt.T)) * e[None, :]
    Xt += (Ct @ Ct.T) * (t * phi1(t * (lam[:, None] + lam[None, :])))
    X = Qm @ Xt @ Qm.T
    return 0.5 * (X + X.T)


def closed_form(name, params, t):
    """
    Analytic solutions.

    ``name`` is one of ``scalar_riccati_decay`` (params ``y0, s``),
    ``scalar_riccati_tanh`` (``q, s``), ``lyapunov_zero_A`` (``X0, Q``) and
    ``heat_lyapunov`` (``n, scale, Z, C``).
    """
    if name == "scalar_riccati_decay":
        return 1.0 / (1.0 / params["y0"] + params["s"] * t)
    if name == "scalar_riccati_tanh":
        q, s = params["q"], params["s"]
        return np.sqrt(q / s) * np.tanh(np.sqrt(q * s) * t)
    if name == "lyapunov_zero_A":
        return np.asarray(params["X0"]) + t * np.asarray(params["Q"])
    if name == "heat_lyapunov":
        return heat_lyapunov(params["n"], params["scale"], params["Z"], params["C"], t)
    raise KeyError(f"unknown closed form {name!r}")
