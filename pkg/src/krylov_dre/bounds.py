"""
Closed-form a priori bounds.

All functions take plain scalars (or a :class:`ProblemScalars`) and return
floats; ``refined_symmetric_bound`` returns ``None`` outside its regimes.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core_linalg import log_norm, norm_estimate, phi1, spectral_norm

_LOG_FACTORIAL_SWITCH = 150


@dataclass(frozen=True)
class ProblemScalars:
    norm_A: float
    mu: float
    norm_X0: float
    norm_Q: float
    norm_S: float = 0.0
    rho: float = None

    @classmethod
    def from_problem(cls, p):
        """Compute the scalars of a :class:`~krylov_dre.dre.DREProblem`."""
        A = p.A
        if A.spectrum is not None:
            lam_min = float(A.spectrum[0])
        elif A.n <= 1000:
            Ad = A.to_dense()
            lam_min = float(np.linalg.eigvalsh(0.5 * (Ad + Ad.T))[0])
        else:
            lam_min = None
        rho = -lam_min / 4 if lam_min is not None and lam_min < 0 else None
        return cls(norm_A=norm_estimate(A), mu=log_norm(A),
                   norm_X0=spectral_norm(p.Z) ** 2, norm_Q=spectral_norm(p.C) ** 2,
                   norm_S=p.S_norm(), rho=rho)


def _power_over_factorial(x, k):
    """``x**k / k!`` with a log-space branch for large ``k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1.0
    if x == 0:
        return 0.0
    if k <= _LOG_FACTORIAL_SWITCH:
        return x**k / math.factorial(k)
    return math.exp(k * math.log(x) - math.lgamma(k + 1))


def _exp(x):
    return math.exp(x) if x < 700 else math.inf


def _mul(*xs):
    """Product with ``0 * inf = 0`` (a vanishing data norm kills the term)."""
    if any(x == 0 for x in xs):
        return 0.0
    return math.prod(xs)


def _max1_exp(x):
    return max(1.0, _exp(x))


def exact_solution_bound(t, s):
    """``e^{2 t mu} ||X0|| + t phi1(2 t mu) ||Q||``."""
    z = 2 * t * s.mu
    return _mul(_exp(z), s.norm_X0) + _mul(t, phi1(z), s.norm_Q)


def max_solution_bound(t, s):
    """``max(1, e^{2 t mu}) ||X0|| + t max(1, phi1(2 t mu)) ||Q||``."""
    z = 2 * t * s.mu
    return _mul(_max1_exp(z), s.norm_X0) + _mul(t, max(1.0, phi1(z)), s.norm_Q)


def exp_error_bound(k, t, s):
    """``2 max(1, e^{t mu}) (t ||A||)^k / k!``."""
    return _mul(2.0, _max1_exp(t * s.mu), _power_over_factorial(t * s.norm_A, k))


def _krylov_factor(k, t, s):
    """``||A||^k (t^k/k! ||X0|| + t^{k+1}/(k+1)! ||Q||)``."""
    a = _power_over_factorial(t * s.norm_A, k)
    return _mul(a, s.norm_X0) + _mul(a, t / (k + 1), s.norm_Q)


def lyapunov_apriori(k, t, s):
    """Projection error bound for the differential Lyapunov equation."""
    return _mul(4.0, _max1_exp(2 * t * s.mu), _krylov_factor(k, t, s))


def refined_symmetric_branches(k, t, rho, norm_X0, norm_Q):
    """
    Both regimes of the refined symmetric bound as ``(mid, large)``.

    ``mid`` applies for ``sqrt(4 rho t) <= k <= 2 rho t`` and ``large`` for
    ``k >= 2 rho t``; an inapplicable regime is ``None``.
    """
    if rho is None or not rho > 0:
        raise ValueError("rho must be positive")
    rt = rho * t
    data = norm_X0 + t * norm_Q
    mid = large = None
    if math.sqrt(4 * rt) <= k <= 2 * rt:
        mid = 20.0 * math.exp(-k * k / (5 * rt)) * data
    if k >= 2 * rt and k > 0:
        large = 20.0 / rt * math.exp(-rt + k * (1.0 + math.log(rt) - math.log(k))) * data
    return mid, large


def refined_symmetric_bound(k, t, rho, norm_X0, norm_Q):
    """
    Sharper Lyapunov bound for symmetric negative semidefinite ``A`` with
    spectrum in ``[-4 rho, 0]``.

    Returns ``None`` when ``k < sqrt(4 rho t)`` (no regime applies); at
    ``k = 2 rho t`` the smaller of the two regimes is returned.
    """
    vals = [b for b in refined_symmetric_branches(k, t, rho, norm_X0, norm_Q) if b is not None]
    return min(vals) if vals else None


def riccati_apriori(k, t, s):
    """Projection error bound for the Riccati equation, ``c(t) ||A||^k (...)``."""
    alpha = max_solution_bound(t, s)
    g = _max1_exp(t * s.mu)
    sa = _mul(t, s.norm_S, alpha)
    c2 = 1.0 + _mul(sa, phi1(_mul(sa, g)))
    c = 4.0 * (1.0 + _mul(2.0, s.norm_S, alpha, g, c2)) * _exp(sa)
    return _mul(c, _krylov_factor(k, t, s))


def rank_cut_budget(cuts, h, mu):
    """Accumulated truncation error ``sum_l eps_l e^{2 (N - l) h mu}``."""
    cuts = np.asarray(cuts, dtype=float)
    N = cuts.size
    if N == 0:
        return 0.0
    weights = np.exp(2.0 * (N - np.arange(1, N + 1)) * h * mu)
    return float(np.sum(cuts * weights))
