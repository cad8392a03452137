"""
Multiple time stepping with a rank cut after every step.

Each step re-seeds the Krylov space from the truncated factor of the previous
step, ``K_k(A, [Z_l C])``, so the initial value of the next step lies in the
basis. The cut sizes ``eps_l`` are accumulated into the truncation budget.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import rank_cut_budget
from .core_linalg import sym_eig
from .davison_maki import DEFAULT_SUBSTEPS
from .dre import LowRankSym, solve_adaptive, solve_single
from .exceptions import ToleranceNotMetError


def _cut(x, keep_count):
    lam, U = sym_eig(x.Y)
    lam = np.clip(lam, 0.0, None)
    discarded = float(lam[keep_count]) if keep_count < lam.size else 0.0
    V = x.V @ U[:, :keep_count]
    return LowRankSym(V, np.diag(lam[:keep_count])), discarded


def rank_cut(x, eps):
    """
    Spectral truncation keeping eigenpairs of ``Y`` above ``eps``.

    Negative eigenvalues (roundoff) are clamped to zero first. Returns the cut
    state and the largest discarded eigenvalue (0 if nothing is dropped).
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    lam = np.clip(sym_eig(x.Y).eigenvalues, 0.0, None)
    return _cut(x, int(np.count_nonzero(lam > eps)))


def rank_cut_to_rank(x, r):
    """Keep the ``r`` largest eigenpairs; the discarded value is ``lambda_{r+1}``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return _cut(x, min(int(r), x.Y.shape[0]))


@dataclass(frozen=True)
class StepPlan:
    """
    Time stepping parameters.

    Exactly one of ``eps_cut`` and ``rank`` selects the cut. ``k`` fixes the
    number of Arnoldi steps; with ``tol_krylov`` set, steps are adaptive up to
    ``k_max``. ``k_first`` overrides ``k`` (or ``k_max``) on the first step.
    """

    h: float
    N: int
    m: int = DEFAULT_SUBSTEPS
    eps_cut: float = None
    rank: int = None
    k: int = 10
    tol_krylov: float = None
    k_max: int = 60
    k_first: int = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if (self.eps_cut is None) == (self.rank is None):
            raise ValueError("give exactly one of eps_cut and rank")
        if self.eps_cut is not None and self.eps_cut < 0:
            raise ValueError("eps_cut must be >= 0")

    @property
    def adaptive(self):
        return self.tol_krylov is not None


@dataclass
class StepRecord:
    step: int
    k_used: int
    est: float
    rank: int
    sigma_cut: float
    budget_62: float
    budget_71: float
    basis_cols: int
    elapsed: float
    tolerance_met: bool = True


@dataclass
class StepReport:
    mu: float
    h: float
    records: list = field(default_factory=list)

    @property
    def cuts(self):
        return [r.sigma_cut for r in self.records]

    @property
    def budget_62(self):
        return self.records[-1].budget_62 if self.records else 0.0

    @property
    def budget_71(self):
        return self.records[-1].budget_71 if self.records else 0.0


def integrate(p, plan, mu=None):
    """
    Advance ``p`` over ``plan.N`` steps of size ``plan.h``.

    Returns
    -------
    trajectory : list of LowRankSym
        Cut state after each step.
    report : StepReport
    """
    if mu is None:
        mu = p.A.log_norm()
    report = StepReport(mu=mu, h=plan.h)
    trajectory = []
    current = p
    for ell in range(1, plan.N + 1):
        t0 = time.perf_counter()
        met = True
        if plan.adaptive:
            k_max = plan.k_first if (ell == 1 and plan.k_first) else plan.k_max
            try:
                out = solve_adaptive(current, plan.h, plan.tol_krylov, plan.m, k_max=k_max)
            except ToleranceNotMetError as err:
                out, met = err.outcome, False
        else:
            k = plan.k_first if (ell == 1 and plan.k_first) else plan.k
            out = solve_single(current, plan.h, k, plan.m)
        if plan.rank is not None:
            state, sigma = rank_cut_to_rank(out.state, plan.rank)
        else:
            state, sigma = rank_cut(out.state, plan.eps_cut)
        trajectory.append(state)
        cuts = report.cuts + [sigma]
        report.records.append(StepRecord(
            step=ell, k_used=out.k_used, est=out.est, rank=state.rank,
            sigma_cut=sigma, budget_62=rank_cut_budget(cuts, plan.h, mu),
            budget_71=float(np.sum(cuts)), basis_cols=out.basis_cols,
            elapsed=time.perf_counter() - t0, tolerance_met=met))
        current = p.with_initial_factor(state.factor())
    return trajectory, report
