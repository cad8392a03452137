"""Desk-scale problem corpus shared by the property and acceptance tests."""
import numpy as np

from krylov_dre.problems import heat_problem, random_dense_problem

RICCATI_SEEDS = range(10)


def riccati_corpus():
    """Ten dense Riccati problems (n = 30, p = q = 2) with a rank-2 ``S``."""
    return [random_dense_problem(n=30, p=2, q=2, seed=s) for s in RICCATI_SEEDS]


def mixed_corpus():
    """Riccati, Lyapunov, stiff and larger-``n`` cases, all oracle solvable."""
    probs = riccati_corpus()
    probs += [random_dense_problem(n=60, p=3, q=1, seed=s, s_scale=4.0) for s in (20, 21)]
    probs += [random_dense_problem(n=40, p=2, q=2, seed=s, s_rank=0) for s in (30, 31)]
    probs += [random_dense_problem(n=40, p=1, q=3, seed=s, shift=0.0) for s in (40, 41)]
    probs += [heat_problem(n=60, scale=10.0, p=2, q=1, seed=50, r=2)]
    return probs


def lift(out):
    return out.state.to_dense()


def spd_gap(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
