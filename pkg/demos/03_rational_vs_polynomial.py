# %% [markdown]
# # Rational against polynomial Krylov spaces
#
# Shifted solves with the pole `s = 1` build a rational space that captures
# the slowly decaying heat modes faster than powers of `A`. The eigenvalue
# truncation of the exact solution is the best any rank-`d` space can do.

# %%
import numpy as np

from krylov_dre import rational_block_arnoldi, solve_in_basis, solve_single
from krylov_dre.oracle import heat_lyapunov
from krylov_dre.problems import heat_problem

n, t = 400, 0.5
p = heat_problem(n=n, seed=0)
X = heat_lyapunov(n, 1e2, p.Z, p.C, t)
lam = np.sort(np.abs(np.linalg.eigvalsh(X)))[::-1]

print(f"{'dim':>4} {'polynomial':>11} {'rational':>11} {'best':>11}")
for k in range(1, 31, 3):
    poly = solve_single(p, t, k)
    rat = solve_in_basis(p, rational_block_arnoldi(p.A, p.start_block, 1.0, k), t)
    d = poly.basis_cols
    e_poly = np.linalg.norm(poly.state.to_dense() - X, 2)
    e_rat = np.linalg.norm(rat.state.to_dense() - X, 2)
    print(f"{d:4d} {e_poly:11.2e} {e_rat:11.2e} {lam[d]:11.2e}")
