"""Block Krylov projection solver for large symmetric differential Riccati equations."""
from .bounds import (ProblemScalars, exact_solution_bound, exp_error_bound, lyapunov_apriori,
                     max_solution_bound, rank_cut_budget, refined_symmetric_bound,
                     riccati_apriori)
from .core_linalg import expm, log_norm, phi1, spectral_norm, sym_eig, thin_qr
from .davison_maki import SmallDRE, SmallTrajectory, assemble_hamiltonian, solve_small_dre
from .dre import (DREProblem, LowRankSym, SolveOutcome, aposteriori_estimate,
                  project_problem, residual, solve_adaptive, solve_in_basis,
                  solve_single)
from .krylov import BlockKrylovDecomp, block_arnoldi, extend, rational_block_arnoldi
from .matrix_market import read_matrix_market, write_matrix_market
from .operators import LinearOperator, aslinearoperator
from .oracle import DenseDRE, closed_form, dense_dre_solve, rk_dre_solve
from .problems import ProblemSpec, cooling_style, laplacian_1d, random_low_rank
from .stepping import StepPlan, StepReport, integrate, rank_cut, rank_cut_to_rank

__version__ = "0.1.0"
