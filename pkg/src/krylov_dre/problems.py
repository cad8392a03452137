"""
Deterministic problem generators.

Random data comes from ``numpy.random.Generator(numpy.random.PCG64(seed))``:
PCG64 is a 128-bit LCG (multiplier 0x2360ED051FC65DA44385DF649FCCF645,
increment derived from the seed via SeedSequence) with the XSL-RR output
function, and normals are drawn with NumPy's ziggurat ``standard_normal``.
Both are stable across NumPy releases, so a seed pins every generated entry.
"""
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .dre import DREProblem
from .exceptions import DimensionError
from .matrix_market import read_matrix_market
from .operators import LinearOperator

GENERATORS = ("heat", "random_dense", "scalar", "cooling")


def rng(seed):
    """The package's seeded generator."""
    return np.random.Generator(np.random.PCG64(seed))


def laplacian_1d(n, scale=1e2):
    """``scale * tridiag(1, -2, 1)`` as a sparse operator with its analytic spectrum."""
    main = np.full(n, -2.0 * scale)
    off = np.full(n - 1, scale)
    A = sps.diags([off, main, off], [-1, 0, 1], format="csr")
    j = np.arange(1, n + 1)
    spectrum = scale * (-2.0 + 2.0 * np.cos(j * np.pi / (n + 1)))
    return LinearOperator.sparse(A, spectrum=spectrum)


def _unit_columns(G):
    norms = np.linalg.norm(G, axis=0)
    return G / np.where(norms > 0, norms, 1.0)


def random_low_rank(n, p, q, seed):
    """Standard normal ``Z`` (``n x p``) then ``C`` (``n x q``), unit 2-norm columns."""
    g = rng(seed)
    Z = _unit_columns(g.standard_normal((n, p)))
    C = _unit_columns(g.standard_normal((n, q)))
    return Z, C


def heat_problem(n=400, scale=1e2, p=1, q=1, seed=0, r=0, s_scale=1.0):
    """
    1-d heat equation DRE: ``A = scale * tridiag(1, -2, 1)`` and random unit
    factors. ``r > 0`` adds a quadratic term ``S = s_scale * B B^T`` with ``r``
    random unit columns (drawn after ``Z`` and ``C``).
    """
    Z, C = random_low_rank(n, p, q, seed)
    B = None
    if r:
        B = np.sqrt(s_scale) * _unit_columns(rng([seed, 1]).standard_normal((n, r)))
    return DREProblem(laplacian_1d(n, scale), Z, C, B=B)


def random_dense_problem(n=30, p=2, q=2, seed=0, shift=1.0, s_rank=2, s_scale=1.0,
                         z_scale=1.0, c_scale=1.0):
    """
    Dense nonsymmetric test problem: ``A = G / sqrt(n) - shift * I`` with
    Gaussian ``G``, unit-column ``Z``, ``C`` and ``S = s_scale * B B^T``.
    """
    g = rng(seed)
    A = g.standard_normal((n, n)) / np.sqrt(n) - shift * np.eye(n)
    Z = z_scale * _unit_columns(g.standard_normal((n, p)))
    C = c_scale * _unit_columns(g.standard_normal((n, q)))
    B = np.sqrt(s_scale) * _unit_columns(g.standard_normal((n, s_rank))) if s_rank else None
    return DREProblem(LinearOperator.dense(A), Z, C, B=B)


def scalar_problem(a=0.0, q=1.0, s=1.0, z=0.0):
    """``n = 1`` problem ``x' = 2 a x + q - s x^2``, ``x(0) = z^2``."""
    Z = np.array([[z]]) if z else np.zeros((1, 0))
    return DREProblem(LinearOperator.dense([[a]]), Z, np.array([[np.sqrt(q)]]),
                      S=np.array([[s]]))


def cooling_style(M, A, B, C, dense_threshold=None):
    """
    Generalized-state problem ``M x' = A x + B u``, ``y = C x``.

    Builds ``A~ = M^{-1} A``, ``S = (M^{-1} B)(M^{-1} B)^T``, ``Q = C^T C`` and
    ``X0 = 0``. ``C`` is given short and fat (``q x n``) and transposed here.
    Arguments may be arrays, sparse matrices or Matrix Market paths.
    """
    M, A, B, C = (read_matrix_market(x) if isinstance(x, (str, bytes)) or hasattr(x, "__fspath__")
                  else x for x in (M, A, B, C))
    kw = {} if dense_threshold is None else {"dense_threshold": dense_threshold}
    op = LinearOperator.mass_pair(M, A, **kw)
    n = op.n
    B = B.toarray() if sps.issparse(B) else np.asarray(B, dtype=float)
    C = C.toarray() if sps.issparse(C) else np.asarray(C, dtype=float)
    if B.ndim != 2 or B.shape[0] != n:
        raise DimensionError(f"B must be n x r with n = {n}, got {B.shape}")
    if C.ndim != 2 or C.shape[1] != n:
        raise DimensionError(f"C must be q x n with n = {n}, got {C.shape}")
    MB = op.solve_mass(B)
    return DREProblem(op, np.zeros((n, 0)), C.T.copy(), B=np.asarray(MB))


@dataclass
class ProblemSpec:
    """
    Serializable problem description.

    ``generator`` is one of ``heat``, ``random_dense``, ``scalar`` (keyword
    ``params`` forwarded to the matching builder) or ``cooling`` with
    ``files = {"M": ..., "A": ..., "B": ..., "C": ...}`` Matrix Market paths.
    """

    generator: str = "heat"
    params: dict = field(default_factory=dict)
    seed: int = 0
    files: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"generator", "params", "seed", "files"}
        if unknown:
            raise ValueError(f"unknown problem keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        return {"generator": self.generator, "params": dict(self.params),
                "seed": self.seed, "files": dict(self.files)}

    def build(self):
        g = self.generator
        if g == "heat":
            return heat_problem(seed=self.seed, **self.params)
        if g == "random_dense":
            return random_dense_problem(seed=self.seed, **self.params)
        if g == "scalar":
            return scalar_problem(**self.params)
        if g == "cooling":
            f = self.files
            missing = {"M", "A", "B", "C"} - set(f)
            if missing:
                raise ValueError(f"cooling problem needs files {sorted(missing)}")
            return cooling_style(f["M"], f["A"], f["B"], f["C"])
        raise ValueError(f"unknown generator {g!r}; choose from {GENERATORS}")
