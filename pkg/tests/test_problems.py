import json
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sps

from krylov_dre.core_linalg import spectral_norm
from krylov_dre.dre import solve_single
from krylov_dre.exceptions import DimensionError, NotPositiveDefiniteError
from krylov_dre.matrix_market import write_matrix_market
from krylov_dre.oracle import DenseDRE, dense_dre_solve
from krylov_dre.problems import (ProblemSpec, cooling_style, heat_problem, laplacian_1d,
                                 random_dense_problem, random_low_rank, rng, scalar_problem)

FIXTURES = Path(__file__).parent / "fixtures"


# -- laplacian ----------------------------------------------------------------
def test_laplacian_small():
    np.testing.assert_array_equal(laplacian_1d(2, 1.0).to_dense(), [[-2.0, 1.0], [1.0, -2.0]])


def test_laplacian_symmetric_csr():
    op = laplacian_1d(50, 3.0)
    assert op.kind == "sparse"
    A = op._A
    assert A.format == "csr"
    assert (A != A.T).nnz == 0


def test_laplacian_top_eigenvalue():
    lam = laplacian_1d(400, 1e2).spectrum
    assert lam[-1] == pytest.approx(-6.14e-3, rel=1e-3)
    assert np.all(np.diff(lam) >= 0)


@pytest.mark.parametrize("n", [5, 37, 200])
def test_laplacian_spectrum_matches_eigensolver(n):
    op = laplacian_1d(n, 7.0)
    ev = np.linalg.eigvalsh(op.to_dense())
    np.testing.assert_allclose(np.sort(op.spectrum), ev, atol=1e-10)


# -- random data ----------------------------------------------------------
def test_random_low_rank_deterministic():
    a, b = random_low_rank(40, 3, 2, 9), random_low_rank(40, 3, 2, 9)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(a[0], random_low_rank(40, 3, 2, 10)[0])


def test_random_low_rank_unit_columns():
    Z, C = random_low_rank(100, 4, 3, 1)
    np.testing.assert_allclose(np.linalg.norm(Z, axis=0), 1.0, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(C, axis=0), 1.0, atol=1e-14)
    assert Z.shape == (100, 4) and C.shape == (100, 3)


def test_rng_matches_committed_fixture():
    ref = json.loads((FIXTURES / "rng_seed0.json").read_text())
    raw = rng(ref["seed"]).standard_normal(len(ref["first_standard_normals"]))
    assert [float(x).hex() for x in raw] == ref["first_standard_normals"]
    Z, C = random_low_rank(5, 2, 1, 0)
    assert float(Z[0, 0]).hex() == ref["random_low_rank_n5_p2_q1"]["Z00"]
    assert float(C[0, 0]).hex() == ref["random_low_rank_n5_p2_q1"]["C00"]


def test_generators_bitwise_reproducible():
    for make in (lambda: heat_problem(n=30, p=2, q=2, seed=4, r=1),
                 lambda: random_dense_problem(n=20, seed=4)):
        p1, p2 = make(), make()
        for a, b in ((p1.Z, p2.Z), (p1.C, p2.C), (p1.dense_S(), p2.dense_S()),
                     (p1.A.to_dense(), p2.A.to_dense())):
            np.testing.assert_array_equal(a, b)


def test_generated_problems_valid():
    for p in (heat_problem(n=30, r=2), random_dense_problem(), scalar_problem(z=0.5)):
        S = p.dense_S()
        assert np.linalg.eigvalsh(S)[0] >= -1e-12
        np.testing.assert_array_equal(S, S.T)
    assert scalar_problem(z=0.5).Z[0, 0] == 0.5


# -- cooling style ------------------------------------------------------------
def tiny_system(n=8, seed=0):
    g = rng(seed)
    M = sps.diags([np.full(n - 1, 0.1), np.full(n, 1.0), np.full(n - 1, 0.1)], [-1, 0, 1])
    A = -sps.diags([np.full(n - 1, -1.0), np.full(n, 2.5), np.full(n - 1, -1.0)], [-1, 0, 1])
    B = g.standard_normal((n, 2))
    C = g.standard_normal((3, n))
    return M.tocsr(), A.tocsr(), B, C


def test_cooling_identity_mass_reduces():
    M, A, B, C = tiny_system()
    p = cooling_style(sps.identity(8, format="csr"), A, B, C)
    np.testing.assert_allclose(p.A.to_dense(), A.toarray(), atol=1e-14)
    np.testing.assert_allclose(p.dense_S(), B @ B.T, atol=1e-14)
    np.testing.assert_allclose(p.C @ p.C.T, C.T @ C, atol=1e-14)
    assert p.Z.shape == (8, 0)


def test_cooling_shapes():
    M, A, B, C = tiny_system()
    with pytest.raises(DimensionError):
        cooling_style(M, A, B[:5], C)
    with pytest.raises(DimensionError):
        cooling_style(M, A, B, C.T)
    g = rng(3)
    p = cooling_style(M, A, g.standard_normal((8, 7)), g.standard_normal((6, 8)))
    assert p.C.shape == (8, 6)


def test_cooling_rejects_indefinite_mass():
    M, A, B, C = tiny_system()
    with pytest.raises(NotPositiveDefiniteError):
        cooling_style(-M, A, B, C)


@pytest.mark.parametrize("threshold", [None, 4])
def test_cooling_matches_premultiplied(tmp_path, threshold):
    M, A, B, C = tiny_system()
    paths = []
    for name, X in zip("MABC", (M, A, B, C)):
        path = tmp_path / f"{name}.mtx"
        write_matrix_market(path, X)
        paths.append(path)
    p = cooling_style(*paths, dense_threshold=threshold)
    Md = M.toarray()
    At = np.linalg.solve(Md, A.toarray())
    MB = np.linalg.solve(Md, B)
    ref = DenseDRE(A=At, Q=C.T @ C, S=MB @ MB.T, X0=np.zeros((8, 8)))
    t = 0.3
    got = solve_single(p, t, 8).state.to_dense()
    assert spectral_norm(got - dense_dre_solve(ref, t, 10)) <= 1e-9


# -- ProblemSpec ----------------------------------------------------------------
def test_spec_json_round_trip():
    spec = ProblemSpec("random_dense", {"n": 12, "p": 1}, seed=7)
    back = ProblemSpec.from_json(json.dumps(spec.to_dict()))
    assert back == spec
    p = back.build()
    np.testing.assert_array_equal(p.Z, random_dense_problem(n=12, p=1, seed=7).Z)


def test_spec_unknowns():
    with pytest.raises(ValueError):
        ProblemSpec.from_dict({"generator": "heat", "colour": "red"})
    with pytest.raises(ValueError):
        ProblemSpec("warp").build()
    with pytest.raises(ValueError):
        ProblemSpec("cooling", files={"M": "m.mtx"}).build()


def test_spec_scalar():
    p = ProblemSpec("scalar", {"q": 1.0, "s": 1.0}).build()
    assert p.n == 1
