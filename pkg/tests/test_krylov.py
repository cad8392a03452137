import math

import numpy as np
import pytest
import scipy.sparse as sps
from hypothesis import given, settings, strategies as st

from krylov_dre.bounds import ProblemScalars, exp_error_bound
from krylov_dre.core_linalg import expm, log_norm, spectral_norm
from krylov_dre.exceptions import DimensionError, EmptyBasisError, SingularShiftError
from krylov_dre.krylov import arnoldi_residual, block_arnoldi, extend, rational_block_arnoldi
from krylov_dre.operators import LinearOperator
from krylov_dre.problems import laplacian_1d, rng


def orth_error(V):
    return np.abs(V.T @ V - np.eye(V.shape[1])).max()


def random_sparse_op(n, seed, density=0.1):
    A = sps.random(n, n, density=density, random_state=rng(seed), format="csr")
    return LinearOperator.sparse(A - sps.identity(n))


def dissipative(n, seed):
    """Random dense A with mu(A) <= 0."""
    G = rng(seed).standard_normal((n, n)) / math.sqrt(n)
    A = G - (log_norm(G) + 0.1) * np.eye(n)
    return LinearOperator.dense(A)


def align_signs(X, Y):
    s = np.sign(np.sum(X * Y, axis=0))
    s[s == 0] = 1.0
    return Y * s


# -- block_arnoldi ----------------------------------------------------------
def test_invariant_subspace_deflates():
    A = np.diag(np.arange(1.0, 6.0))
    d = block_arnoldi(A, np.eye(5)[:, :1], 3)
    np.testing.assert_allclose(np.abs(d.V), np.eye(5)[:, :1])
    np.testing.assert_allclose(d.H, [[1.0]])
    assert d.steps == 1
    assert d.deflated == ((2, 1),)
    assert d.exhausted and d.H_next.shape[0] == 0


def test_random_sparse_relation_seed5():
    op = random_sparse_op(50, 5)
    B = rng(5).standard_normal((50, 2))
    d = block_arnoldi(op, B, 4)
    assert arnoldi_residual(d, op) <= 1e-10 * spectral_norm(op.to_dense())
    assert orth_error(d.V) <= 1e-10
    assert d.basis_cols == 8 and d.block_size == 2


def test_full_space_eigenvalues():
    n = 24
    A = rng(6).standard_normal((n, n))
    d = block_arnoldi(A, rng(7).standard_normal((n, 3)), n // 3)
    assert d.basis_cols == n
    ev_H = np.sort_complex(np.linalg.eigvals(d.H))
    ev_A = np.sort_complex(np.linalg.eigvals(A))
    np.testing.assert_allclose(ev_H, ev_A, atol=1e-8)


def test_projection_matches_definition():
    op = random_sparse_op(40, 1, 0.2)
    d = block_arnoldi(op, rng(2).standard_normal((40, 2)), 5)
    np.testing.assert_allclose(d.H, d.V.T @ op.apply_block(d.V), atol=1e-13)
    # block Hessenberg: nothing below the first subdiagonal block
    bounds = np.cumsum((0,) + d.block_sizes)
    for i in range(2, d.steps):
        assert np.all(d.H[bounds[i]:bounds[i + 1], :bounds[i - 1]] == 0)


def test_starting_block_factor():
    B = rng(3).standard_normal((30, 3))
    d = block_arnoldi(random_sparse_op(30, 3), B, 2)
    np.testing.assert_allclose(d.V[:, :3] @ d.R1, B, atol=1e-13)


def test_zero_block_raises():
    with pytest.raises(EmptyBasisError):
        block_arnoldi(np.eye(4), np.zeros((4, 2)), 2)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        block_arnoldi(np.eye(4), np.ones((5, 1)), 2)


def test_rank_deficient_start_deflates():
    b = rng(1).standard_normal((20, 1))
    d = block_arnoldi(random_sparse_op(20, 1, 0.3), np.hstack([b, 2 * b]), 3)
    assert d.deflated[0] == (1, 1)
    assert d.block_sizes[0] == 1


@pytest.mark.parametrize("seed", range(5))
def test_field_of_values_consequences(seed):
    A = rng(seed).standard_normal((40, 40))
    d = block_arnoldi(A, rng(seed + 10).standard_normal((40, 2)), 6)
    assert log_norm(d.H) <= log_norm(A) + 1e-8
    assert spectral_norm(d.H) <= spectral_norm(A) + 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_containment_of_krylov_powers(seed):
    A = rng(seed).standard_normal((50, 50)) / math.sqrt(50)
    B = rng(seed + 1).standard_normal((50, 2))
    k = 6
    d = block_arnoldi(A, B, k)
    assert not d.deflated
    norm_A = spectral_norm(A)
    X = B
    for j in range(k):
        leak = spectral_norm(X - d.V @ (d.V.T @ X))
        assert leak <= 1e-8 * norm_A**j * spectral_norm(B)
        X = A @ X


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 40), st.integers(1, 4), st.integers(1, 12))
def test_arnoldi_invariants_property(seed, n, ell, k):
    g = rng(seed)
    A = g.standard_normal((n, n))
    B = g.standard_normal((n, ell))
    d = block_arnoldi(A, B, k)
    assert orth_error(d.V) <= 1e-10
    assert arnoldi_residual(d, A) <= 1e-10 * spectral_norm(A)
    assert d.basis_cols <= min(n, k * ell)


def test_near_deflation_keeps_orthogonality():
    # nearly invariant start: A e1 has a tiny component outside span(e1)
    n = 30
    A = np.diag(np.arange(1.0, n + 1))
    A[1, 0] = 1e-11
    d = block_arnoldi(A, np.eye(n)[:, :1], 5)
    assert orth_error(d.V) <= 1e-10
    assert arnoldi_residual(d, A) <= 1e-10 * spectral_norm(A)


# -- extend -----------------------------------------------------------------
@pytest.mark.parametrize("seed", range(4))
def test_extend_equals_recompute(seed):
    op = random_sparse_op(60, seed, 0.15)
    B = rng(seed).standard_normal((60, 2))
    ext = extend(block_arnoldi(op, B, 2), op, 1)
    full = block_arnoldi(op, B, 3)
    V = align_signs(full.V, ext.V)
    s = np.sign(np.sum(full.V * ext.V, axis=0))
    np.testing.assert_allclose(V, full.V, atol=1e-12)
    np.testing.assert_allclose(s[:, None] * ext.H * s[None, :], full.H, atol=1e-12)


def test_extend_zero_steps_identical():
    op = random_sparse_op(30, 2)
    d = block_arnoldi(op, rng(2).standard_normal((30, 2)), 3)
    e = extend(d, op, 0)
    for name in ("V", "H", "H_next", "U_next"):
        np.testing.assert_array_equal(getattr(e, name), getattr(d, name))


def test_extend_past_deflation_is_noop():
    A = np.diag(np.arange(1.0, 6.0))
    d = block_arnoldi(A, np.eye(5)[:, :1], 3)
    e = extend(d, A, 4)
    np.testing.assert_array_equal(e.V, d.V)
    assert e.deflated == d.deflated == ((2, 1),)


def test_extend_nested_subspaces():
    op = random_sparse_op(40, 8)
    B = rng(8).standard_normal((40, 2))
    d = block_arnoldi(op, B, 3)
    e = extend(d, op, 2)
    assert spectral_norm(d.V - e.V @ (e.V.T @ d.V)) <= 1e-12


def test_extend_rejects_rational():
    d = rational_block_arnoldi(np.diag([-1.0, -2.0, -3.0]), np.ones((3, 1)), 1.0, 2)
    with pytest.raises(ValueError):
        extend(d, np.eye(3), 1)


# -- exponential approximation error bound ----------------------------------
@pytest.mark.parametrize("seed", range(5))
def test_exponential_approximation_bound(seed):
    n, t = 60, 0.1
    op = dissipative(n, seed)
    A = op.to_dense()
    B = rng(seed + 100).standard_normal((n, 2))
    s = ProblemScalars(norm_A=spectral_norm(A), mu=log_norm(A), norm_X0=0.0, norm_Q=0.0)
    exact = expm(t * A) @ B
    for k in range(1, 9):
        d = block_arnoldi(op, B, k)
        approx = d.V @ (expm(t * d.H) @ (d.V.T @ B))
        err = spectral_norm(exact - approx)
        assert err <= exp_error_bound(k, t, s) * spectral_norm(B)


# -- rational ---------------------------------------------------------------
def test_rational_zero_operator_deflates():
    b = rng(0).standard_normal((6, 1))
    d = rational_block_arnoldi(np.zeros((6, 6)), b, [1.0, 1.0], 3)
    assert d.basis_cols == 1
    assert d.deflated == ((2, 1),)
    assert d.kind == "rational"
    assert d.H_next.shape[0] == 0 and d.U_next.shape[1] == 0


def test_rational_orthogonality_seed9():
    op = laplacian_1d(200, 10.0)
    d = rational_block_arnoldi(op, rng(9).standard_normal((200, 2)), 1.0, 12)
    assert orth_error(d.V) <= 1e-10
    np.testing.assert_allclose(d.H, d.V.T @ op.apply_block(d.V), atol=1e-12)


def test_rational_spans_resolvent_powers():
    n = 40
    A = laplacian_1d(n, 10.0).to_dense()
    b = rng(4).standard_normal((n, 1))
    poles = [0.5, 1.0, 2.0]
    d = rational_block_arnoldi(A, b, poles, 4)
    X = b
    for s in poles:
        X = np.linalg.solve(s * np.eye(n) - A, X)
        leak = spectral_norm(X - d.V @ (d.V.T @ X)) / spectral_norm(X)
        assert leak <= 1e-9
    assert d.poles == tuple(poles)


def test_rational_singular_pole():
    with pytest.raises(SingularShiftError):
        rational_block_arnoldi(np.diag([1.0, 2.0, 3.0]), np.ones((3, 1)), 1.0, 2)


def test_rational_too_few_poles():
    with pytest.raises(ValueError):
        rational_block_arnoldi(np.eye(3) * -1, np.ones((3, 1)), [1.0, 2.0], 4)
