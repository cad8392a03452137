"""
Block Krylov and rational block Krylov decompositions.

The polynomial decomposition satisfies the block Arnoldi relation

    A V = V H + U_next H_next E_k^T,

where ``E_k`` selects the trailing block of columns of ``V``. Blocks whose
columns become linearly dependent are deflated (the block size shrinks); a
block that deflates completely ends the iteration with ``H_next`` empty.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .core_linalg import QR_DEFLATION_TOL, orthonormalize, spectral_norm
from .exceptions import DimensionError, EmptyBasisError
from .operators import aslinearoperator


@dataclass(frozen=True)
class BlockKrylovDecomp:
    """
    Orthonormal basis of a block Krylov space and the projected operator.

    Attributes
    ----------
    V : ndarray
        ``n x d`` basis with orthonormal columns, blocks ``[U_1, ..., U_k]``.
    H : ndarray
        ``d x d`` projection ``V^T A V`` (block Hessenberg for polynomial kind).
    H_next : ndarray
        Coupling block ``H_{k+1,k}`` of shape ``(len(U_next), block_sizes[-1])``.
    U_next : ndarray
        Next basis block ``U_{k+1}``; zero columns after a lucky breakdown.
    R1 : ndarray
        Triangular-like factor of the starting block, ``B = U_1 R1``.
    block_sizes : tuple of int
        Column count of each block of ``V``.
    deflated : tuple of (int, int)
        ``(block index, dropped columns)`` for every deflation event.
    kind : str
        ``"polynomial"`` or ``"rational"``.
    poles : tuple of float
        Poles used by the rational kind.
    """

    V: np.ndarray
    H: np.ndarray
    H_next: np.ndarray
    U_next: np.ndarray
    R1: np.ndarray
    block_sizes: tuple = ()
    deflated: tuple = ()
    kind: str = "polynomial"
    poles: tuple = field(default_factory=tuple)

    @property
    def steps(self):
        return len(self.block_sizes)

    @property
    def block_size(self):
        return self.R1.shape[1]

    @property
    def basis_cols(self):
        return self.V.shape[1]

    @property
    def exhausted(self):
        """True once the space is invariant (no further block can be added)."""
        return self.U_next.shape[1] == 0

    def trailing_block(self):
        """Slice of the last ``block_sizes[-1]`` columns (``E_k``)."""
        d = self.V.shape[1]
        return slice(d - self.block_sizes[-1], d)


def _start(B, tol):
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.ndim != 2 or B.shape[1] < 1:
        raise DimensionError(f"starting block must be n x l with l >= 1, got {B.shape}")
    scale = spectral_norm(B)
    if scale == 0.0:
        raise EmptyBasisError("starting block is zero; Krylov space is empty")
    U1, R1, dropped = orthonormalize(B, scale, tol)
    if U1.shape[1] == 0:
        raise EmptyBasisError("starting block is numerically rank zero")
    deflated = ((1, dropped),) if dropped else ()
    n = B.shape[0]
    return BlockKrylovDecomp(
        V=np.zeros((n, 0)), H=np.zeros((0, 0)), H_next=np.zeros((U1.shape[1], 0)),
        U_next=U1, R1=R1, block_sizes=(), deflated=deflated)


def _orthogonalize(V, W, sizes):
    """Block MGS of ``W`` against the blocks of ``V``, run twice (one reorthogonalization)."""
    coeffs = np.zeros((V.shape[1], W.shape[1]))
    bounds = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    for _ in range(2):
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            Ui = V[:, lo:hi]
            c = Ui.T @ W
            W = W - Ui @ c
            coeffs[lo:hi] += c
    return W, coeffs


def _new_block(V, W, scale, tol):
    """Orthonormalize ``W`` (already orthogonal to ``V``) into the next block."""
    U, R, dropped = orthonormalize(W, scale, tol)
    if U.shape[1]:
        # dividing by small kept pivots amplifies leftover V components; clean them
        U = U - V @ (V.T @ U)
        U, R2 = np.linalg.qr(U)
        R = R2 @ R
    return U, R, dropped


def extend(decomp, op, extra_steps, tol=QR_DEFLATION_TOL):
    """
    Add ``extra_steps`` block Arnoldi steps to a polynomial decomposition.

    The result equals ``block_arnoldi(op, B, decomp.steps + extra_steps)``.
    Extending an exhausted decomposition is a no-op.
    """
    if decomp.kind != "polynomial":
        raise ValueError("only polynomial decompositions can be extended")
    op = aslinearoperator(op)
    V, H = decomp.V, decomp.H
    U, Hn = decomp.U_next, decomp.H_next
    sizes, deflated = list(decomp.block_sizes), list(decomp.deflated)
    for _ in range(extra_steps):
        if U.shape[1] == 0:
            break
        d_old = V.shape[1]
        ell = U.shape[1]
        # append U to the basis and H_{k+1,k} below the current H
        V = np.hstack([V, U])
        H_new = np.zeros((d_old + ell, d_old + ell))
        H_new[:d_old, :d_old] = H
        if d_old:
            H_new[d_old:, d_old - sizes[-1]:d_old] = Hn
        sizes.append(ell)

        AU = op.apply_block(U)
        scale = spectral_norm(AU)
        W, coeffs = _orthogonalize(V, AU, sizes)
        H_new[:, d_old:] = coeffs
        H = H_new
        if scale > 0:
            U, Hn, dropped = _new_block(V, W, scale, tol)
        else:
            U, Hn, dropped = np.zeros((V.shape[0], 0)), np.zeros((0, ell)), ell
        if dropped:
            deflated.append((len(sizes) + 1, dropped))
        if U.shape[1] == 0:
            Hn = np.zeros((0, ell))
    return replace(decomp, V=V, H=H, H_next=Hn, U_next=U,
                   block_sizes=tuple(sizes), deflated=tuple(deflated))


def block_arnoldi(op, B, k, tol=QR_DEFLATION_TOL):
    """
    ``k`` steps of block Arnoldi for ``K_k(A, B) = span{B, AB, ..., A^{k-1} B}``.

    Modified Gram-Schmidt with one full reorthogonalization pass per step.
    Dependent columns (pivoted ``|R_ii| <= tol * ||A U_j||``) are dropped;
    a complete deflation stops early with ``steps < k``.

    Parameters
    ----------
    op : LinearOperator or array_like
        The ``n x n`` operator.
    B : ndarray
        ``n x l`` starting block.
    k : int
        Number of block steps (``k >= 1``).

    Raises
    ------
    EmptyBasisError
        If ``B`` is (numerically) zero.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    op = aslinearoperator(op)
    start = _start(B, tol)
    if start.V.shape[0] != op.n:
        raise DimensionError(f"B has {start.V.shape[0]} rows, operator dimension is {op.n}")
    return extend(start, op, k, tol)


def rational_block_arnoldi(op, B, poles, k, tol=QR_DEFLATION_TOL):
    """
    Orthonormal basis of the rational block Krylov space

        span{B, (s_1 I - A)^{-1} B, ..., prod_{i<k} (s_i I - A)^{-1} B}

    with ``H = V^T A V`` formed explicitly. ``H_next``/``U_next`` are empty.
    ``poles`` may be a scalar (repeated) or a sequence with at least ``k - 1`` entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    op = aslinearoperator(op)
    poles = np.atleast_1d(np.asarray(poles, dtype=float))
    if poles.size == 1:
        poles = np.full(max(k - 1, 1), poles[0])
    if poles.size < k - 1:
        raise ValueError(f"need {k - 1} poles, got {poles.size}")
    start = _start(B, tol)
    if start.V.shape[0] != op.n:
        raise DimensionError(f"B has {start.V.shape[0]} rows, operator dimension is {op.n}")
    n = op.n
    U = start.U_next
    blocks = [U]
    sizes = [U.shape[1]]
    deflated = list(start.deflated)
    V = U
    for j in range(k - 1):
        W = op.shifted_solve(poles[j], U)
        scale = spectral_norm(W)
        W, _ = _orthogonalize(V, W, sizes)
        U, _, dropped = _new_block(V, W, scale, tol)
        if dropped:
            deflated.append((j + 2, dropped))
        if U.shape[1] == 0:
            break
        blocks.append(U)
        sizes.append(U.shape[1])
        V = np.hstack(blocks)
    H = V.T @ op.apply_block(V)
    return BlockKrylovDecomp(
        V=V, H=H, H_next=np.zeros((0, sizes[-1])), U_next=np.zeros((n, 0)),
        R1=start.R1, block_sizes=tuple(sizes), deflated=tuple(deflated),
        kind="rational", poles=tuple(float(p) for p in poles[:max(k - 1, 0)]))


def arnoldi_residual(decomp, op):
    """``||A V - V H - U_next H_next E_k^T||`` (polynomial kind)."""
    op = aslinearoperator(op)
    R = op.apply_block(decomp.V) - decomp.V @ decomp.H
    if decomp.U_next.shape[1]:
        R[:, decomp.trailing_block()] -= decomp.U_next @ decomp.H_next
    return spectral_norm(R)
