"""
Matrix Market (.mtx) reader and writer.

Supports the ``coordinate`` and ``array`` formats with ``real`` (or ``integer``)
field and ``general`` / ``symmetric`` symmetry. Coordinate files load as
``scipy.sparse.csr_matrix``; array files load as dense ``ndarray``.
Symmetric storage is expanded to full storage on read.
"""
import numpy as np
import scipy.sparse as sps

from .exceptions import MatrixMarketError, UnsupportedFormatError

_BANNER = "%%matrixmarket"


def _parse_header(line):
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0].lower() != _BANNER:
        raise MatrixMarketError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise UnsupportedFormatError(f"object {obj!r} not supported", 1)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unknown format {fmt!r}", 1)
    if field not in ("real", "integer", "double"):
        raise UnsupportedFormatError(f"field {field!r} not supported (real only)", 1)
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"symmetry {symmetry!r} not supported", 1)
    return fmt, symmetry


def _numbers(text, lineno, count, kinds):
    parts = text.split()
    if len(parts) != count:
        raise MatrixMarketError(f"expected {count} values, found {len(parts)}", lineno)
    try:
        return [k(p) for k, p in zip(kinds, parts)]
    except ValueError:
        raise MatrixMarketError(f"cannot parse entry {text.strip()!r}", lineno) from None


def read_matrix_market(path):
    """
    Load a Matrix Market file.

    Returns
    -------
    scipy.sparse.csr_matrix or ndarray
        Sparse for coordinate files (indices sorted), dense for array files.

    Raises
    ------
    MatrixMarketError
        Malformed header or entries (the message carries the line number).
    UnsupportedFormatError
        Pattern, complex or skew/hermitian files.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    fmt, symmetry = _parse_header(lines[0])
    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line", len(lines))
    size_lineno, size_line = body[0]
    entries = body[1:]

    if fmt == "coordinate":
        nrows, ncols, nnz = _numbers(size_line, size_lineno, 3, (int, int, int))
        if len(entries) != nnz:
            raise MatrixMarketError(f"declared {nnz} entries, found {len(entries)}",
                                    entries[-1][0] if entries else size_lineno)
        rows, cols, vals = [], [], []
        for lineno, text in entries:
            i, j, v = _numbers(text, lineno, 3, (int, int, float))
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixMarketError(f"index ({i}, {j}) out of range", lineno)
            if symmetry == "symmetric" and j > i:
                raise MatrixMarketError("symmetric file stores an upper-triangle entry", lineno)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if symmetry == "symmetric" and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(v)
        A = sps.csr_matrix((vals, (rows, cols)), shape=(nrows, ncols))
        A.sort_indices()
        return A

    nrows, ncols = _numbers(size_line, size_lineno, 2, (int, int))
    if symmetry == "symmetric":
        if nrows != ncols:
            raise MatrixMarketError("symmetric array must be square", size_lineno)
        expected = nrows * (nrows + 1) // 2
    else:
        expected = nrows * ncols
    if len(entries) != expected:
        raise MatrixMarketError(f"expected {expected} values, found {len(entries)}",
                                entries[-1][0] if entries else size_lineno)
    vals = [_numbers(text, lineno, 1, (float,))[0] for lineno, text in entries]
    A = np.zeros((nrows, ncols))
    if symmetry == "symmetric":
        it = iter(vals)
        for j in range(ncols):
            for i in range(j, nrows):
                A[i, j] = A[j, i] = next(it)
    else:
        A[:, :] = np.array(vals).reshape((ncols, nrows)).T
    return A


def write_matrix_market(path, A, comment=None, symmetric=False):
    """
    Write ``A`` (sparse -> coordinate, dense -> array) with full float precision.

    ``comment`` lines are written as ``%`` lines after the banner. With
    ``symmetric=True`` only the lower triangle is stored.
    """
    sparse = sps.issparse(A)
    symmetry = "symmetric" if symmetric else "general"
    fmt = "coordinate" if sparse else "array"
    out = [f"%%MatrixMarket matrix {fmt} real {symmetry}"]
    if comment:
        out.extend("%" + ln for ln in str(comment).splitlines())
    if sparse:
        C = sps.coo_matrix(A)
        if symmetric:
            keep = C.row >= C.col
            C = sps.coo_matrix((C.data[keep], (C.row[keep], C.col[keep])), shape=C.shape)
        order = np.lexsort((C.row, C.col))
        out.append(f"{C.shape[0]} {C.shape[1]} {C.nnz}")
        out.extend(f"{C.row[k] + 1} {C.col[k] + 1} {float(C.data[k])!r}" for k in order)
    else:
        A = np.asarray(A, dtype=float)
        out.append(f"{A.shape[0]} {A.shape[1]}")
        for j in range(A.shape[1]):
            start = j if symmetric else 0
            out.extend(repr(float(v)) for v in A[start:, j])
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


load_matrix_market = read_matrix_market
