"""Dense exact matrices over a FieldContext and certified congruence moves."""

from __future__ import annotations

from collections import namedtuple

from .errors import (DimensionMismatch, IndexOutOfRange, MatcanonError,
                     ZeroScale)
from .field import Scalar


class ExactMatrix:
    """Immutable dense matrix of scalars sharing one field context."""

    __slots__ = ("ctx", "nrows", "ncols", "rows")

    def __init__(self, ctx, rows):
        self.ctx = ctx
        rows = tuple(tuple(ctx.scalar(e) if not isinstance(e, Scalar)
                           else e.promote(ctx) for e in row) for row in rows)
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != self.ncols:
                raise DimensionMismatch("ragged rows")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_rows(ctx, entries):
        return ExactMatrix(ctx, entries)

    @staticmethod
    def zeros(ctx, nrows, ncols):
        z = ctx.zero()
        return ExactMatrix(ctx, [[z] * ncols for _ in range(nrows)])

    @staticmethod
    def identity(ctx, n):
        z, o = ctx.zero(), ctx.one()
        return ExactMatrix(ctx, [[o if i == j else z for j in range(n)]
                                 for i in range(n)])

    @staticmethod
    def jordan_block(ctx, n, lam=None):
        """Lower-triangular Jordan block: lam on the diagonal, 1 below it."""
        lam = ctx.zero() if lam is None else ctx.scalar(lam)
        z, o = ctx.zero(), ctx.one()
        rows = []
        for i in range(n):
            row = [z] * n
            row[i] = lam
            if i > 0:
                row[i - 1] = o
            rows.append(row)
        return ExactMatrix(ctx, rows)

    @staticmethod
    def block_diag(ctx, blocks):
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        out = [[ctx.zero()] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.nrows):
                for j in range(b.ncols):
                    out[r + i][c + j] = b.rows[i][j].promote(ctx)
            r += b.nrows
            c += b.ncols
        return ExactMatrix(ctx, out)

    @staticmethod
    def from_columns(ctx, cols):
        if not cols:
            return ExactMatrix.zeros(ctx, 0, 0)
        n = len(cols[0])
        return ExactMatrix(ctx, [[cols[j][i] for j in range(len(cols))]
                                 for i in range(n)])

    # -- basics -------------------------------------------------------------

    def promote(self, ctx):
        if ctx == self.ctx:
            return self
        return ExactMatrix(ctx, self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.nrows != other.nrows or self.ncols != other.ncols:
            return False
        if other.ctx.is_prefix_of(self.ctx):
            ctx = self.ctx
        elif self.ctx.is_prefix_of(other.ctx):
            ctx = other.ctx
        else:
            return False
        a, b = self.promote(ctx), other.promote(ctx)
        return a.rows == b.rows

    def __hash__(self):
        return hash((self.nrows, self.ncols, self.rows))

    def __repr__(self):
        from .field import format_scalar
        body = "; ".join(", ".join(format_scalar(e) for e in row)
                         for row in self.rows)
        return "ExactMatrix[%s]" % body

    def is_square(self):
        return self.nrows == self.ncols

    def is_zero(self):
        return all(e.is_zero() for row in self.rows for e in row)

    # -- arithmetic ---------------------------------------------------------

    def _common(self, other):
        ctx = self.ctx.common(other.ctx)
        return self.promote(ctx), other.promote(ctx), ctx

    def __add__(self, other):
        a, b, ctx = self._common(other)
        if (a.nrows, a.ncols) != (b.nrows, b.ncols):
            raise DimensionMismatch("matrix addition shape mismatch")
        return ExactMatrix(ctx, [[x + y for x, y in zip(r1, r2)]
                                 for r1, r2 in zip(a.rows, b.rows)])

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ExactMatrix(self.ctx, [[-x for x in row] for row in self.rows])

    def scale(self, c):
        c = self.ctx.scalar(c) if not isinstance(c, Scalar) else c
        ctx = self.ctx.common(c.ctx)
        c = c.promote(ctx)
        return ExactMatrix(ctx, [[x.promote(ctx) * c for x in row]
                                 for row in self.rows])

    def __matmul__(self, other):
        a, b, ctx = self._common(other)
        if a.ncols != b.nrows:
            raise DimensionMismatch("matrix product %dx%d @ %dx%d"
                                    % (a.nrows, a.ncols, b.nrows, b.ncols))
        bt = list(zip(*b.rows)) if b.rows else [()] * b.ncols
        z = ctx.zero()
        out = []
        for row in a.rows:
            out_row = []
            for col in bt:
                acc = z
                for x, y in zip(row, col):
                    if not x.is_zero() and not y.is_zero():
                        acc = acc + x * y
                out_row.append(acc)
            out.append(out_row)
        if not out:
            return ExactMatrix.zeros(ctx, a.nrows, b.ncols)
        return ExactMatrix(ctx, out)

    def transpose(self):
        if self.nrows == 0 or self.ncols == 0:
            return ExactMatrix.zeros(self.ctx, self.ncols, self.nrows)
        return ExactMatrix(self.ctx, list(zip(*self.rows)))

    def submatrix(self, row_idx, col_idx):
        return ExactMatrix(self.ctx, [[self.rows[i][j] for j in col_idx]
                                      for i in row_idx])

    def column(self, j):
        return [self.rows[i][j] for i in range(self.nrows)]

    def apply_basis(self, basis_cols):
        """Gram matrix of this form on the given new basis column vectors."""
        x = ExactMatrix.from_columns(self.ctx, basis_cols)
        return x.transpose() @ self @ x, x


InverseRank = namedtuple("InverseRank", "inverse rank kernel")


def inverse_or_rank(a):
    """Exact inverse when full rank, else rank and a right-kernel basis.

    Returns InverseRank(inverse or None, rank, kernel basis as a list of
    column vectors).  Pivots are the first nonzero entry in column order,
    so results are deterministic.
    """
    ctx = a.ctx
    n, m = a.nrows, a.ncols
    work = [list(row) for row in a.rows]
    ident = [[ctx.one() if i == j else ctx.zero() for j in range(n)]
             for i in range(n)] if n == m else None
    piv_cols = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n):
            if not work[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        if ident is not None:
            ident[r], ident[piv] = ident[piv], ident[r]
        inv = work[r][c].inverse()
        work[r] = [x * inv for x in work[r]]
        if ident is not None:
            ident[r] = [x * inv for x in ident[r]]
        for i in range(n):
            if i != r and not work[i][c].is_zero():
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
                if ident is not None:
                    ident[i] = [x - f * y
                                for x, y in zip(ident[i], ident[r])]
        piv_cols.append(c)
        r += 1
        if r == n:
            break
    rank = len(piv_cols)
    kernel = []
    piv_set = set(piv_cols)
    free = [j for j in range(m) if j not in piv_set]
    for fcol in free:
        vec = [ctx.zero()] * m
        vec[fcol] = ctx.one()
        for row_i, pc in enumerate(piv_cols):
            vec[pc] = -work[row_i][fcol]
        kernel.append(vec)
    inverse = None
    if n == m and rank == n:
        inverse = ExactMatrix(ctx, ident)
    return InverseRank(inverse, rank, kernel)


def solve(a, b):
    """Solve a x = b exactly: (particular solution or None, kernel basis).

    b is a list of scalars (one per row of a).
    """
    ctx = a.ctx
    n, m = a.nrows, a.ncols
    work = [list(row) + [ctx.scalar(b[i]) if not isinstance(b[i], Scalar)
                         else b[i].promote(ctx)]
            for i, row in enumerate(a.rows)]
    piv_cols = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n):
            if not work[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = work[r][c].inverse()
        work[r] = [x * inv for x in work[r]]
        for i in range(n):
            if i != r and not work[i][c].is_zero():
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, n):
        if not work[i][m].is_zero():
            return None, _kernel_from(work, piv_cols, m, ctx)
    particular = [ctx.zero()] * m
    for row_i, pc in enumerate(piv_cols):
        particular[pc] = work[row_i][m]
    return particular, _kernel_from(work, piv_cols, m, ctx)


def _kernel_from(work, piv_cols, m, ctx):
    piv_set = set(piv_cols)
    kernel = []
    for fcol in (j for j in range(m) if j not in piv_set):
        vec = [ctx.zero()] * m
        vec[fcol] = ctx.one()
        for row_i, pc in enumerate(piv_cols):
            vec[pc] = -work[row_i][fcol]
        kernel.append(vec)
    return kernel


class WitnessError(MatcanonError):
    pass


class CongruenceWitness:
    """Invertible X with X' * source * X == target, verified on construction."""

    __slots__ = ("x", "source", "target")

    def __init__(self, x, source, target):
        ctx = x.ctx.common(source.ctx.common(target.ctx))
        x, source, target = x.promote(ctx), source.promote(ctx), target.promote(ctx)
        if not (x.is_square() and source.is_square() and target.is_square()):
            raise WitnessError("witness parts must be square")
        if x.transpose() @ source @ x != target:
            raise WitnessError("congruence relation X'AX = B failed")
        if x.nrows and inverse_or_rank(x).inverse is None:
            raise WitnessError("witness matrix is singular")
        self.x = x
        self.source = source
        self.target = target

    @staticmethod
    def identity(a):
        return CongruenceWitness(ExactMatrix.identity(a.ctx, a.nrows), a, a)

    def then(self, other):
        """Compose A->B (self) with B->C (other) into A->C."""
        if self.target != other.source:
            raise WitnessError("witness composition endpoint mismatch")
        return CongruenceWitness(self.x @ other.x, self.source, other.target)

    def invert(self):
        xin = inverse_or_rank(self.x).inverse
        return CongruenceWitness(xin, self.target, self.source)

    def promote(self, ctx):
        return CongruenceWitness(self.x.promote(ctx),
                                 self.source.promote(ctx),
                                 self.target.promote(ctx))


# -- elementary congruence transformations -------------------------------------

AddSym = namedtuple("AddSym", "i j c")      # row/col i += c * row/col j
ScaleSym = namedtuple("ScaleSym", "i c")    # row/col i *= c
SwapSym = namedtuple("SwapSym", "i j")      # swap rows and columns i, j


def elementary_congruence(a, move):
    """Apply one elementary congruence transformation; returns (A', witness)."""
    if not a.is_square():
        raise DimensionMismatch("congruence needs a square matrix")
    n = a.nrows
    ctx = a.ctx
    x = [[ctx.one() if i == j else ctx.zero() for j in range(n)]
         for i in range(n)]
    if isinstance(move, AddSym):
        i, j, c = move
        _check_index(n, i, j)
        if i == j:
            raise IndexOutOfRange("AddSym needs distinct indices")
        c = ctx.scalar(c) if not isinstance(c, Scalar) else c
        ctx2 = ctx.common(c.ctx)
        if ctx2 != ctx:
            x = [[e.promote(ctx2) for e in row] for row in x]
            a = a.promote(ctx2)
            ctx = ctx2
        x[j][i] = c.promote(ctx)
    elif isinstance(move, ScaleSym):
        i, c = move
        _check_index(n, i)
        c = ctx.scalar(c) if not isinstance(c, Scalar) else c
        if c.is_zero():
            raise ZeroScale("cannot scale a basis vector by zero")
        ctx2 = ctx.common(c.ctx)
        if ctx2 != ctx:
            x = [[e.promote(ctx2) for e in row] for row in x]
            a = a.promote(ctx2)
            ctx = ctx2
        x[i][i] = c.promote(ctx)
    elif isinstance(move, SwapSym):
        i, j = move
        _check_index(n, i, j)
        x[i][i] = ctx.zero()
        x[j][j] = ctx.zero()
        x[i][j] = ctx.one()
        x[j][i] = ctx.one()
    else:
        raise TypeError("unknown congruence move %r" % (move,))
    xm = ExactMatrix(ctx, x)
    a2 = xm.transpose() @ a @ xm
    return a2, CongruenceWitness(xm, a, a2)


def _check_index(n, *idx):
    for i in idx:
        if not 0 <= i < n:
            raise IndexOutOfRange("index %d out of range for size %d" % (i, n))


def permutation_matrix(ctx, perm):
    """Congruence matrix moving old basis vector i to new position perm[i]."""
    n = len(perm)
    rows = [[ctx.zero()] * n for _ in range(n)]
    for i, p in enumerate(perm):
        rows[i][p] = ctx.one()
    return ExactMatrix(ctx, rows)
