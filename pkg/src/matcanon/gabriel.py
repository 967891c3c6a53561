"""Congruence decomposition into 0-Jordan blocks plus an invertible core.

Every square matrix is congruent to a direct sum of 0-Jordan blocks J_k and
an invertible core.  The construction peels the radical as J_1 blocks, then
reduces a singular zero-radical matrix to a three-block state

    basis (P, Q, K):   [[M, 0, 0],
                        [E, 0, 0],
                        [0, I, 0]]

where K spans the right kernel.  Decomposing M recursively and clearing E
against the row space of M leaves each (q_i, k_i) pair either attached to
the end of one Jordan chain of M (growing it by two) or detached as a J_2
block.  All steps are explicit congruences; the final witness is verified
exactly.
"""

from __future__ import annotations

from collections import namedtuple

from .errors import InternalDegenerate
from .exactmat import (CongruenceWitness, ExactMatrix, inverse_or_rank,
                       permutation_matrix, solve)

GabrielDecomposition = namedtuple("GabrielDecomposition",
                                  "jordan_sizes core witness")

InvertibleSplit = namedtuple("InvertibleSplit",
                             "degenerate invertible witness")


def gabriel_decompose(a):
    """Decompose A up to congruence as (0-Jordan blocks) + invertible core."""
    if not a.is_square():
        raise InternalDegenerate("gabriel_decompose needs a square matrix")
    sizes, core, x = _decompose(a)
    target = _assemble_target(a.ctx, sizes, core)
    witness = CongruenceWitness(x, a, target)
    return GabrielDecomposition(sizes, core, witness)


def is_invertible_splittable(b):
    """Split B = degenerate ⊕ invertible when an invertible part exists."""
    dec = gabriel_decompose(b)
    if dec.core.nrows == 0:
        return None
    ctx = b.ctx
    degen = ExactMatrix.block_diag(
        ctx, [ExactMatrix.jordan_block(ctx, s) for s in dec.jordan_sizes])
    return InvertibleSplit(degen, dec.core, dec.witness)


def _assemble_target(ctx, sizes, core):
    blocks = [ExactMatrix.jordan_block(core.ctx, s) for s in sizes]
    blocks.append(core)
    return ExactMatrix.block_diag(core.ctx, blocks)


def _decompose(a):
    """Worker: returns (sizes desc-sorted, core, X) with X'AX in block form."""
    ctx = a.ctx
    n = a.nrows
    ident = ExactMatrix.identity(ctx, n)
    if n == 0:
        return [], a, ident

    # 1. split the radical: rows and columns annihilated both ways
    stacked = ExactMatrix(ctx, list(a.rows) + list(a.transpose().rows))
    rad = inverse_or_rank(stacked).kernel
    if rad:
        basis = _extend_to_basis(ctx, rad, n)
        x0 = ExactMatrix.from_columns(ctx, basis)
        a1 = x0.transpose() @ a @ x0
        r0 = len(rad)
        if not a1.submatrix(range(r0), range(n)).is_zero() or \
           not a1.submatrix(range(n), range(r0)).is_zero():
            raise InternalDegenerate("radical split failed")
        comp_idx = list(range(r0, n))
        a2 = a1.submatrix(comp_idx, comp_idx)
        sizes2, core2, x2 = _decompose(a2)
        lifted = ExactMatrix.block_diag(ctx, [ExactMatrix.identity(ctx, r0),
                                              x2])
        x_total = x0 @ lifted
        # current layout: r0 J_1 blocks, then sizes2 blocks, then core
        sizes, perm = _sorted_layout(n, [1] * r0 + sizes2,
                                     core2.nrows,
                                     order=[1] * r0 + sizes2)
        pm = permutation_matrix(ctx, perm)
        return sizes, core2, x_total @ pm

    res = inverse_or_rank(a)
    if res.inverse is not None:
        return [], a, ident

    # 2. singular with zero radical: build the (P, Q, K) state
    k = len(res.kernel)
    d = n - 2 * k
    if d < 0:
        raise InternalDegenerate("kernel too large for a zero-radical matrix")
    basis = _extend_to_basis(ctx, res.kernel, n, kernel_last=True)
    x_acc = ExactMatrix.from_columns(ctx, basis)
    g = x_acc.transpose() @ a @ x_acc

    # column-reduce the K-row block N (k x (n-k)) to [0 | I_k]
    nb = g.submatrix(range(n - k, n), range(n - k))
    r0 = _reduce_columns(nb)
    x_step = ExactMatrix.block_diag(ctx, [r0, ExactMatrix.identity(ctx, k)])
    x_acc = x_acc @ x_step
    g = x_step.transpose() @ g @ x_step

    p_idx = list(range(d))
    q_idx = list(range(d, d + k))
    k_idx = list(range(d + k, n))

    # clear the (P,Q) block by subtracting K-vectors from P-vectors,
    # and the (Q,Q) block by adding K-vectors to Q-vectors
    x_step = _clear_pq_qq(ctx, g, p_idx, q_idx, k_idx)
    x_acc = x_acc @ x_step
    g = x_step.transpose() @ g @ x_step
    _check_state(g, p_idx, q_idx, k_idx)

    # 3. recurse on M = (P,P)
    m = g.submatrix(p_idx, p_idx)
    sizes_m, core_m, xm = _decompose(m)
    x_step = ExactMatrix.block_diag(ctx, [xm, ExactMatrix.identity(ctx, 2 * k)])
    x_acc = x_acc @ x_step
    g = x_step.transpose() @ g @ x_step

    # 4. clear E = (Q,P) down to end-of-chain columns via q_i += t_i . P,
    #    then restore the (P,Q)/(Q,Q) zeros
    ends = []
    off = 0
    for s in sizes_m:
        ends.append(off + s - 1)
        off += s
    m2 = g.submatrix(p_idx, p_idx)
    e_block = g.submatrix(q_idx, p_idx)
    t_rows = _split_off_rowspace(m2, e_block, ends)
    if t_rows is not None:
        x_step = _identity_rows(ctx, n)
        for i, ti in enumerate(t_rows):
            for aa, c in enumerate(ti):
                # q_i += c * p_a  (columns of X are new basis vectors)
                x_step[aa][d + i] = x_step[aa][d + i] + c
        x_step = ExactMatrix(ctx, x_step)
        x_acc = x_acc @ x_step
        g = x_step.transpose() @ g @ x_step
        x_step = _clear_pq_qq(ctx, g, p_idx, q_idx, k_idx)
        x_acc = x_acc @ x_step
        g = x_step.transpose() @ g @ x_step
        _check_state(g, p_idx, q_idx, k_idx)

    # 5. row-reduce the end-column block of E to [[I_s],[0]] over Q (paired
    #    with the inverse-transpose on K to keep the (K,Q) identity)
    e_hat = [[g[d + i, j] for j in ends] for i in range(k)]
    s_mat = _full_column_rank_reducer(ctx, e_hat, k)
    s_inv_t = inverse_or_rank(s_mat.transpose()).inverse
    x_step = ExactMatrix.block_diag(ctx, [ExactMatrix.identity(ctx, d),
                                          s_mat, s_inv_t])
    x_acc = x_acc @ x_step
    g = x_step.transpose() @ g @ x_step

    s = len(ends)
    for i in range(k):
        for col, j in enumerate(ends):
            want = ctx.one() if i == col else ctx.zero()
            if g[d + i, j] != want:
                raise InternalDegenerate("end-column normalization failed")

    # 6. permute into chains + detached pairs + core
    chain_sizes = [sz + 2 for sz in sizes_m] + [2] * (k - s)
    perm = [0] * n
    pos = 0
    off = 0
    for b, sz in enumerate(sizes_m):
        for j in range(sz):
            perm[off + j] = pos + j
        perm[d + b] = pos + sz          # q_b
        perm[d + k + b] = pos + sz + 1  # k_b
        pos += sz + 2
        off += sz
    for j in range(s, k):  # detached pairs
        perm[d + j] = pos
        perm[d + k + j] = pos + 1
        pos += 2
    core_off = d - core_m.nrows
    for j in range(core_m.nrows):
        perm[core_off + j] = pos + j
    pm = permutation_matrix(ctx, perm)
    x_acc = x_acc @ pm
    g = pm.transpose() @ g @ pm

    sizes, perm2 = _sorted_layout(n, chain_sizes, core_m.nrows,
                                  order=chain_sizes)
    pm2 = permutation_matrix(ctx, perm2)
    x_acc = x_acc @ pm2
    return sizes, core_m, x_acc


def _identity_rows(ctx, n):
    return [[ctx.one() if i == j else ctx.zero() for j in range(n)]
            for i in range(n)]


def _extend_to_basis(ctx, cols, n, kernel_last=False):
    """Extend independent columns to a basis with unit vectors (greedy)."""
    chosen = [list(c) for c in cols]
    for i in range(n):
        if len(chosen) == n:
            break
        unit = [ctx.zero()] * n
        unit[i] = ctx.one()
        trial = ExactMatrix.from_columns(ctx, chosen + [unit])
        if inverse_or_rank(trial).rank == len(chosen) + 1:
            chosen.append(unit)
    if len(chosen) != n:
        raise InternalDegenerate("could not extend to a basis")
    extension = chosen[len(cols):]
    if kernel_last:
        return extension + [list(c) for c in cols]
    return [list(c) for c in cols] + extension


def _reduce_columns(nb):
    """R with NB @ R = [0 | I_k]; NB is k x m with full row rank k."""
    ctx = nb.ctx
    k, m = nb.nrows, nb.ncols
    piv = []
    for j in range(m):
        if len(piv) == k:
            break
        trial = nb.submatrix(range(k), piv + [j])
        if inverse_or_rank(trial).rank == len(piv) + 1:
            piv.append(j)
    if len(piv) != k:
        raise InternalDegenerate("kernel rows are not full rank "
                                 "(radical was nonzero?)")
    piv_block = nb.submatrix(range(k), piv)
    piv_inv = inverse_or_rank(piv_block).inverse
    free = [j for j in range(m) if j not in piv]
    cols = []
    for f in free:
        rhs = [nb[i, f] for i in range(k)]
        coeffs = [sum((piv_inv[i, t] * rhs[t] for t in range(k)),
                      start=ctx.zero()) for i in range(k)]
        v = [ctx.zero()] * m
        v[f] = ctx.one()
        for i, pj in enumerate(piv):
            v[pj] = v[pj] - coeffs[i]
        cols.append(v)
    for j in range(k):
        v = [ctx.zero()] * m
        for i, pj in enumerate(piv):
            v[pj] = piv_inv[i, j]
        cols.append(v)
    return ExactMatrix.from_columns(ctx, cols)


def _clear_pq_qq(ctx, g, p_idx, q_idx, k_idx):
    """One congruence clearing the (P,Q) and (Q,Q) blocks against K."""
    n = g.nrows
    x = _identity_rows(ctx, n)
    # p_a -= sum_j (P,Q)[a,j] k_j
    for ai, a_ in enumerate(p_idx):
        for ji, j_ in enumerate(q_idx):
            c = g[a_, j_]
            if not c.is_zero():
                x[k_idx[ji]][a_] = x[k_idx[ji]][a_] - c
    # q_i += sum_l C[i,l] k_l with C = -(Q,Q)
    for ii, i_ in enumerate(q_idx):
        for li, l_ in enumerate(q_idx):
            c = g[i_, l_]
            if not c.is_zero():
                x[k_idx[li]][i_] = x[k_idx[li]][i_] - c
    return ExactMatrix(ctx, x)


def _check_state(g, p_idx, q_idx, k_idx):
    ctx = g.ctx
    zero, one = ctx.zero(), ctx.one()
    for i in q_idx:
        for j in q_idx + k_idx:
            if g[i, j] != zero:
                raise InternalDegenerate("(Q,Q)/(Q,K) block not clear")
    for i in p_idx:
        for j in q_idx + k_idx:
            if g[i, j] != zero:
                raise InternalDegenerate("(P,Q)/(P,K) block not clear")
    for ii, i in enumerate(k_idx):
        for j in p_idx + k_idx:
            if g[i, j] != zero:
                raise InternalDegenerate("(K,P)/(K,K) block not clear")
        for jj, j in enumerate(q_idx):
            if g[i, j] != (one if ii == jj else zero):
                raise InternalDegenerate("(K,Q) block is not the identity")


def _split_off_rowspace(m2, e_block, ends):
    """Rows t_i with e_i - t_i M2 supported on the end columns, or None."""
    ctx = m2.ctx
    d = m2.nrows
    k = e_block.nrows
    if d == 0 or k == 0:
        return None
    # unknowns: t (d coefficients) plus residues on end columns
    # equations: t' M2 + r . ends = e_i  as row vectors
    cols = [[m2[a, c] for c in range(d)] for a in range(d)]  # rows of M2
    sys_cols = [list(row) for row in cols]
    for e in ends:
        unit = [ctx.zero()] * d
        unit[e] = ctx.one()
        sys_cols.append(unit)
    sys_matrix = ExactMatrix.from_columns(ctx, sys_cols)
    t_rows = []
    for i in range(k):
        rhs = [e_block[i, c] for c in range(d)]
        part, _hom = solve(sys_matrix, rhs)
        if part is None:
            raise InternalDegenerate("row space split failed")
        t_rows.append([-part[a] for a in range(d)])
    return t_rows


def _full_column_rank_reducer(ctx, e_hat, k):
    """S with S' @ E_hat = [[I_s],[0]]; E_hat is k x s of full column rank."""
    s = len(e_hat[0]) if e_hat else 0
    if s == 0:
        return ExactMatrix.identity(ctx, k)
    work = [list(r) for r in e_hat]
    trans = _identity_rows(ctx, k)
    r = 0
    for c in range(s):
        piv = None
        for i in range(r, k):
            if not work[i][c].is_zero():
                piv = i
                break
        if piv is None:
            raise InternalDegenerate("attachment matrix lost column rank")
        work[r], work[piv] = work[piv], work[r]
        trans[r], trans[piv] = trans[piv], trans[r]
        inv = work[r][c].inverse()
        work[r] = [x * inv for x in work[r]]
        trans[r] = [x * inv for x in trans[r]]
        for i in range(k):
            if i != r and not work[i][c].is_zero():
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
                trans[i] = [x - f * y for x, y in zip(trans[i], trans[r])]
        r += 1
    # trans @ e_hat = [[I],[0]]; the congruence needs S with S' = trans
    return ExactMatrix(ctx, trans).transpose()


def _sorted_layout(n, sizes, core_dim, order):
    """Permutation moving blocks laid out in `order` into descending order.

    Returns (sorted sizes, permutation list for permutation_matrix).
    The core stays at the end.
    """
    tagged = sorted(range(len(order)), key=lambda i: (-order[i], i))
    starts = []
    pos = 0
    for sz in order:
        starts.append(pos)
        pos += sz
    perm = [0] * n
    new_pos = 0
    for i in tagged:
        for j in range(order[i]):
            perm[starts[i] + j] = new_pos + j
        new_pos += order[i]
    for j in range(core_dim):
        perm[pos + j] = new_pos + j
    return [order[i] for i in tagged], perm
