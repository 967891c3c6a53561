"""Reduction of the eigenvalue +-1 part to canonical indecomposable blocks.

The restricted asymmetry has a single eigenvalue eps in {1, -1}; with
p = sigma - eps nilpotent, the space peels into orthogonal indecomposables:
cyclic "single" blocks (one elementary divisor p^n, found through a vector v
with f(p^{n-1}v, v) != 0) and "pair" blocks (two elementary divisors p^m,
found through a hyperbolic-like pair v, w).  Singles reduce recursively to
the cyclic normal form shared with the Gamma matrices; pairs reduce to
((0, J_m(eps)), (I_m, 0)) via totally isotropic generator repair.
"""

from __future__ import annotations

from collections import namedtuple

from .errors import (HypothesisViolation, InternalDegenerate,
                     NoArtinSchreierRootStrict, NoRootStrictPolicy)
from .exactmat import (CongruenceWitness, ExactMatrix, inverse_or_rank,
                       solve)
from .field import EXTEND, artin_schreier_root_or_adjoin, sqrt_or_adjoin
from .spectral import _hyperbolic_cell, restrict_operator

UnipotentPiece = namedtuple("UnipotentPiece", "kind eps order basis gram")
FreeModuleComponent = namedtuple("FreeModuleComponent",
                                 "eps order basis gram hat_gram pieces")


def alternating_flag(gram):
    """True iff the form is alternating (zero diagonal and skew-symmetric;
    in characteristic 2 skew-symmetric means symmetric)."""
    n = gram.nrows
    for i in range(n):
        if not gram[i, i].is_zero():
            return False
    return gram.transpose() == -gram


# -- peeling indecomposables -----------------------------------------------------

def _beta_matrix(gram, nmat, power):
    """Matrix of (x, y) -> f(p^power x, y) on the current basis."""
    np_ = ExactMatrix.identity(gram.ctx, gram.nrows)
    for _ in range(power):
        np_ = np_ @ nmat
    return np_.transpose() @ gram


def _nilpotency_index(nmat):
    n = nmat.nrows
    power = ExactMatrix.identity(nmat.ctx, n)
    for k in range(n + 1):
        if power.is_zero():
            return k
        power = power @ nmat
    raise InternalDegenerate("operator is not nilpotent")


def split_off_indecomposable(gram, nmat, eps):
    """Split one indecomposable of maximal order off a unipotent part.

    gram is the restricted Gram matrix (non-degenerate), nmat the nilpotent
    p = sigma - eps on the same basis.  Returns (piece, rem_basis, rem_gram,
    rem_nmat) where the piece's basis columns live in the same coordinates.

    When the hat form at the top order is non-alternating, the peeled block
    must be a single AND the remainder must stay non-alternating at that
    order whenever order-r content remains (a non-alternating symmetric
    form diagonalizes completely).  A greedy choice can strand an
    alternating remainder; adding a full-height remainder vector to the
    chosen one repairs it without changing the self-pairing value.
    """
    ctx = gram.ctx
    n = gram.nrows
    r = _nilpotency_index(nmat)
    if r == 0:
        raise InternalDegenerate("empty component")
    beta = _beta_matrix(gram, nmat, r - 1)
    v = _self_pairing_vector(beta, ctx, n)
    if v is not None:
        for _attempt in range(n + 1):
            out = _try_single_split(gram, nmat, eps, v, r)
            if out is not None:
                return out
            v = _repair_single_choice(gram, nmat, v, r)
        raise InternalDegenerate("could not keep the remainder "
                                 "non-alternating")
    v = _height_vector(nmat, r)
    row = _functional(beta, v)
    w = None
    for j in range(n):
        if not row[j].is_zero():
            w = [ctx.zero()] * n
            w[j] = row[j].inverse()
            break
    if w is None:
        raise InternalDegenerate("socle functional vanished on a "
                                 "non-degenerate part")
    chain = _p_chain(nmat, v, r) + _p_chain(nmat, w, r)
    return _finish_split(gram, nmat, eps, "pair", r, chain)


def _finish_split(gram, nmat, eps, piece_kind, r, piece_basis):
    """Build the piece and its two-sided orthogonal complement."""
    ctx = gram.ctx
    n = gram.nrows
    bmat = ExactMatrix.from_columns(ctx, piece_basis)
    piece_gram = bmat.transpose() @ gram @ bmat
    if inverse_or_rank(piece_gram).inverse is None:
        raise InternalDegenerate("peeled piece is degenerate")
    # orthogonal complement: f(U, x) = 0 and f(x, U) = 0
    rows = []
    for u in piece_basis:
        rows.append([sum((u[i] * gram[i, j] for i in range(n)),
                         start=ctx.zero()) for j in range(n)])   # f(u, x)
        rows.append([sum((gram[j, i] * u[i] for i in range(n)),
                         start=ctx.zero()) for j in range(n)])   # f(x, u)
    comp = inverse_or_rank(ExactMatrix(ctx, rows)).kernel
    if len(comp) + len(piece_basis) != n:
        raise InternalDegenerate("complement dimension mismatch")
    if comp:
        cmat = ExactMatrix.from_columns(ctx, comp)
        rem_gram = cmat.transpose() @ gram @ cmat
        rem_nmat = restrict_operator(nmat, comp)
    else:
        rem_gram = ExactMatrix.zeros(ctx, 0, 0)
        rem_nmat = ExactMatrix.zeros(ctx, 0, 0)
    piece = UnipotentPiece(piece_kind, eps, r, piece_basis, piece_gram)
    return piece, comp, rem_gram, rem_nmat


def _try_single_split(gram, nmat, eps, v, r):
    """Split a single block off at v, unless that strands an alternating
    remainder that still has order-r content (then None)."""
    chain = _p_chain(nmat, v, r)
    out = _finish_split(gram, nmat, eps, "single", r, chain)
    _piece, comp, rem_gram, rem_nmat = out
    if not comp:
        return out
    if _nilpotency_index(rem_nmat) < r:
        return out
    beta_rem = _beta_matrix(rem_gram, rem_nmat, r - 1)
    if _self_pairing_vector(beta_rem, rem_gram.ctx, rem_gram.nrows) is None:
        return None
    return out


def _repair_single_choice(gram, nmat, v, r):
    """Add a full-height vector orthogonal to v: the self-pairing value is
    unchanged while the eventual complement regains a non-alternating
    entry."""
    ctx = gram.ctx
    n = gram.nrows
    chain = _p_chain(nmat, v, r)
    rows = []
    for u in chain:
        rows.append([sum((u[i] * gram[i, j] for i in range(n)),
                         start=ctx.zero()) for j in range(n)])
        rows.append([sum((gram[j, i] * u[i] for i in range(n)),
                         start=ctx.zero()) for j in range(n)])
    comp = inverse_or_rank(ExactMatrix(ctx, rows)).kernel
    power = ExactMatrix.identity(ctx, n)
    for _ in range(r - 1):
        power = power @ nmat
    for w in comp:
        image = power @ ExactMatrix.from_columns(ctx, [w])
        if any(not image[i, 0].is_zero() for i in range(n)):
            return [a + b for a, b in zip(v, w)]
    raise InternalDegenerate("no full-height repair vector available")


def _self_pairing_vector(beta, ctx, n):
    """v with beta(v, v) != 0, or None (deterministic search)."""
    for i in range(n):
        if not beta[i, i].is_zero():
            v = [ctx.zero()] * n
            v[i] = ctx.one()
            return v
    if ctx.characteristic != 2:
        for i in range(n):
            for j in range(i + 1, n):
                if not (beta[i, j] + beta[j, i]).is_zero():
                    v = [ctx.zero()] * n
                    v[i] = ctx.one()
                    v[j] = ctx.one()
                    return v
    else:
        # char 2 with zero diagonal: beta(v,v) = sum v_i v_j (b_ij + b_ji);
        # nonzero iff beta is not symmetric
        for i in range(n):
            for j in range(i + 1, n):
                if beta[i, j] != beta[j, i]:
                    v = [ctx.zero()] * n
                    v[i] = ctx.one()
                    v[j] = ctx.one()
                    return v
    return None


def _height_vector(nmat, r):
    """First basis-ish vector of height exactly r (p^{r-1} v != 0)."""
    ctx = nmat.ctx
    n = nmat.nrows
    power = ExactMatrix.identity(ctx, n)
    for _ in range(r - 1):
        power = power @ nmat
    for i in range(n):
        if any(not power[j, i].is_zero() for j in range(n)):
            v = [ctx.zero()] * n
            v[i] = ctx.one()
            return v
    raise InternalDegenerate("no vector of full height")


def _functional(beta, v):
    """Row x -> beta(v, x)."""
    n = beta.nrows
    ctx = beta.ctx
    return [sum((v[i] * beta[i, j] for i in range(n)), start=ctx.zero())
            for j in range(n)]


def _p_chain(nmat, v, length):
    ctx = nmat.ctx
    out = [list(v)]
    cur = v
    for _ in range(length - 1):
        img = nmat @ ExactMatrix.from_columns(ctx, [cur])
        cur = [img[i, 0] for i in range(nmat.nrows)]
        out.append(cur)
    return out


def peel_all(gram, nmat, eps):
    """Peel a unipotent part completely; returns pieces with bases in the
    original coordinates."""
    ctx = gram.ctx
    pieces = []
    base_cols = [_unit(ctx, gram.nrows, i) for i in range(gram.nrows)]
    cur_gram, cur_nmat = gram, nmat
    while cur_gram.nrows:
        piece, comp, rem_gram, rem_nmat = split_off_indecomposable(
            cur_gram, cur_nmat, eps)
        # translate piece basis and the new complement into original coords
        abs_basis = [_combine(base_cols, v) for v in piece.basis]
        pieces.append(UnipotentPiece(piece.kind, eps, piece.order,
                                     abs_basis, piece.gram))
        base_cols = [_combine(base_cols, v) for v in comp]
        cur_gram, cur_nmat = rem_gram, rem_nmat
    return pieces


def _unit(ctx, n, i):
    v = [ctx.zero()] * n
    v[i] = ctx.one()
    return v


def _combine(cols, coeffs):
    ctx = None
    n = len(cols[0]) if cols else 0
    out = None
    for c, col in zip(coeffs, cols):
        term = [c * x for x in col]
        out = term if out is None else [a + b for a, b in zip(out, term)]
    return out if out is not None else []


def filtration(gram, nmat, eps):
    """Group the peeled pieces by order into orthogonal free components."""
    pieces = peel_all(gram, nmat, eps)
    ctx = gram.ctx
    by_order = {}
    for p in pieces:
        by_order.setdefault(p.order, []).append(p)
    comps = []
    for m in sorted(by_order, reverse=True):
        group = by_order[m]
        basis = [v for p in group for v in p.basis]
        bmat = ExactMatrix.from_columns(ctx, basis)
        cgram = bmat.transpose() @ gram @ bmat
        hat = hat_form_from_pieces(gram, nmat, group, m)
        comps.append(FreeModuleComponent(eps, m, basis, cgram, hat, group))
    return comps


def hat_form_from_pieces(gram, nmat, group, m):
    """Gram matrix of the induced form on V_m / p V_m.

    Generators: the cyclic vector of each single piece, both generators of
    each pair piece.  f_hat(u, v) = f(p^{m-1} u, v).
    """
    ctx = gram.ctx
    gens = []
    for p in group:
        if p.kind == "single":
            gens.append(p.basis[0])
        else:
            gens.append(p.basis[0])
            gens.append(p.basis[m])
    n = gram.nrows
    power = ExactMatrix.identity(ctx, n)
    for _ in range(m - 1):
        power = power @ nmat
    rows = []
    for u in gens:
        pu = power @ ExactMatrix.from_columns(ctx, [u])
        row = []
        for v in gens:
            acc = ctx.zero()
            for i in range(n):
                for j in range(n):
                    if not pu[i, 0].is_zero() and not v[j].is_zero():
                        acc = acc + pu[i, 0] * gram[i, j] * v[j]
            row.append(acc)
        rows.append(row)
    hat = ExactMatrix(ctx, rows) if rows else ExactMatrix.zeros(ctx, 0, 0)
    if hat.nrows and inverse_or_rank(hat).inverse is None:
        raise InternalDegenerate("hat form is degenerate")
    return hat


def hat_form(comp):
    """Spec surface: the hat-form Gram matrix of a component."""
    return comp.hat_gram


# -- the cyclic (single elementary divisor) reduction ----------------------------

def _shift(ctx, n):
    return ExactMatrix.jordan_block(ctx, n, 0)


def _sigma_cyclic(ctx, n, eps):
    return ExactMatrix.identity(ctx, n).scale(eps) + _shift(ctx, n)


def _check_cyclic_gram(g, n):
    for a in range(n):
        for b in range(n):
            if a + b >= n and not g[a, b].is_zero():
                raise InternalDegenerate("cyclic gram not skew-triangular")
    for a in range(n):
        if g[a, n - 1 - a].is_zero():
            raise InternalDegenerate("cyclic gram degenerate anti-diagonal")


def canonical_cyclic_gram(ctx, eps, n):
    """The canonical cyclic-basis Gram matrix for one elementary divisor
    (X-eps)^n.

    Built recursively: the inner block is the canonical (n-2) gram; the
    first row is pinned by the compatibility relation G S = G' with
    S = eps I + shift (the matrix of the asymmetry on a cyclic basis), which
    forces rho_{j+1} = -eps * sub[j-1][0]; the first column follows from the
    same relation.  The free diagonal entry is normalized to 0 (or 1 for
    eps = -1 outside characteristic 2, matching the n = 2 base).
    """
    char = ctx.characteristic
    one, zero = ctx.one(), ctx.zero()
    if n == 1:
        return ExactMatrix(ctx, [[1]])
    if char != 2 and eps == -one and n == 2:
        return ExactMatrix(ctx, [[1, 2], [-2, 0]])
    if char == 2 and n == 3:
        return ExactMatrix(ctx, [[0, 0, 1], [1, 1, 0], [1, 0, 0]])
    sub = canonical_cyclic_gram(ctx, eps, n - 2)
    rho = [zero] * n
    rho[0] = one if (char != 2 and eps == -one) else zero
    rho[1] = (one - eps) * rho[0]
    for j in range(1, n - 1):
        rho[j + 1] = -eps * sub[j - 1, 0]
    rows = [[zero] * n for _ in range(n)]
    rows[0] = list(rho)
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            rows[i][j] = sub[i - 1, j - 1]
    for j in range(1, n - 1):
        rows[j][0] = eps * rho[j] + rho[j + 1]
    rows[n - 1][0] = eps * rho[n - 1]
    cg = ExactMatrix(ctx, rows)
    s = _sigma_cyclic(ctx, n, eps)
    if cg @ s != cg.transpose():
        raise InternalDegenerate("canonical cyclic gram is inconsistent")
    _check_cyclic_gram(cg, n)
    return cg


def canon_single(g, eps, n, policy=EXTEND):
    """Reduce a cyclic-basis Gram matrix with single elementary divisor
    (X-eps)^n to the canonical cyclic normal form.

    Returns (x, cg, ctx) with x' g x = cg exactly.
    """
    ctx = g.ctx
    char = ctx.characteristic
    _check_parity(eps, n, char)
    _check_cyclic_gram(g, n)
    if n == 1:
        a = g[0, 0]
        root, ctx2 = sqrt_or_adjoin(a, policy)
        x = ExactMatrix(ctx2, [[root.inverse()]])
        cg = ExactMatrix(ctx2, [[1]])
        return x, cg, ctx2
    if n == 2:
        c = g[0, 0]
        if c.is_zero():
            raise InternalDegenerate("n=2 cyclic gram with zero corner")
        root, ctx2 = sqrt_or_adjoin(c, policy)
        rinv = root.inverse()
        x = ExactMatrix.identity(ctx2, 2).scale(rinv)
        cg = x.transpose() @ g.promote(ctx2) @ x
        expected = canonical_cyclic_gram(ctx2, eps.promote(ctx2), 2)
        if cg != expected:
            raise InternalDegenerate("n=2 normal form mismatch")
        return x, cg, ctx2
    if char == 2 and n == 3:
        return _canon_single_char2_n3(g, policy)
    return _canon_single_step(g, eps, n, policy)


def _check_parity(eps, n, char):
    if char == 2:
        if n % 2 == 0:
            raise HypothesisViolation(
                "characteristic 2 singles must have odd order")
        return
    plus = (eps == eps.ctx.one())
    if plus and n % 2 == 0:
        raise HypothesisViolation("(X-1)^n single needs odd n")
    if not plus and n % 2 == 1:
        raise HypothesisViolation("(X+1)^n single needs even n")


def _canon_single_char2_n3(g, policy):
    ctx = g.ctx
    # scale the anti-diagonal to 1 (characteristic 2: unique square root)
    kappa = g[0, 2]
    root, ctx2 = sqrt_or_adjoin(kappa, policy)
    g = g.promote(ctx2)
    t = root.inverse()
    x1 = ExactMatrix.identity(ctx2, 3).scale(t)
    g1 = x1.transpose() @ g @ x1
    # v' = v + x p v with x^2 + x + g1[0,0] = 0
    a = g1[0, 0]
    try:
        xval, ctx3 = artin_schreier_root_or_adjoin(a, policy)
    except NoRootStrictPolicy as exc:
        raise NoArtinSchreierRootStrict(str(exc))
    g1 = g1.promote(ctx3)
    shift = _shift(ctx3, 3)
    vcoord = [ctx3.one(), xval, ctx3.zero()]
    x2 = _cyclic_basis_matrix(shift, vcoord)
    g2 = x2.transpose() @ g1 @ x2
    expected = ExactMatrix(ctx3, [[0, 0, 1], [1, 1, 0], [1, 0, 0]])
    if g2 != expected:
        raise InternalDegenerate("char-2 n=3 normal form mismatch")
    return x1.promote(ctx3) @ x2, g2, ctx3


def _cyclic_basis_matrix(shift, vcoord):
    """Columns v, pv, p^2 v, ... for the given coordinate vector."""
    ctx = shift.ctx
    n = shift.nrows
    cols = []
    cur = list(vcoord)
    for _ in range(n):
        cols.append(cur)
        img = shift @ ExactMatrix.from_columns(ctx, [cur])
        cur = [img[i, 0] for i in range(n)]
    return ExactMatrix.from_columns(ctx, cols)


def _canon_single_step(g, eps, n, policy):
    """Recursive case of the single reduction (n >= 3, not char-2 n=3)."""
    ctx = g.ctx
    char = ctx.characteristic
    sub_idx = list(range(1, n - 1))
    sub = g.submatrix(sub_idx, sub_idx)
    xs, cg_sub, ctx2 = canon_single(sub, eps.promote(sub.ctx), n - 2, policy)
    g = g.promote(ctx2)
    eps = eps.promote(ctx2)
    shift = _shift(ctx2, n)
    # lift the new sub cyclic vector: coordinates j of the sub basis mean
    # p^{j+1} v, so stripping one p gives sum_j xs[j,0] p^j v
    vcoord = [xs[j, 0] for j in range(n - 2)] + [ctx2.zero(), ctx2.zero()]
    b1 = _cyclic_basis_matrix(shift, vcoord)
    g1 = b1.transpose() @ g @ b1
    if g1.submatrix(sub_idx, sub_idx) != cg_sub:
        raise InternalDegenerate("sub-reduction did not embed")

    cg = canonical_cyclic_gram(ctx2, eps, n)
    plus = (eps == ctx2.one())
    solve_from = 1 if (char != 2 and plus) else 2
    rho0 = cg[0, 0]

    # solve f(u, p^j v1) = cg[0, j] for j = solve_from..n-1
    rows = []
    rhs = []
    for j in range(solve_from, n):
        rows.append([g1[i, j] for i in range(n)])
        rhs.append(cg[0, j])
    part, hom = solve(ExactMatrix(ctx2, rows), rhs)
    if part is None:
        raise InternalDegenerate("cyclic row system inconsistent")
    # adjust f(u,u) = rho0 within the homogeneous freedom
    u = _adjust_self_value(g1, part, hom, rho0, ctx2)

    cols = [u]
    if solve_from == 2:
        # z = p v1 + s p^{n-1} v1 fixing f(u, z) = cg[0, 1]
        e1 = _unit(ctx2, n, 1)
        etop = _unit(ctx2, n, n - 1)
        fu_pv = _bil(g1, u, e1)
        fu_top = _bil(g1, u, etop)
        if fu_top.is_zero():
            raise InternalDegenerate("lost the skew-diagonal entry")
        s = (cg[0, 1] - fu_pv) / fu_top
        z = [a + s * b for a, b in zip(e1, etop)]
        cols.append(z)
        start = 2
    else:
        start = 1
    for j in range(start, n):
        cols.append(_unit(ctx2, n, j))
    x2 = ExactMatrix.from_columns(ctx2, cols)
    out = x2.transpose() @ g1 @ x2
    if out != cg:
        raise InternalDegenerate("single-block normalization mismatch")
    return b1 @ x2, cg, ctx2


def _bil(g, x, y):
    ctx = g.ctx
    acc = ctx.zero()
    for i in range(g.nrows):
        if x[i].is_zero():
            continue
        for j in range(g.ncols):
            if not y[j].is_zero():
                acc = acc + x[i] * g[i, j] * y[j]
    return acc


def _adjust_self_value(g1, part, hom, rho0, ctx):
    """u in part + span(hom) with f(u, u) = rho0."""
    base = _bil(g1, part, part)
    lin = []
    for h in hom:
        lin.append(_bil(g1, part, h) + _bil(g1, h, part))
    quad = [[_bil(g1, hi, hj) for hj in hom] for hi in hom]
    # try pure-linear solutions first: one coefficient at a time
    for i, li in enumerate(lin):
        if not li.is_zero() and quad[i][i].is_zero():
            t = (rho0 - base) / li
            return [a + t * b for a, b in zip(part, hom[i])]
    if base == rho0:
        return list(part)
    # general single-variable quadratic attempts
    for i, li in enumerate(lin):
        qa = quad[i][i]
        if li.is_zero() and qa.is_zero():
            continue
        root = _solve_quadratic_in_field(qa, li, base - rho0, ctx)
        if root is not None:
            t = root
            return [a + t * b for a, b in zip(part, hom[i])]
    raise InternalDegenerate("cannot reach the canonical diagonal value")


def _solve_quadratic_in_field(qa, qb, qc, ctx):
    """Some x with qa x^2 + qb x + qc = 0 in ctx (no extension), or None."""
    if qa.is_zero():
        if qb.is_zero():
            return None if not qc.is_zero() else ctx.zero()
        return -qc / qb
    if ctx.characteristic == 2:
        if qb.is_zero():
            try:
                r, ctx2 = sqrt_or_adjoin(qc / qa, "strict")
            except NoRootStrictPolicy:
                return None
            return r
        try:
            y, _ = artin_schreier_root_or_adjoin(qa * qc / (qb * qb),
                                                 "strict")
        except NoRootStrictPolicy:
            return None
        return qb * y / qa
    disc = qb * qb - 4 * qa * qc
    try:
        r, _ = sqrt_or_adjoin(disc, "strict")
    except NoRootStrictPolicy:
        return None
    return (r - qb) / (2 * qa)


# -- Gamma block matrices and the single-block witness ---------------------------

def gamma_matrix(ctx, n):
    """Gamma_n: the anti-diagonal staircase block (characteristic != 2)."""
    rows = [[ctx.zero()] * n for _ in range(n)]
    for i in range(n):
        v = ctx.scalar((-1) ** (n - 1 - i))
        rows[i][n - 1 - i] = v
        if i >= 1:
            rows[i][n - i] = v
    return ExactMatrix(ctx, rows)


def gamma0_matrix(ctx, n):
    """Gamma_n^0: the characteristic-2 staircase block (n odd)."""
    if n % 2 == 0:
        raise HypothesisViolation("Gamma_n^0 needs odd n")
    rows = [[ctx.zero()] * n for _ in range(n)]
    for i in range(n):
        rows[i][n - 1 - i] = ctx.one()
        if i > (n - 1) // 2:
            rows[i][n - i] = ctx.one()
    return ExactMatrix(ctx, rows)


def _gamma_block(ctx, eps, n):
    if ctx.characteristic == 2:
        return gamma0_matrix(ctx, n)
    return gamma_matrix(ctx, n)


_gamma_reduction_cache = {}


def _gamma_cyclic_reduction(ctx, eps, n, policy):
    """Witness columns (basis matrix) X and context with X' Gamma X = CG."""
    key = (ctx._key, eps.coords, n)
    if key in _gamma_reduction_cache:
        return _gamma_reduction_cache[key]
    gamma = _gamma_block(ctx, eps, n)
    from .spectral import asymmetry
    asym = asymmetry(gamma)
    s = asym.s
    nmat = s - ExactMatrix.identity(ctx, n).scale(eps)
    v = _height_vector(nmat, n)
    bmat = ExactMatrix.from_columns(ctx, _p_chain(nmat, v, n))
    gcyc = bmat.transpose() @ gamma @ bmat
    x, cg, ctx2 = canon_single(gcyc, eps, n, policy)
    result = (bmat.promote(ctx2) @ x, cg, ctx2)
    _gamma_reduction_cache[key] = result
    return result


def reduce_single(g, eps, n, policy=EXTEND):
    """Witness from a single-block cyclic Gram matrix to Gamma_n/Gamma_n^0."""
    x1, cg1, ctx1 = canon_single(g, eps, n, policy)
    eps1 = eps.promote(ctx1)
    xg, cg2, ctx2 = _gamma_cyclic_reduction(ctx1, eps1, n, policy)
    if cg1.promote(ctx2) != cg2:
        raise InternalDegenerate("input and Gamma reductions disagree")
    x = x1.promote(ctx2) @ inverse_or_rank(xg).inverse
    target = _gamma_block(ctx2, eps.promote(ctx2), n)
    witness = CongruenceWitness(x, g.promote(ctx2), target)
    return witness, ctx2


# -- the pair (two equal elementary divisors) reduction --------------------------

def pair_canon(g, eps, m, policy=EXTEND):
    """Reduce a pair-block Gram matrix (basis v, pv, ..., w, pw, ...) to
    ((0, J_m(eps)), (I_m, 0)).

    Returns (x, v_gen, w_gen, ctx): x columns are the new basis, the
    generators are coordinates of the repaired module generators in the
    input basis.
    """
    ctx = g.ctx
    if m == 1:
        a, b = g[0, 1], g[1, 0]
        if not g[0, 0].is_zero() or not g[1, 1].is_zero():
            raise InternalDegenerate("pair base is not alternating")
        if a != eps * b:
            raise InternalDegenerate("pair base asymmetry mismatch")
        binv = b.inverse()
        x = ExactMatrix(ctx, [[ctx.one(), ctx.zero()],
                              [ctx.zero(), binv]])
        out = x.transpose() @ g @ x
        if out != _hyperbolic_cell(ctx, 1, eps):
            raise InternalDegenerate("pair base normalization failed")
        return x, _unit(ctx, 2, 0), [ctx.zero(), binv], ctx

    if m == 2:
        v1 = _unit(ctx, 4, 0)
        w1 = _unit(ctx, 4, 2)
    else:
        sub_idx = (list(range(1, m - 1))
                   + list(range(m + 1, 2 * m - 1)))
        sub = g.submatrix(sub_idx, sub_idx)
        _xs, vg_sub, wg_sub, ctx2 = pair_canon(sub, eps.promote(sub.ctx),
                                               m - 2, policy)
        g = g.promote(ctx2)
        eps = eps.promote(ctx2)
        ctx = ctx2
        # strip one p: sub slot j of the v part is p^{j+1} v
        v1 = [ctx.zero()] * (2 * m)
        w1 = [ctx.zero()] * (2 * m)
        for j in range(m - 2):
            v1[j] = vg_sub[j]
            w1[j] = wg_sub[j]
            v1[m + j] = vg_sub[m - 2 + j]
            w1[m + j] = wg_sub[m - 2 + j]

    shift = ExactMatrix.block_diag(ctx, [_shift(ctx, m), _shift(ctx, m)])
    # repair the v side to a totally isotropic module generator
    duals_w = _module_duals(g, shift, w1, v1, m)
    v1, ctx, g, shift, duals_w, w1 = _repair_generator(
        g, shift, v1, duals_w, w1, eps, m, policy)
    # repair the w side symmetrically
    duals_v = _module_duals(g, shift, v1, w1, m)
    w1, ctx, g, shift, duals_v, v1 = _repair_generator(
        g, shift, w1, duals_v, v1, eps, m, policy)
    _assert_isotropic(g, shift, v1, m)
    _assert_isotropic(g, shift, w1, m)
    # final basis: s_i = p^{m-1-i} v', t_j the duals inside the w' module
    svecs = list(reversed(_p_chain_coords(shift, v1, m)))
    tvecs = _dual_basis_in_module(g, shift, w1, svecs, m)
    x = ExactMatrix.from_columns(ctx, svecs + tvecs)
    out = x.transpose() @ g @ x
    target = _hyperbolic_cell(ctx, m, eps)
    if out != target:
        raise InternalDegenerate("pair normalization mismatch")
    return x, v1, w1, ctx


def _promote_vec(v, ctx):
    return [c.promote(ctx) if c.ctx != ctx else c for c in v]


def _p_chain_coords(shift, v, length):
    ctx = shift.ctx
    out = [list(v)]
    cur = list(v)
    for _ in range(length - 1):
        img = shift @ ExactMatrix.from_columns(ctx, [cur])
        cur = [img[i, 0] for i in range(shift.nrows)]
        out.append(cur)
    return out


def _module_duals(g, shift, gen, other_gen, m):
    """Duals d_0..d_{m-1} inside the module of gen with
    f(d_i, p^j other_gen) = delta_ij."""
    ctx = g.ctx
    chain = _p_chain_coords(shift, gen, m)
    other_chain = _p_chain_coords(shift, other_gen, m)
    pairing = [[_bil(g, chain[l], other_chain[j]) for j in range(m)]
               for l in range(m)]
    pinv = inverse_or_rank(ExactMatrix(ctx, pairing)).inverse
    if pinv is None:
        raise InternalDegenerate("module pairing is degenerate")
    duals = []
    for i in range(m):
        coeff = [pinv[i, l] for l in range(m)]
        vec = [ctx.zero()] * len(gen)
        for l in range(m):
            vec = [a + coeff[l] * b for a, b in zip(vec, chain[l])]
        duals.append(vec)
    return duals


def _repair_generator(g, shift, gen, duals, other_gen, eps, m, policy):
    """Correct gen so that its p-module is totally isotropic.

    duals are d_0, d_1 from the other module (f(d_i, p^j gen) = delta_ij);
    the ansatz is gen' = gen + x0 d_0 + x1 d_1 + x2 p gen.  Conditions
    f(gen', p^j gen') = 0 live only at j = 0, 1.
    """
    ctx = g.ctx
    pgen = _apply(shift, gen)
    dirs = [duals[0]]
    if m >= 2:
        dirs.append(duals[1])
    dirs.append(pgen)
    consts, lins, quads = _expand_conditions(g, shift, gen, dirs, m)
    live = [j for j in range(m)
            if not (consts[j].is_zero()
                    and all(c.is_zero() for c in lins[j])
                    and all(c.is_zero() for row in quads[j] for c in row))]
    if not live:
        return gen, ctx, g, shift, duals, other_gen
    if any(j > 1 for j in live):
        raise InternalDegenerate("isotropy defect beyond the corner")
    coeffs = _solve_corner_system(consts, lins, quads, len(dirs), ctx,
                                  policy)
    if coeffs is None:
        raise InternalDegenerate("corner repair found no solution")
    coeffs, ctx2 = coeffs
    if ctx2 != ctx:
        g = g.promote(ctx2)
        shift = shift.promote(ctx2)
        gen = _promote_vec(gen, ctx2)
        dirs = [_promote_vec(d, ctx2) for d in dirs]
        duals = [_promote_vec(d, ctx2) for d in duals]
        other_gen = _promote_vec(other_gen, ctx2)
        ctx = ctx2
    new = list(gen)
    for c, d in zip(coeffs, dirs):
        new = [a + c * b for a, b in zip(new, d)]
    _assert_isotropic(g, shift, new, m)
    return new, ctx, g, shift, duals, other_gen


def _apply(mat, vec):
    img = mat @ ExactMatrix.from_columns(mat.ctx, [vec])
    return [img[i, 0] for i in range(mat.nrows)]


def _expand_conditions(g, shift, gen, dirs, m):
    """Exact coefficients of f(gen + sum x_i d_i, p^j (same)) in the x_i."""
    ctx = g.ctx
    powers = [None] * m
    cur = ExactMatrix.identity(ctx, g.nrows)
    for j in range(m):
        powers[j] = cur
        cur = cur @ shift
    consts, lins, quads = [], [], []
    k = len(dirs)
    for j in range(m):
        pj = powers[j]
        pj_gen = _apply(pj, gen)
        pj_dirs = [_apply(pj, d) for d in dirs]
        consts.append(_bil(g, gen, pj_gen))
        lins.append([_bil(g, dirs[i], pj_gen) + _bil(g, gen, pj_dirs[i])
                     for i in range(k)])
        quads.append([[_bil(g, dirs[i], pj_dirs[l]) for l in range(k)]
                      for i in range(k)])
    return consts, lins, quads


def _solve_corner_system(consts, lins, quads, k, ctx, policy):
    """Solve the j = 0 and j = 1 corner equations; returns (coeffs, ctx)."""

    def eval_cond(j, xs):
        acc = consts[j]
        for i in range(k):
            acc = acc + lins[j][i] * xs[i]
        for i in range(k):
            for l in range(k):
                acc = acc + quads[j][i][l] * xs[i] * xs[l]
        return acc

    def check(xs, cx):
        return all(eval_cond(j, [x.promote(cx) for x in xs]).is_zero()
                   for j in range(len(consts)))

    zero = ctx.zero()
    candidates = []
    # strategy 1: single-direction solutions for each direction
    for i in range(k):
        sols = _single_var_solutions(quads[0][i][i], lins[0][i], consts[0],
                                     ctx, policy)
        for t, cx in sols:
            xs = [zero.promote(cx)] * k
            xs[i] = t
            candidates.append((xs, cx))
    # strategy 2: solve condition 1 for one direction, then condition 0
    # with another
    if len(consts) > 1:
        for i in range(k):
            sols1 = _single_var_solutions(quads[1][i][i], lins[1][i],
                                          consts[1], ctx, policy)
            for t, cx in sols1:
                for l in range(k):
                    if l == i:
                        continue
                    xs0 = [zero.promote(cx)] * k
                    xs0[i] = t
                    # condition 0 as a polynomial in x_l given x_i = t
                    c0 = eval_cond(0, xs0)
                    lin = (lins[0][l].promote(cx)
                           + (quads[0][i][l] + quads[0][l][i]).promote(cx) * t)
                    qq = quads[0][l][l].promote(cx)
                    sols0 = _single_var_solutions(qq, lin, c0, cx, policy)
                    for t0, cx2 in sols0:
                        xs = [x.promote(cx2) for x in xs0]
                        xs[l] = t0
                        candidates.append((xs, cx2))
    for xs, cx in candidates:
        if check(xs, cx):
            return xs, cx
    return None


def _single_var_solutions(qa, qb, qc, ctx, policy):
    """Solutions of qa x^2 + qb x + qc = 0, possibly extending (char 2)."""
    out = []
    if qa.is_zero() and qb.is_zero():
        if qc.is_zero():
            out.append((ctx.zero(), ctx))
        return out
    if qa.is_zero():
        out.append((-qc / qb, ctx))
        return out
    if ctx.characteristic == 2:
        if qb.is_zero():
            try:
                r, ctx2 = sqrt_or_adjoin(qc / qa, policy)
                out.append((r, ctx2))
            except NoRootStrictPolicy:
                pass
            return out
        try:
            y, ctx2 = artin_schreier_root_or_adjoin(qa * qc / (qb * qb),
                                                    policy)
        except NoRootStrictPolicy as exc:
            raise NoArtinSchreierRootStrict(str(exc))
        out.append((qb.promote(ctx2) * y / qa.promote(ctx2), ctx2))
        return out
    disc = qb * qb - 4 * qa * qc
    try:
        r, ctx2 = sqrt_or_adjoin(disc, policy)
    except NoRootStrictPolicy:
        return out
    two_a = (qa + qa).promote(ctx2)
    out.append(((r - qb.promote(ctx2)) / two_a, ctx2))
    out.append(((-r - qb.promote(ctx2)) / two_a, ctx2))
    return out


def _assert_isotropic(g, shift, gen, m):
    chain = _p_chain_coords(shift, gen, m)
    for a in range(m):
        for b in range(m):
            if not _bil(g, chain[a], chain[b]).is_zero():
                raise InternalDegenerate("module is not totally isotropic")


def _dual_basis_in_module(g, shift, gen, svecs, m):
    """t_j inside the gen-module with f(t_j, s_i) = delta_ij."""
    ctx = g.ctx
    chain = _p_chain_coords(shift, gen, m)
    pairing = [[_bil(g, chain[l], svecs[i]) for i in range(m)]
               for l in range(m)]
    pinv = inverse_or_rank(ExactMatrix(ctx, pairing)).inverse
    if pinv is None:
        raise InternalDegenerate("dual pairing is degenerate")
    out = []
    for j in range(m):
        vec = [ctx.zero()] * len(gen)
        for l in range(m):
            vec = [a + pinv[j, l] * b for a, b in zip(vec, chain[l])]
        out.append(vec)
    return out


def reduce_pair(g, eps, m, policy=EXTEND):
    """Witness from a pair-block Gram matrix to ((0, J_m(eps)), (I_m, 0))."""
    x, _vg, _wg, ctx = pair_canon(g, eps, m, policy)
    target = _hyperbolic_cell(ctx, m, eps.promote(ctx))
    witness = CongruenceWitness(x, g.promote(ctx), target)
    return witness, ctx
