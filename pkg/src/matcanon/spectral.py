"""Asymmetry of a non-degenerate form and its eigenvalue-based splitting.

For invertible A the asymmetry is S = A^{-1} A'.  Its minimal polynomial is
split into linear factors (extending the field by quadratic or
Artin-Schreier adjunctions when allowed); the space then decomposes into
generalized eigenspaces, orthogonal except for the pairing of V_lam with
V_{1/lam}.  Paired classes reduce to hyperbolic blocks ((0, J_m(lam)), (I, 0)).
"""

from __future__ import annotations

import math
from collections import namedtuple
from fractions import Fraction

from .errors import (BudgetExceeded, DegenerateRestriction,
                     InternalDegenerate, NoRootStrictPolicy, NotSplit,
                     SingularInput)
from .exactmat import (CongruenceWitness, ExactMatrix, inverse_or_rank,
                       permutation_matrix, solve)
from .field import (EXTEND, artin_schreier_root_or_adjoin, canonical_compare,
                    sqrt_or_adjoin)

_ENUM_GUARD = 1 << 16
_TRIAL_BUDGET = 2_000_000


class Asymmetry:
    """S = A^{-1}A' with its minimal polynomial and (optional) split roots."""

    def __init__(self, s, min_poly, ctx, split_roots=None):
        self.s = s
        self.min_poly = min_poly      # monic, low-to-high Scalar coefficients
        self.ctx = ctx
        self.split_roots = split_roots  # list of (root, multiplicity) or None


def asymmetry(a):
    """Asymmetry of an invertible Gram matrix, with exact minimal polynomial."""
    inv = inverse_or_rank(a).inverse
    if inv is None:
        raise SingularInput("asymmetry needs an invertible Gram matrix")
    s = inv @ a.transpose()
    return Asymmetry(s, _minimal_polynomial(s), a.ctx)


def _minimal_polynomial(s):
    """Monic minimal polynomial by linear dependence of I, S, S^2, ..."""
    ctx = s.ctx
    n = s.nrows
    if n == 0:
        return [ctx.one()]
    tracker = _EchelonTracker(ctx, n * n)
    power = ExactMatrix.identity(ctx, n)
    powers_flat = []
    k = 0
    while True:
        flat = [power[i, j] for i in range(n) for j in range(n)]
        powers_flat.append(flat)
        combo = tracker.add(flat)
        if combo is not None:
            # sum_j combo[j] * S^j = 0 with combo[k] = 1 (monic)
            return combo
        power = power @ s
        k += 1
        if k > n:
            raise InternalDegenerate("minimal polynomial search ran away")


class _EchelonTracker:
    """Incremental echelon basis that reports the dependence combination."""

    def __init__(self, ctx, width):
        self.ctx = ctx
        self.width = width
        self.rows = []    # reduced vectors
        self.combos = []  # their expressions in the original inputs
        self.pivots = []
        self.count = 0

    def add(self, vec):
        """Insert a vector; returns the dependence combo or None if free."""
        ctx = self.ctx
        vec = list(vec)
        combo = [ctx.zero()] * self.count + [ctx.one()]
        for row, rcombo, piv in zip(self.rows, self.combos, self.pivots):
            if not vec[piv].is_zero():
                f = vec[piv]
                vec = [x - f * y for x, y in zip(vec, row)]
                combo = _poly_sub(ctx, combo, [f * y for y in rcombo])
        piv = next((i for i, x in enumerate(vec) if not x.is_zero()), None)
        self.count += 1
        if piv is None:
            return _poly_trim(ctx, combo)
        inv = vec[piv].inverse()
        self.rows.append([x * inv for x in vec])
        self.combos.append([x * inv for x in combo])
        self.pivots.append(piv)
        return None


# -- small polynomial helpers (coefficients low-to-high) -------------------------

def _poly_trim(ctx, p):
    if not p:
        return [ctx.zero()]
    while len(p) > 1 and p[-1].is_zero():
        p = p[:-1]
    return p


def _poly_sub(ctx, p, q):
    n = max(len(p), len(q))
    z = ctx.zero()
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else z
        b = q[i] if i < len(q) else z
        out.append(a - b)
    return out


def poly_eval(p, x):
    acc = x.ctx.zero()
    for c in reversed(p):
        acc = acc * x + c.promote(x.ctx)
    return acc


def poly_divmod_linear(ctx, p, root):
    """Divide p by (X - root); returns (quotient, remainder scalar)."""
    q = [ctx.zero()] * (len(p) - 1)
    acc = ctx.zero()
    for i in range(len(p) - 1, -1, -1):
        if i == len(p) - 1:
            acc = p[i]
        else:
            acc = p[i] + acc * root
        if i > 0:
            q[i - 1] = acc
    rem = acc
    return q, rem


def _promote_poly(p, ctx):
    return [c.promote(ctx) for c in p]


# -- root finding ------------------------------------------------------------------

def split_min_poly(asym, policy=EXTEND):
    """Factor the minimal polynomial into linear factors, extending if allowed.

    Returns a new Asymmetry with split_roots filled and a possibly larger
    context.  Raises NotSplit when a factor cannot be reached by quadratic
    (or Artin-Schreier) adjunctions or the policy forbids extending.
    """
    ctx = asym.ctx
    work = list(asym.min_poly)
    roots = []
    while len(work) >= 2:
        root, ctx = _find_one_root(work, ctx, policy)
        work = _promote_poly(work, ctx)
        work, mult = _extract_root(ctx, work, root)
        if mult == 0:
            raise InternalDegenerate("claimed root does not divide")
        roots.append((root, mult))
        # keep the remaining factor inversion-closed: the partner 1/root
        # lives in the same tower, so peel it now
        partner = root.inverse()
        if partner != root and len(work) > 1 \
                and poly_eval(work, partner).is_zero():
            work, mult2 = _extract_root(ctx, work, partner)
            roots.append((partner, mult2))
    roots = [(r.promote(ctx), m) for r, m in roots]
    _check_inverse_closed(roots, ctx)
    return Asymmetry(asym.s.promote(ctx), _promote_poly(asym.min_poly, ctx),
                     ctx, split_roots=roots)


def _extract_root(ctx, work, root):
    mult = 0
    while len(work) > 1:
        q, rem = poly_divmod_linear(ctx, work, root)
        if not rem.is_zero():
            break
        work = q
        mult += 1
    return work, mult


def _check_inverse_closed(roots, ctx):
    for r, m in roots:
        rinv = r.inverse()
        found = [(s, k) for s, k in roots if s == rinv]
        if not found or found[0][1] != m:
            raise InternalDegenerate(
                "asymmetry roots are not closed under inversion")


def _find_one_root(poly, ctx, policy):
    """One root of a monic polynomial, adjoining if needed; (root, ctx)."""
    if len(poly) == 2:
        return -poly[0] / poly[1], ctx
    # cheap candidates first
    for cand in (ctx.one(), -ctx.one()):
        if poly_eval(poly, cand).is_zero():
            return cand, ctx
    if ctx.kind != "rational":
        if _finite_field_has_root(poly, ctx):
            order = ctx.order()
            if order > _ENUM_GUARD:
                raise BudgetExceeded(
                    "field of order %d too large to locate a root" % order)
            for cand in ctx.iter_elements():
                if poly_eval(poly, cand).is_zero():
                    return cand, ctx
            raise InternalDegenerate("root existence test disagrees with "
                                     "enumeration")
    else:
        if all(all(c.ctx._bis_zero(v) for v in c.coords[1:])
               for c in poly):
            cand = _rational_root(poly, ctx)
            if cand is not None:
                return cand, ctx
    if len(poly) == 3:
        return _quadratic_root(poly, ctx, policy)
    pal = _palindrome_transform(poly, ctx)
    if pal is not None:
        mu, ctx2 = _find_one_root(pal, ctx, policy)
        # X^2 - mu X + 1 = 0
        quad = [ctx2.one(), -mu, ctx2.one()]
        return _quadratic_root(quad, ctx2, policy)
    raise NotSplit("irreducible factor of degree %d is not reachable by "
                   "quadratic adjunctions" % (len(poly) - 1))


def _finite_field_has_root(poly, ctx):
    """Whether a monic polynomial has a root in the finite field ctx.

    gcd(X^q - X, f) is nontrivial exactly when f has a root in GF(q);
    X^q mod f comes from square-and-multiply in the quotient ring, so the
    test works for any field order.
    """
    q = ctx.order()
    f = [c / poly[-1] for c in poly]
    # X^q mod f
    xq = _poly_powmod_x(ctx, q, f)
    # gcd(xq - X, f)
    diff = _poly_trim(ctx, _poly_sub(ctx, xq, [ctx.zero(), ctx.one()]))
    return len(_poly_gcd(ctx, f, diff)) > 1


def _poly_mulmod(ctx, a, b, f):
    n = len(f) - 1
    out = [ctx.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    # reduce modulo monic f
    for i in range(len(out) - 1, n - 1, -1):
        c = out[i]
        if c.is_zero():
            continue
        out[i] = ctx.zero()
        for j in range(n):
            out[i - n + j] = out[i - n + j] - c * f[j]
    return _poly_trim(ctx, out[:n] if len(out) > n else out)


def _poly_powmod_x(ctx, e, f):
    result = [ctx.one()]
    base = [ctx.zero(), ctx.one()]
    while e:
        if e & 1:
            result = _poly_mulmod(ctx, result, base, f)
        base = _poly_mulmod(ctx, base, base, f)
        e >>= 1
    return result


def _poly_gcd(ctx, a, b):
    a = _poly_trim(ctx, list(a))
    b = _poly_trim(ctx, list(b))
    while not (len(b) == 1 and b[0].is_zero()):
        a, b = b, _poly_mod(ctx, a, b)
    if not a[-1].is_zero():
        a = [c / a[-1] for c in a]
    return a


def _poly_mod(ctx, a, b):
    a = _poly_trim(ctx, list(a))
    while len(a) >= len(b) and not (len(a) == 1 and a[0].is_zero()):
        c = a[-1] / b[-1]
        off = len(a) - len(b)
        for j in range(len(b)):
            a[off + j] = a[off + j] - c * b[j]
        a = _poly_trim(ctx, a[:-1])  # the top coefficient cancelled
    return a


def _quadratic_root(poly, ctx, policy):
    """Root of a monic quadratic, adjoining a square root if needed."""
    c0, c1 = poly[0] / poly[2], poly[1] / poly[2]
    if ctx.characteristic == 2:
        if c1.is_zero():
            r, ctx2 = sqrt_or_adjoin(c0, policy)  # X^2 = c0 (char 2: -c0=c0)
            return r, ctx2
        # X = c1*Y turns X^2 + c1 X + c0 into Y^2 + Y + c0/c1^2
        a = c0 / (c1 * c1)
        try:
            y, ctx2 = artin_schreier_root_or_adjoin(a, policy)
        except NoRootStrictPolicy:
            raise NotSplit("quadratic factor needs an Artin-Schreier "
                           "extension under strict policy")
        return c1.promote(ctx2) * y, ctx2
    disc = c1 * c1 - 4 * c0
    try:
        r, ctx2 = sqrt_or_adjoin(disc, policy)
    except NoRootStrictPolicy:
        raise NotSplit("quadratic factor has non-square discriminant "
                       "under strict policy")
    two_inv = ctx2.scalar(2).inverse()
    return (r - c1.promote(ctx2)) * two_inv, ctx2


def _poly_add(ctx, p, q):
    return _poly_sub(ctx, p, [-c for c in q])


def _palindrome_transform(poly, ctx):
    """g with poly(X) = X^k g(X + 1/X) when poly is palindromic, else None."""
    n = len(poly) - 1
    if n % 2 != 0:
        return None
    if any(poly[i] != poly[n - i] for i in range(n + 1)):
        return None
    k = n // 2
    # P_j(Y) = X^j + X^-j: P_0 = 2, P_1 = Y, P_j = Y P_{j-1} - P_{j-2}
    z, o = ctx.zero(), ctx.one()
    p_prev = [ctx.scalar(2)]
    p_cur = [z, o]
    g = [poly[k]]
    for j in range(1, k + 1):
        if j > 1:
            shifted = [z] + list(p_cur)
            p_prev, p_cur = p_cur, _poly_sub(ctx, shifted, p_prev)
        g = _poly_add(ctx, g, [poly[k + j] * c for c in p_cur])
    return _poly_trim(ctx, g)


def _rational_root(poly, ctx):
    """A rational root of a monic poly with rational coefficients, or None."""
    fracs = [c.coords[0] for c in poly]
    lcm = 1
    for f in fracs:
        lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
    ints = [int(f * lcm) for f in fracs]
    a0, alead = ints[0], ints[-1]
    if a0 == 0:
        return ctx.zero()
    ps = _divisors(abs(a0))
    qs = _divisors(abs(alead))
    for q in qs:
        for p in ps:
            if math.gcd(p, q) != 1:
                continue
            for cand in (Fraction(p, q), Fraction(-p, q)):
                x = ctx.scalar(cand)
                if poly_eval(poly, x).is_zero():
                    return x
    return None


def _divisors(n):
    if n > _TRIAL_BUDGET ** 2:
        raise BudgetExceeded("integer too large for trial factoring")
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


# -- eigen splitting -----------------------------------------------------------------

UnipotentClass = namedtuple("UnipotentClass", "eigenvalue basis")
PairClass = namedtuple("PairClass", "lam lam_inv basis_lam basis_inv")
EigenSplit = namedtuple("EigenSplit", "classes witness gram")


def eigen_split(a, asym):
    """Split into unipotent classes (eigenvalue +-1) and hyperbolic pairs.

    Returns EigenSplit(classes, witness, gram) where gram is the Gram matrix
    in the new basis (block diagonal across classes) and the witness carries
    A -> gram.
    """
    if asym.split_roots is None:
        raise InternalDegenerate("eigen_split needs split_roots")
    ctx = asym.ctx
    a = a.promote(ctx)
    s = asym.s.promote(ctx)
    n = a.nrows
    one = ctx.one()
    roots = [r for r, _m in asym.split_roots]

    def gen_eigenspace(lam):
        # the min-poly multiplicity bounds the nilpotency index on V_lam
        expo = next((m for r, m in asym.split_roots if r == lam), n)
        m = s - ExactMatrix.identity(ctx, n).scale(lam)
        power = ExactMatrix.identity(ctx, n)
        for _ in range(expo):
            power = power @ m
        return inverse_or_rank(power).kernel

    unipotent = []
    for eps in (one, -one):
        if any(r == eps for r in roots):
            basis = gen_eigenspace(eps)
            unipotent.append(UnipotentClass(eps, basis))
            if ctx.characteristic == 2:
                break  # +1 and -1 coincide
    paired = []
    seen = []
    for r in roots:
        if r == one or r == -one or any(r == s_ for s_ in seen):
            continue
        rinv = r.inverse()
        rep = r if canonical_compare(r, rinv) <= 0 else rinv
        other = rinv if rep == r else r
        seen.extend([r, rinv])
        paired.append((rep, other))
    paired.sort(key=lambda pr: _sort_key(pr[0]))
    classes = list(unipotent)
    for rep, other in paired:
        classes.append(PairClass(rep, other,
                                 gen_eigenspace(rep), gen_eigenspace(other)))

    cols = []
    spans = []
    for cl in classes:
        if isinstance(cl, UnipotentClass):
            spans.append((len(cols), len(cl.basis)))
            cols.extend(cl.basis)
        else:
            spans.append((len(cols), len(cl.basis_lam) + len(cl.basis_inv)))
            cols.extend(cl.basis_lam)
            cols.extend(cl.basis_inv)
    if len(cols) != n:
        raise NotSplit("generalized eigenspaces do not fill the space")
    x = ExactMatrix.from_columns(ctx, cols)
    gram = x.transpose() @ a @ x
    for i, (off_i, len_i) in enumerate(spans):
        for j, (off_j, len_j) in enumerate(spans):
            if i == j:
                continue
            for r in range(off_i, off_i + len_i):
                for c in range(off_j, off_j + len_j):
                    if not gram[r, c].is_zero():
                        raise InternalDegenerate(
                            "eigen classes failed to be orthogonal")
    witness = CongruenceWitness(x, a, gram)
    return EigenSplit(classes, witness, gram)


def _sort_key(x):
    """Deterministic sort key for scalars of one context."""
    return _CmpKey(x)


class _CmpKey:
    __slots__ = ("x",)

    def __init__(self, x):
        self.x = x

    def __lt__(self, other):
        return canonical_compare(self.x, other.x) < 0

    def __eq__(self, other):
        return canonical_compare(self.x, other.x) == 0


# -- restricted operators and Jordan structure -----------------------------------------

def restrict_operator(s, basis_cols):
    """Matrix of S on the span of the given independent columns."""
    ctx = s.ctx
    m = len(basis_cols)
    bmat = ExactMatrix.from_columns(ctx, basis_cols)
    cols = []
    for j in range(m):
        image = s @ ExactMatrix.from_columns(ctx, [basis_cols[j]])
        rhs = [image[i, 0] for i in range(s.nrows)]
        part, _ = solve(bmat, rhs)
        if part is None:
            raise InternalDegenerate("operator does not preserve the span")
        cols.append(part)
    return ExactMatrix.from_columns(ctx, cols)


def nilpotent_jordan_chains(nmat):
    """Jordan chains of a nilpotent matrix: list of [v, Nv, ...] columns,
    heights descending; deterministic."""
    ctx = nmat.ctx
    m = nmat.nrows
    if m == 0:
        return []
    kernels = [[]]  # kernels[j] = basis of ker N^j
    power = nmat
    heights = 0
    while True:
        ker = inverse_or_rank(power).kernel
        kernels.append(ker)
        if len(ker) == m:
            heights = len(kernels) - 1
            break
        power = power @ nmat
        if len(kernels) > m + 1:
            raise InternalDegenerate("matrix is not nilpotent")
    chains = []
    for h in range(heights, 0, -1):
        # mark ker N^{h-1} plus N-images of existing chains at height h
        tracker = _EchelonTracker(ctx, m)
        for v in kernels[h - 1]:
            tracker.add(v)
        images = []
        for chain in chains:
            # element of the chain with height exactly h is chain[len-h]
            if len(chain) >= h:
                images.append(chain[len(chain) - h])
        for v in images:
            tracker.add(v)
        for v in kernels[h]:
            if tracker.add(v) is None:  # independent: new chain top
                chain = [v]
                cur = v
                for _ in range(h - 1):
                    img = nmat @ ExactMatrix.from_columns(ctx, [cur])
                    cur = [img[i, 0] for i in range(m)]
                    chain.append(cur)
                chains.append(chain)
    if sum(len(c) for c in chains) != m:
        raise InternalDegenerate("Jordan chains do not span")
    chains.sort(key=lambda c: -len(c))
    return chains


def elementary_divisor_multiplicities(s, lam):
    """Map m -> number of elementary divisors (X-lam)^m of S."""
    ctx = s.ctx
    n = s.nrows
    lam = lam.promote(ctx) if lam.ctx != ctx else lam
    m0 = s - ExactMatrix.identity(ctx, n).scale(lam)
    ranks = [n]
    power = ExactMatrix.identity(ctx, n)
    for _ in range(n + 1):
        power = power @ m0
        ranks.append(inverse_or_rank(power).rank)
    out = {}
    for m in range(1, n + 1):
        cnt = ranks[m - 1] - 2 * ranks[m] + ranks[m + 1]
        if cnt:
            out[m] = cnt
    return out


# -- hyperbolic classes -------------------------------------------------------------

HyperbolicResult = namedtuple("HyperbolicResult", "witness blocks gram")


def hyperbolic_canonical(class_gram, s_class, lam, m_lam):
    """Reduce one paired class to a direct sum of ((0, J_m(lam)), (I, 0)).

    class_gram is the Gram matrix on (basis_lam, basis_inv); s_class the
    asymmetry restricted to the class in the same basis; lam the chosen
    eigenvalue whose side is Jordan-reduced; m_lam = dim V_lam.  Returns the
    witness from class_gram to the canonical matrix, the list of block sizes
    m (Jordan sizes on the lam side), and the canonical matrix itself.
    """
    ctx = class_gram.ctx
    n2 = class_gram.nrows
    m = m_lam
    if n2 != 2 * m:
        raise DegenerateRestriction("paired class dimensions differ")
    # Jordan-reduce the lam side
    s_lam = s_class.submatrix(range(m), range(m))
    nmat = s_lam - ExactMatrix.identity(ctx, m).scale(lam)
    chains = nilpotent_jordan_chains(nmat)
    svecs = []   # reversed chains: highest power of N first
    sizes = []
    for chain in chains:
        sizes.append(len(chain))
        svecs.extend(reversed(chain))
    # duals on the inverse-eigenvalue side: f(t_j, s_i) = delta_ij
    # pairing P[l][i] = f(c_l, s_i) where c_l are inverse-side unit vectors
    pairing = [[None] * m for _ in range(m)]
    for l in range(m):
        for i in range(m):
            acc = ctx.zero()
            for r in range(m):
                acc = acc + svecs[i][r] * class_gram[m + l, r]
            pairing[l][i] = acc
    pmat = ExactMatrix(ctx, pairing)
    pinv = inverse_or_rank(pmat).inverse
    if pinv is None:
        raise DegenerateRestriction("lam pairing is degenerate")
    tvecs = []
    for j in range(m):
        # f(t_j, s_i) = delta: coefficient row j of P^{-1}
        vec = [ctx.zero()] * (2 * m)
        for l in range(m):
            vec[m + l] = pinv[j, l]
        tvecs.append(vec)
    cols = []
    for v in svecs:
        cols.append(list(v) + [ctx.zero()] * m)
    cols.extend(tvecs)
    x1 = ExactMatrix.from_columns(ctx, cols)
    g1 = x1.transpose() @ class_gram @ x1
    # interleave into per-block hyperbolic cells
    perm = [0] * (2 * m)
    pos = 0
    off = 0
    for sz in sizes:
        for j in range(sz):
            perm[off + j] = pos + j          # s-side of the block
            perm[m + off + j] = pos + sz + j  # t-side of the block
        pos += 2 * sz
        off += sz
    pm = permutation_matrix(ctx, perm)
    g2 = pm.transpose() @ g1 @ pm
    target = ExactMatrix.block_diag(ctx, [
        _hyperbolic_cell(ctx, sz, lam) for sz in sizes])
    if g2 != target:
        raise InternalDegenerate("hyperbolic normalization mismatch")
    witness = CongruenceWitness(x1 @ pm, class_gram, g2)
    return HyperbolicResult(witness, sizes, g2)


def _hyperbolic_cell(ctx, m, lam):
    j = ExactMatrix.jordan_block(ctx, m, lam)
    z = ExactMatrix.zeros(ctx, m, m)
    i = ExactMatrix.identity(ctx, m)
    top = [list(zr) + list(jr) for zr, jr in zip(z.rows, j.rows)]
    bot = [list(ir) + list(zr) for ir, zr in zip(i.rows, z.rows)]
    return ExactMatrix(ctx, top + bot)


def hyperbolic_block_matrix(ctx, m, lam):
    """The canonical paired-class cell ((0, J_m(lam)), (I_m, 0))."""
    return _hyperbolic_cell(ctx, m, ctx.scalar(lam)
                            if not hasattr(lam, "ctx") else lam)
