"""Full canonicalization under congruence and the complete invariant.

The pipeline: Gabriel decomposition, asymmetry of the invertible core,
splitting of its minimal polynomial (extending the field when the policy
allows), the eigenvalue splitting, and per-class reduction to the canonical
indecomposable blocks.  Every stage contributes an explicit congruence; the
composed witness is verified exactly against the assembled canonical matrix.
"""

from __future__ import annotations

from collections import namedtuple

from .errors import (HypothesisViolation, InternalDegenerate,
                     InvalidDescriptor, TowerCapExceeded)
from .exactmat import (CongruenceWitness, ExactMatrix, inverse_or_rank,
                       permutation_matrix)
from .field import EXTEND, canonical_compare, format_scalar
from .gabriel import gabriel_decompose
from .spectral import (UnipotentClass, _hyperbolic_cell, asymmetry,
                       eigen_split, hyperbolic_canonical, split_min_poly)
from .unipotent import (gamma0_matrix, gamma_matrix, peel_all,
                        reduce_pair, reduce_single)


class Block:
    """Descriptor of one canonical indecomposable block.

    The eigenvalue of a G block is stored trimmed to its minimal prefix
    context, so descriptors compare across towers that diverge later.
    """

    __slots__ = ("family", "n", "lam")

    def __init__(self, family, n, lam=None):
        self.family = family
        self.n = n
        self.lam = lam.trim() if lam is not None else None

    def __eq__(self, other):
        if not isinstance(other, Block):
            return NotImplemented
        if self.family != other.family or self.n != other.n:
            return False
        if self.lam is None:
            return other.lam is None
        return other.lam is not None and self.lam == other.lam

    def __hash__(self):
        return hash((self.family, self.n))

    def __repr__(self):
        if self.family == "G":
            return "G%d(%s)" % (self.n, format_scalar(self.lam))
        return "%s%d" % (self.family, self.n)


CanonicalForm = namedtuple("CanonicalForm",
                           "gabriel blocks context extension_report")

EquivalenceResult = namedtuple("EquivalenceResult",
                               "equivalent witness context extensions")


def canonical_block_matrix(desc, ctx):
    """The exact block matrix for one descriptor in the given context."""
    char = ctx.characteristic
    fam, n = desc.family, desc.n
    if fam == "A":
        if char == 2 or n % 2 == 0:
            raise InvalidDescriptor("A_n needs odd n outside characteristic 2")
        return gamma_matrix(ctx, n)
    if fam == "B":
        if char != 2 or n % 2 == 0:
            raise InvalidDescriptor("B_n needs odd n in characteristic 2")
        return gamma0_matrix(ctx, n)
    if fam == "C":
        if char == 2 or n % 2 == 1:
            raise InvalidDescriptor("C_n needs even n outside characteristic 2")
        return gamma_matrix(ctx, n)
    if fam in "DEF":
        if n % 2 == 1:
            raise InvalidDescriptor("%s_n needs even n" % fam)
        m = n // 2
        if fam == "D" and m % 2 == 1:
            raise InvalidDescriptor("D_n needs n = 2m with m even")
        if fam == "E" and (char != 2 or m % 2 == 0):
            raise InvalidDescriptor("E_n needs odd m in characteristic 2")
        if fam == "F" and (char == 2 or m % 2 == 0):
            raise InvalidDescriptor("F_n needs odd m outside characteristic 2")
        eps = ctx.one() if fam in "DE" else -ctx.one()
        return _hyperbolic_cell(ctx, m, eps)
    if fam == "G":
        if n % 2 == 1:
            raise InvalidDescriptor("G_n needs even n")
        lam = desc.lam.promote(ctx)
        if lam.is_zero() or lam * lam == ctx.one():
            raise InvalidDescriptor("G_n(lam) needs lam with lam^2 != 0, 1")
        return _hyperbolic_cell(ctx, n // 2, lam)
    raise InvalidDescriptor("unknown family %r" % (fam,))


def canonical_form_matrix(form):
    """The full canonical matrix: Gabriel blocks then sorted blocks."""
    ctx = form.context
    parts = [ExactMatrix.jordan_block(ctx, s) for s in form.gabriel]
    parts.extend(canonical_block_matrix(d, ctx) for d in form.blocks)
    return ExactMatrix.block_diag(ctx, parts)


def _block_sort_key(desc):
    fam_order = {"A": 0, "B": 1, "C": 2, "D": 3, "E": 4, "F": 5}
    if desc.family != "G":
        return (0, fam_order[desc.family], -desc.n)
    return (1, 0, -desc.n)


def _sort_blocks(blocks):
    """Deterministic canonical order; G blocks by eigenvalue then size."""
    plain = [b for b in blocks if b.family != "G"]
    gs = [b for b in blocks if b.family == "G"]
    plain.sort(key=_block_sort_key)

    def gkey(b):
        return (_LamKey(b.lam), -b.n)

    gs.sort(key=gkey)
    return plain + gs


class _LamKey:
    __slots__ = ("lam",)

    def __init__(self, lam):
        self.lam = lam

    def _pair(self, other):
        ctx = self.lam.ctx.common(other.lam.ctx)
        return self.lam.promote(ctx), other.lam.promote(ctx)

    def __lt__(self, other):
        x, y = self._pair(other)
        return canonical_compare(x, y) < 0

    def __eq__(self, other):
        x, y = self._pair(other)
        return canonical_compare(x, y) == 0


def canonicalize(a, policy=EXTEND):
    """Canonical form and verified witness for a square matrix.

    Returns (CanonicalForm, CongruenceWitness); the witness target is
    canonical_form_matrix(form), possibly over an extended context.
    """
    if not a.is_square():
        raise HypothesisViolation("canonicalize needs a square matrix")
    start_ctx = a.ctx
    dec = gabriel_decompose(a)
    core = dec.core
    if core.nrows == 0:
        form = CanonicalForm(dec.jordan_sizes, [], start_ctx, [])
        return form, dec.witness

    asym = split_min_poly(asymmetry(core), policy)
    ctx = asym.ctx
    split = eigen_split(core.promote(ctx), asym)

    ctx_final = ctx
    pending = []    # (descriptors, x_local, targets) per class
    offset = 0
    for cl in split.classes:
        dim = (len(cl.basis) if isinstance(cl, UnipotentClass)
               else len(cl.basis_lam) + len(cl.basis_inv))
        idx = list(range(offset, offset + dim))
        class_gram = split.gram.submatrix(idx, idx)
        if isinstance(cl, UnipotentClass):
            descs, x_local, targets, ctx_final = _reduce_unipotent_class(
                class_gram, cl.eigenvalue, policy, ctx_final)
        else:
            descs, x_local, targets, ctx_final = _reduce_pair_class(
                class_gram, cl, policy, ctx_final)
        pending.append((descs, x_local, targets))
        offset += dim

    # promote all class reductions to the final context and assemble
    blocks = []
    x_parts = []
    targets = []
    for descs, x_local, tparts in pending:
        x_parts.append(x_local.promote(ctx_final))
        for d, t in zip(descs, tparts):
            blocks.append(d)
            targets.append(t.promote(ctx_final))
    x_classes = ExactMatrix.block_diag(ctx_final, x_parts) if x_parts \
        else ExactMatrix.zeros(ctx_final, 0, 0)

    # witness so far: A -> jordan + core -> jordan + eigen gram -> ...
    njord = sum(dec.jordan_sizes)
    x_total = dec.witness.x.promote(ctx_final)
    x_eigen = ExactMatrix.block_diag(ctx_final, [
        ExactMatrix.identity(ctx_final, njord),
        split.witness.x.promote(ctx_final) @ x_classes])
    x_total = x_total @ x_eigen

    # order the blocks canonically
    order = _sort_blocks(blocks)
    sizes = [t.nrows for t in targets]
    starts = []
    p = njord
    for s in sizes:
        starts.append(p)
        p += s
    used = [False] * len(blocks)
    new_positions = {}
    pnew = njord
    for desc in order:
        for i, b in enumerate(blocks):
            if not used[i] and b is desc:
                new_positions[i] = pnew
                pnew += sizes[i]
                used[i] = True
                break
    n = a.nrows
    perm = list(range(njord)) + [0] * (n - njord)
    for i, st in enumerate(starts):
        for j in range(sizes[i]):
            perm[st + j] = new_positions[i] + j
    pm = permutation_matrix(ctx_final, perm)
    x_total = x_total @ pm

    form = CanonicalForm(dec.jordan_sizes, order, ctx_final, [])
    target = canonical_form_matrix(form)
    witness = CongruenceWitness(x_total, a.promote(ctx_final), target)
    return _trim_result(form, witness, start_ctx)


def _trim_result(form, witness, start_ctx):
    """Drop tower levels that the witness and target never touch.

    Scaffolding adjunctions from intermediate reductions can cancel in the
    composed witness; the reported context keeps only what the certified
    relation actually uses.
    """
    from .field import Scalar
    height = len(start_ctx.tower)
    for mat in (witness.x, witness.target):
        for row in mat.rows:
            for e in row:
                height = max(height, len(e.trim().ctx.tower))
    ctx_full = form.context
    if height == len(ctx_full.tower):
        report = _extension_report(start_ctx, ctx_full)
        return CanonicalForm(form.gabriel, form.blocks, ctx_full, report), \
            witness
    ctx = ctx_full.truncated(height)

    def demote(mat):
        return ExactMatrix(ctx, [[Scalar(ctx, e.coords[:ctx.dim])
                                  for e in row] for row in mat.rows])

    witness2 = CongruenceWitness(demote(witness.x), demote(witness.source),
                                 demote(witness.target))
    report = _extension_report(start_ctx, ctx)
    form2 = CanonicalForm(form.gabriel, form.blocks, ctx, report)
    return form2, witness2


def _extension_report(start_ctx, ctx):
    from .field import Scalar
    out = []
    for height in range(len(start_ctx.tower), len(ctx.tower)):
        kind, coords = ctx.tower[height]
        # the defining element lives in the context before its adjunction
        val = Scalar(ctx.truncated(height), coords)
        if kind == "sqrt":
            out.append("sqrt(%s)" % format_scalar(val))
        else:
            out.append("artin_schreier(%s)" % format_scalar(val))
    return out


def _reduce_unipotent_class(class_gram, eps, policy, ctx):
    """Reduce one eigenvalue +-1 class; returns descriptors, local witness,
    per-block targets, and the (possibly extended) context."""
    class_gram = class_gram.promote(ctx)
    eps = eps.promote(ctx)
    s_cl = inverse_or_rank(class_gram).inverse @ class_gram.transpose()
    nmat = s_cl - ExactMatrix.identity(ctx, class_gram.nrows).scale(eps)
    pieces = peel_all(class_gram, nmat, eps)
    char = ctx.characteristic
    descs = []
    xs = []
    targets = []
    ctx_cur = ctx
    for piece in pieces:
        if piece.kind == "single":
            n = piece.order
            w, ctx_cur = reduce_single(piece.gram.promote(ctx_cur),
                                       eps.promote(ctx_cur), n, policy)
            if char == 2:
                fam = "B"
            elif eps == eps.ctx.one():
                fam = "A"
            else:
                fam = "C"
            descs.append(Block(fam, n))
        else:
            m = piece.order
            w, ctx_cur = reduce_pair(piece.gram.promote(ctx_cur),
                                     eps.promote(ctx_cur), m, policy)
            if char == 2:
                fam = "D" if m % 2 == 0 else "E"
            elif eps == eps.ctx.one():
                if m % 2 == 1:
                    raise InternalDegenerate(
                        "odd pair at eigenvalue 1 outside characteristic 2")
                fam = "D"
            else:
                if m % 2 == 0:
                    raise InternalDegenerate(
                        "even pair at eigenvalue -1 outside characteristic 2")
                fam = "F"
            descs.append(Block(fam, 2 * m))
        xs.append(w.x)
        targets.append(w.target)
    basis_cols = [v for piece in pieces for v in piece.basis]
    x_peel = ExactMatrix.from_columns(ctx, basis_cols).promote(ctx_cur)
    x_red = ExactMatrix.block_diag(ctx_cur, [x.promote(ctx_cur) for x in xs])
    return descs, x_peel @ x_red, targets, ctx_cur


def _reduce_pair_class(class_gram, cl, policy, ctx):
    """Reduce one hyperbolic pair class to G blocks."""
    class_gram = class_gram.promote(ctx)
    lam = cl.lam.promote(ctx)
    m_lam = len(cl.basis_lam)
    s_cl = inverse_or_rank(class_gram).inverse @ class_gram.transpose()
    res = hyperbolic_canonical(class_gram, s_cl, lam, m_lam)
    descs = [Block("G", 2 * m, lam) for m in res.blocks]
    targets = [_hyperbolic_cell(ctx, m, lam) for m in res.blocks]
    return descs, res.witness.x, targets, ctx


# -- invariants and congruence decision --------------------------------------------


class InvariantRecord:
    """Complete invariant: Gabriel sizes, per-class elementary divisor
    multisets, and (characteristic 2) alternating flags for odd orders."""

    def __init__(self, gabriel, unipotent, pairs, context):
        self.gabriel = tuple(gabriel)
        self.unipotent = unipotent  # list of (eps, {m: count}, {m: flag})
        self.pairs = pairs          # list of (lam, {m: count})
        self.context = context

    def __eq__(self, other):
        if not isinstance(other, InvariantRecord):
            return NotImplemented
        if self.gabriel != other.gabriel:
            return False
        if len(self.unipotent) != len(other.unipotent) or \
           len(self.pairs) != len(other.pairs):
            return False
        for (e1, m1, f1), (e2, m2, f2) in zip(self.unipotent,
                                              other.unipotent):
            if e1 != e2 or m1 != m2 or f1 != f2:
                return False
        for (l1, m1), (l2, m2) in zip(self.pairs, other.pairs):
            if l1 != l2 or m1 != m2:
                return False
        return True

    def __repr__(self):
        return ("InvariantRecord(gabriel=%r, unipotent=%r, pairs=%r)"
                % (list(self.gabriel), self.unipotent, self.pairs))


def record_from_form(form):
    """Derive the invariant record from a canonical form (bijectively)."""
    ctx = form.context
    char = ctx.characteristic
    one = ctx.one()
    uni = {}
    flags = {}
    pair_entries = []   # (lam, m) occurrences
    for b in form.blocks:
        if b.family in ("A", "B"):
            uni.setdefault(1, {}).setdefault(b.n, 0)
            uni[1][b.n] += 1
            if char == 2:
                if flags.get(b.n) is True:
                    raise InternalDegenerate("B and E blocks share one order")
                flags[b.n] = False
        elif b.family == "C":
            uni.setdefault(-1, {}).setdefault(b.n, 0)
            uni[-1][b.n] += 1
        elif b.family in ("D", "E"):
            m = b.n // 2
            uni.setdefault(1, {}).setdefault(m, 0)
            uni[1][m] += 2
            if char == 2 and m % 2 == 1:
                if flags.get(m) is False:
                    raise InternalDegenerate("B and E blocks share one order")
                flags[m] = True
        elif b.family == "F":
            m = b.n // 2
            uni.setdefault(-1, {}).setdefault(m, 0)
            uni[-1][m] += 2
        else:
            pair_entries.append((b.lam, b.n // 2))
    unipotent = []
    for sign in (1, -1):
        if sign in uni:
            eps = (one if sign == 1 else -one).trim()
            unipotent.append((eps, uni[sign],
                              flags if (char == 2 and sign == 1) else {}))
        if char == 2:
            break
    pair_entries.sort(key=lambda lm: (_LamKey(lm[0]), lm[1]))
    pair_list = []
    for lam, m in pair_entries:
        if pair_list and pair_list[-1][0] == lam:
            pair_list[-1][1][m] = pair_list[-1][1].get(m, 0) + 1
        else:
            pair_list.append((lam, {m: 1}))
    return InvariantRecord(form.gabriel, unipotent, pair_list, ctx)


def blocks_from_record(record):
    """Reconstruct the sorted block list from an invariant record."""
    ctx = record.context
    char = ctx.characteristic
    one = ctx.one()
    blocks = []
    for eps, mults, flags in record.unipotent:
        plus = (eps == one.trim()) or (eps == one)
        for m in sorted(mults):
            count = mults[m]
            if char == 2:
                if m % 2 == 1 and not flags.get(m, m % 2 == 0):
                    blocks.extend(Block("B", m) for _ in range(count))
                else:
                    if count % 2:
                        raise InternalDegenerate("odd pair multiplicity")
                    fam = "E" if m % 2 == 1 else "D"
                    blocks.extend(Block(fam, 2 * m)
                                  for _ in range(count // 2))
            elif plus:
                if m % 2 == 1:
                    blocks.extend(Block("A", m) for _ in range(count))
                else:
                    if count % 2:
                        raise InternalDegenerate("odd pair multiplicity")
                    blocks.extend(Block("D", 2 * m)
                                  for _ in range(count // 2))
            else:
                if m % 2 == 0:
                    blocks.extend(Block("C", m) for _ in range(count))
                else:
                    if count % 2:
                        raise InternalDegenerate("odd pair multiplicity")
                    blocks.extend(Block("F", 2 * m)
                                  for _ in range(count // 2))
    for lam, mults in record.pairs:
        for m in sorted(mults):
            blocks.extend(Block("G", 2 * m, lam) for _ in range(mults[m]))
    return _sort_blocks(blocks)


def invariants(a, policy=EXTEND):
    form, _w = canonicalize(a, policy)
    return record_from_form(form)


_MERGE_ROUNDS = 8


def equivalent(a, b, policy=EXTEND):
    """Decide congruence; verdict true carries an exactly verified witness.

    Canonicalizing two matrices can demand different (but compatible)
    towers, e.g. sqrt(2) on one side and sqrt(8) on the other; the loop
    merges the contexts and re-canonicalizes until both sides settle in
    one field.
    """
    if a.nrows != b.nrows:
        return EquivalenceResult(False, None, a.ctx, [])
    from .field import merge_contexts
    start_ctx = a.ctx.common(b.ctx)
    ctx = start_ctx
    for _ in range(_MERGE_ROUNDS):
        form_a, wit_a = canonicalize(a.promote(ctx), policy)
        form_b, wit_b = canonicalize(b.promote(ctx), policy)
        if form_a.context == form_b.context:
            break
        ctx = merge_contexts(form_a.context, form_b.context, policy)
    else:
        raise TowerCapExceeded("context reconciliation did not converge")
    rec_a = record_from_form(form_a)
    rec_b = record_from_form(form_b)
    report = _extension_report(start_ctx, form_a.context)
    if rec_a != rec_b:
        return EquivalenceResult(False, None, form_a.context, report)
    ctx = form_a.context
    y = wit_a.x @ inverse_or_rank(wit_b.x).inverse
    witness = CongruenceWitness(y, a.promote(ctx), b.promote(ctx))
    return EquivalenceResult(True, witness, ctx, report)


def transpose_witness(a, policy=EXTEND):
    """Y with Y' A Y = A'; succeeds whenever canonicalize does."""
    res = equivalent(a, a.transpose(), policy)
    if not res.equivalent:
        raise InternalDegenerate("a matrix failed to be congruent to its "
                                 "transpose")
    return res.witness
