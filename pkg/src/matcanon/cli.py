"""Command-line surface: canonicalize, decide congruence, run the oracle.

Matrix files are JSON: {"field": {...}, "matrix": [[scalar strings]]}.
Field objects: {"kind": "rational"} | {"kind": "gfp", "p": 3}
| {"kind": "gfq", "p": 2, "modulus": [1, 1]} (low-to-high coefficients of
the monic modulus), optionally with "tower": [{"kind": "sqrt"|"as",
"value": "<scalar in the context below>"}, ...].

Exit codes: 0 success, 1 equivalence verdict false, 2 not split,
3 no root under strict policy, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .canon import (Block, canonical_block_matrix, canonicalize,
                    equivalent, invariants, transpose_witness)
from .errors import (BudgetExceeded, MatcanonError, NoRootStrictPolicy,
                     NotSplit, ParseError)
from .exactmat import ExactMatrix
from .field import (EXTEND, finite_field, format_scalar, parse_scalar,
                    prime_field, rationals)
from .gabriel import gabriel_decompose
from .oracle import (DEFAULT_GL_BUDGET, DEFAULT_ORBIT_BUDGET,
                     bruteforce_congruent, orbit_partition)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_NOT_SPLIT = 2
EXIT_NO_ROOT = 3
EXIT_INPUT = 4


# -- field and matrix (de)serialization ---------------------------------------------

def context_from_json(obj, tower_cap=16):
    kind = obj.get("kind")
    if kind == "rational":
        ctx = rationals(tower_cap)
    elif kind == "gfp":
        ctx = prime_field(int(obj["p"]), tower_cap)
    elif kind == "gfq":
        ctx = finite_field(int(obj["p"]), tuple(obj["modulus"]), tower_cap)
    else:
        raise ParseError("unknown field kind %r" % (kind,))
    for rec in obj.get("tower", ()):
        val = parse_scalar(rec["value"], ctx)
        if rec["kind"] == "sqrt":
            ctx = ctx.adjoin_sqrt(val)
        elif rec["kind"] == "as":
            ctx = ctx.adjoin_artin_schreier(val)
        else:
            raise ParseError("unknown adjunction kind %r" % (rec["kind"],))
    return ctx


def context_to_json(ctx):
    from .field import Scalar
    if ctx.kind == "rational":
        obj = {"kind": "rational"}
    elif ctx.kind == "gfp":
        obj = {"kind": "gfp", "p": ctx.p}
    else:
        obj = {"kind": "gfq", "p": ctx.p, "modulus": list(ctx.modulus)}
    tower = []
    for height, (kind, coords) in enumerate(ctx.tower):
        val = Scalar(ctx.truncated(height), coords)
        tower.append({"kind": kind, "value": format_scalar(val)})
    if tower:
        obj["tower"] = tower
    return obj


def field_from_flag(text, tower_cap=16):
    text = text.strip().lower()
    if text in ("q", "rational", "rationals"):
        return rationals(tower_cap)
    if text == "gf4":
        return finite_field(2, (1, 1), tower_cap)
    if text.startswith("gf"):
        return prime_field(int(text[2:]), tower_cap)
    raise ParseError("cannot parse field flag %r" % (text,))


def matrix_from_json(obj, tower_cap=16):
    ctx = context_from_json(obj["field"], tower_cap)
    rows = []
    for row in obj["matrix"]:
        out = []
        for entry in row:
            if isinstance(entry, (int, float)):
                out.append(ctx.scalar(int(entry)))
            else:
                out.append(parse_scalar(str(entry), ctx))
        rows.append(out)
    return ExactMatrix(ctx, rows)


def matrix_to_json(a):
    return {"field": context_to_json(a.ctx),
            "matrix": [[format_scalar(e) for e in row] for row in a.rows]}


def load_matrix(path, tower_cap=16):
    with open(path) as handle:
        return matrix_from_json(json.load(handle), tower_cap)


def block_to_text(b):
    return repr(b)


def block_from_text(text, ctx):
    text = text.strip()
    fam = text[0]
    if fam == "G":
        open_idx = text.index("(")
        n = int(text[1:open_idx])
        lam = parse_scalar(text[open_idx + 1:-1], ctx)
        return Block("G", n, lam)
    return Block(fam, int(text[1:]))


def form_to_json(form):
    return {
        "field": context_to_json(form.context),
        "gabriel": list(form.gabriel),
        "blocks": [block_to_text(b) for b in form.blocks],
        "extensions": list(form.extension_report),
    }


def form_from_json(obj):
    from .canon import CanonicalForm
    ctx = context_from_json(obj["field"])
    blocks = [block_from_text(t, ctx) for t in obj["blocks"]]
    return CanonicalForm(list(obj["gabriel"]), blocks, ctx,
                         list(obj.get("extensions", [])))


def _emit(payload, machine):
    if machine:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    for key, value in payload.items():
        if key in ("witness", "matrix"):
            sys.stdout.write("%s:\n" % key)
            for row in value:
                sys.stdout.write("  [%s]\n" % ", ".join(row))
        else:
            sys.stdout.write("%s: %s\n" % (key, value))


# -- subcommands -----------------------------------------------------------------------

def _cmd_canon(args):
    a = load_matrix(args.matrix, args.tower_cap)
    form, wit = canonicalize(a, args.policy)
    payload = form_to_json(form)
    payload["witness"] = [[format_scalar(e) for e in row]
                          for row in wit.x.rows]
    _emit(payload, args.machine)
    return EXIT_OK


def _cmd_equiv(args):
    a = load_matrix(args.left, args.tower_cap)
    b = load_matrix(args.right, args.tower_cap)
    res = equivalent(a, b, args.policy)
    payload = {"equivalent": res.equivalent,
               "extensions": list(res.extensions),
               "field": context_to_json(res.context)}
    if res.equivalent:
        payload["witness"] = [[format_scalar(e) for e in row]
                              for row in res.witness.x.rows]
        # echo the verified relation
        payload["relation"] = "Y' A Y = B verified exactly"
    else:
        rec_a = invariants(a, args.policy)
        rec_b = invariants(b, args.policy)
        payload["reason"] = _mismatch_reason(rec_a, rec_b)
    _emit(payload, args.machine)
    return EXIT_OK if res.equivalent else EXIT_FALSE


def _mismatch_reason(rec_a, rec_b):
    if rec_a.gabriel != rec_b.gabriel:
        return "gabriel sizes differ: %s vs %s" % (list(rec_a.gabriel),
                                                   list(rec_b.gabriel))
    for (e1, m1, f1), (e2, m2, f2) in zip(rec_a.unipotent, rec_b.unipotent):
        if m1 != m2:
            return "elementary divisor multiplicities differ at %s" % \
                format_scalar(e1)
        if f1 != f2:
            bad = sorted(m for m in set(f1) | set(f2)
                         if f1.get(m) != f2.get(m))
            return "alternating flag mismatch at m=%s" % bad[0]
    return "invariant records differ"


def _cmd_invariants(args):
    a = load_matrix(args.matrix, args.tower_cap)
    rec = invariants(a, args.policy)
    payload = {
        "gabriel": list(rec.gabriel),
        "unipotent": [{"eigenvalue": format_scalar(e),
                       "multiplicities": {str(k): v for k, v in m.items()},
                       "alternating": {str(k): v for k, v in f.items()}}
                      for e, m, f in rec.unipotent],
        "pairs": [{"eigenvalue": format_scalar(l),
                   "multiplicities": {str(k): v for k, v in m.items()}}
                  for l, m in rec.pairs],
    }
    _emit(payload, args.machine)
    return EXIT_OK


def _cmd_gabriel(args):
    a = load_matrix(args.matrix, args.tower_cap)
    dec = gabriel_decompose(a)
    payload = {"jordan_sizes": dec.jordan_sizes,
               "core_dimension": dec.core.nrows,
               "core": [[format_scalar(e) for e in row]
                        for row in dec.core.rows],
               "witness": [[format_scalar(e) for e in row]
                           for row in dec.witness.x.rows]}
    _emit(payload, args.machine)
    return EXIT_OK


def _cmd_transpose(args):
    a = load_matrix(args.matrix, args.tower_cap)
    wit = transpose_witness(a, args.policy)
    payload = {"witness": [[format_scalar(e) for e in row]
                           for row in wit.x.rows],
               "field": context_to_json(wit.x.ctx)}
    _emit(payload, args.machine)
    return EXIT_OK


def _cmd_oracle(args):
    if args.partition:
        report = orbit_partition(args.dimension, args.prime,
                                 args.budget or DEFAULT_ORBIT_BUDGET)
        payload = {"classes": len(report.classes),
                   "sizes": report.sizes,
                   "representatives": [
                       [[format_scalar(e) for e in row] for row in c.rows]
                       for c in report.classes]}
        _emit(payload, args.machine)
        return EXIT_OK
    if not args.left or not args.right:
        raise ParseError("oracle needs two matrix files or --partition")
    a = load_matrix(args.left, args.tower_cap)
    b = load_matrix(args.right, args.tower_cap)
    verdict, x = bruteforce_congruent(a, b, args.budget or DEFAULT_GL_BUDGET)
    payload = {"congruent": verdict}
    if x is not None:
        payload["witness"] = [[format_scalar(e) for e in row]
                              for row in x.rows]
    _emit(payload, args.machine)
    return EXIT_OK if verdict else EXIT_FALSE


def _cmd_block(args):
    ctx = field_from_flag(args.field, args.tower_cap)
    desc = block_from_text(args.descriptor, ctx)
    mat = canonical_block_matrix(desc, ctx)
    payload = {"block": block_to_text(desc),
               "matrix": [[format_scalar(e) for e in row]
                          for row in mat.rows]}
    _emit(payload, args.machine)
    return EXIT_OK


def _cmd_fuzz(args):
    ctx = field_from_flag(args.field, args.tower_cap)
    rng = random.Random(args.seed)
    failures = []
    checked = 0
    for case in range(args.count):
        n = rng.randint(1, args.max_dim)
        a = _random_matrix(ctx, rng, n)
        y = _random_invertible(ctx, rng, n)
        b = y.transpose() @ a @ y
        try:
            fa, wa = canonicalize(a, args.policy)
            fb, wb = canonicalize(b, args.policy)
        except NotSplit:
            continue
        except NoRootStrictPolicy:
            continue
        checked += 1
        if fa.gabriel != fb.gabriel or fa.blocks != fb.blocks:
            failures.append({"case": case, "kind": "invariance",
                             "matrix": matrix_to_json(a)["matrix"]})
        if ctx.kind == "gfp" and n <= 3 and args.policy == EXTEND:
            try:
                res = equivalent(a, b, args.policy)
                bf, _ = bruteforce_congruent(a, b,
                                             args.budget or DEFAULT_GL_BUDGET)
                if res.equivalent != bf and not res.extensions:
                    failures.append({"case": case, "kind": "oracle",
                                     "matrix": matrix_to_json(a)["matrix"]})
            except (BudgetExceeded, NotSplit, NoRootStrictPolicy):
                pass
    payload = {"cases": args.count, "checked": checked,
               "failures": failures, "seed": args.seed}
    if ctx.kind == "gfp" and ctx.p == 2:
        payload["pair_counterexample"] = _pair_counterexample_report(
            args.budget or DEFAULT_GL_BUDGET)
    _emit(payload, args.machine)
    return EXIT_OK


def _pair_counterexample_report(budget):
    """The order-2 pair matrices with (a,b) = (1,1) vs (0,0) over GF(2)."""
    f2 = prime_field(2)
    c11 = ExactMatrix(f2, [[1, 0, 1, 1], [0, 0, 0, 1],
                           [1, 0, 0, 0], [0, 1, 0, 1]])
    c00 = ExactMatrix(f2, [[0, 0, 1, 1], [0, 0, 0, 1],
                           [1, 0, 0, 0], [0, 1, 0, 0]])
    try:
        verdict, _ = bruteforce_congruent(c11, c00, budget)
    except BudgetExceeded:
        return "skipped (budget)"
    return "distinct over GF(2)" if not verdict else "UNEXPECTEDLY CONGRUENT"


def _random_matrix(ctx, rng, n):
    if ctx.kind == "rational":
        return ExactMatrix(ctx, [[rng.randint(-3, 3) for _ in range(n)]
                                 for _ in range(n)])
    pool = None
    if ctx.kind == "gfp":
        return ExactMatrix(ctx, [[rng.randrange(ctx.p) for _ in range(n)]
                                 for _ in range(n)])
    pool = list(ctx.iter_elements())
    return ExactMatrix(ctx, [[rng.choice(pool) for _ in range(n)]
                             for _ in range(n)])


def _random_invertible(ctx, rng, n):
    from .exactmat import inverse_or_rank
    while True:
        y = _random_matrix(ctx, rng, n)
        if inverse_or_rank(y).inverse is not None:
            return y


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matcanon",
        description="exact canonical forms of square matrices under "
                    "congruence")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--policy", choices=("strict", "extend"),
                       default="extend")
        p.add_argument("--tower-cap", type=int, default=16)
        p.add_argument("--machine", action="store_true",
                       help="machine-readable JSON output")

    p = sub.add_parser("canon", help="canonical form of one matrix")
    p.add_argument("matrix")
    common(p)
    p.set_defaults(func=_cmd_canon)

    p = sub.add_parser("equiv", help="decide congruence of two matrices")
    p.add_argument("left")
    p.add_argument("right")
    common(p)
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("invariants", help="complete invariant record")
    p.add_argument("matrix")
    common(p)
    p.set_defaults(func=_cmd_invariants)

    p = sub.add_parser("gabriel", help="0-Jordan blocks plus invertible core")
    p.add_argument("matrix")
    common(p)
    p.set_defaults(func=_cmd_gabriel)

    p = sub.add_parser("transpose", help="witness Y with Y'AY = A'")
    p.add_argument("matrix")
    common(p)
    p.set_defaults(func=_cmd_transpose)

    p = sub.add_parser("oracle", help="brute-force congruence over GF(p)")
    p.add_argument("left", nargs="?")
    p.add_argument("right", nargs="?")
    p.add_argument("--partition", action="store_true")
    p.add_argument("-n", "--dimension", type=int, default=2)
    p.add_argument("--prime", type=int, default=2)
    p.add_argument("--budget", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("block", help="emit one canonical block matrix")
    p.add_argument("descriptor", help="e.g. A3 or G4(1/2)")
    p.add_argument("--field", default="q")
    common(p)
    p.set_defaults(func=_cmd_block)

    p = sub.add_parser("fuzz", help="seeded random invariant suite")
    p.add_argument("--field", default="gf3")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_fuzz)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotSplit as exc:
        sys.stderr.write("not split: %s\n" % exc)
        return EXIT_NOT_SPLIT
    except NoRootStrictPolicy as exc:
        sys.stderr.write("no root under strict policy: %s\n" % exc)
        return EXIT_NO_ROOT
    except (ParseError, OSError, KeyError, ValueError,
            json.JSONDecodeError) as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return EXIT_INPUT
    except MatcanonError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
