"""Exact field arithmetic with on-demand quadratic and Artin-Schreier closure.

A FieldContext is an exact base field (rationals, GF(p), or GF(p^k) given by a
modulus polynomial) together with an ordered tower of degree-2 adjunctions.
Scalars are coordinate vectors over the base field with respect to the
multiplicative basis of the tower; every operation is exact.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .errors import (ContextMismatch, DivisionByZero, NoRootStrictPolicy,
                     ParseError, TowerCapExceeded, WrongCharacteristic)

STRICT = "strict"
EXTEND = "extend"

_SQRT = "sqrt"
_AS = "as"


def _is_prime(n):
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


class FieldContext:
    """Immutable exact field: base kind plus a tower of quadratic adjunctions.

    kind is 'rational', 'gfp' or 'gfq'.  The tower is a tuple of
    ('sqrt', coords) records meaning g^2 = d, or ('as', coords) records
    meaning g^2 + g = a (characteristic 2 only); coords are the defining
    element's coordinates in the context existing before the adjunction.
    """

    def __init__(self, kind, p=0, modulus=None, tower=(), tower_cap=16):
        if kind not in ("rational", "gfp", "gfq"):
            raise ValueError("unknown field kind %r" % (kind,))
        if kind in ("gfp", "gfq") and not _is_prime(p):
            raise ValueError("characteristic must be prime, got %r" % (p,))
        if kind == "gfq":
            modulus = tuple(c % p for c in modulus)
            if len(modulus) < 1:
                raise ValueError("gfq modulus must have degree >= 1")
        else:
            modulus = None
        self.kind = kind
        self.p = p if kind != "rational" else 0
        self.modulus = modulus
        self.tower = tuple(tower)
        self.tower_cap = tower_cap
        for rec in self.tower:
            if rec[0] == _AS and self.p != 2:
                raise WrongCharacteristic(
                    "Artin-Schreier adjunction outside characteristic 2")
        self._key = (self.kind, self.p, self.modulus, self.tower)

    # -- identity ---------------------------------------------------------

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FieldContext) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.kind == "rational":
            base = "Q"
        elif self.kind == "gfp":
            base = "GF(%d)" % self.p
        else:
            base = "GF(%d^%d)" % (self.p, len(self.modulus))
        if self.tower:
            return "%s+%d adjunctions" % (base, len(self.tower))
        return base

    @property
    def characteristic(self):
        return self.p

    @property
    def dim(self):
        """Coordinate dimension over the base field: 2**len(tower)."""
        return 1 << len(self.tower)

    @property
    def base_degree(self):
        return 1 if self.kind != "gfq" else len(self.modulus)

    def order(self):
        """Number of elements, or None for characteristic 0."""
        if self.kind == "rational":
            return None
        return self.p ** (self.base_degree * self.dim)

    def is_prefix_of(self, other):
        return (self.kind == other.kind and self.p == other.p
                and self.modulus == other.modulus
                and self.tower == other.tower[:len(self.tower)])

    def common(self, other):
        """The larger of two prefix-compatible contexts."""
        if self.is_prefix_of(other):
            return other
        if other.is_prefix_of(self):
            return self
        raise ContextMismatch("contexts are not prefix-compatible")

    # -- base field element helpers ----------------------------------------

    def _bzero(self):
        if self.kind == "rational":
            return Fraction(0)
        if self.kind == "gfp":
            return 0
        return (0,) * len(self.modulus)

    def _bone(self):
        if self.kind == "rational":
            return Fraction(1)
        if self.kind == "gfp":
            return 1
        return (1,) + (0,) * (len(self.modulus) - 1)

    def _bfrom_int(self, n):
        if self.kind == "rational":
            return Fraction(n)
        if self.kind == "gfp":
            return n % self.p
        return (n % self.p,) + (0,) * (len(self.modulus) - 1)

    def _badd(self, x, y):
        if self.kind == "rational":
            return x + y
        if self.kind == "gfp":
            return (x + y) % self.p
        return tuple((a + b) % self.p for a, b in zip(x, y))

    def _bneg(self, x):
        if self.kind == "rational":
            return -x
        if self.kind == "gfp":
            return (-x) % self.p
        return tuple((-a) % self.p for a in x)

    def _bmul(self, x, y):
        if self.kind == "rational":
            return x * y
        if self.kind == "gfp":
            return (x * y) % self.p
        k = len(self.modulus)
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    prod[i + j] = (prod[i + j] + a * b) % self.p
        # reduce modulo the monic modulus X^k + sum(mod[i] X^i)
        for i in range(2 * k - 2, k - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j, m in enumerate(self.modulus):
                    prod[i - k + j] = (prod[i - k + j] - c * m) % self.p
        return tuple(prod[:k])

    def _binv(self, x):
        if self.kind == "rational":
            if x == 0:
                raise DivisionByZero("rational division by zero")
            return Fraction(1) / x
        if self.kind == "gfp":
            if x % self.p == 0:
                raise DivisionByZero("division by zero in GF(%d)" % self.p)
            return pow(x, self.p - 2, self.p)
        if all(c == 0 for c in x):
            raise DivisionByZero("division by zero in GF(%d^%d)"
                                 % (self.p, len(self.modulus)))
        # x^(q-2) by square and multiply
        q = self.p ** len(self.modulus)
        result, acc, e = self._bone(), x, q - 2
        while e:
            if e & 1:
                result = self._bmul(result, acc)
            acc = self._bmul(acc, acc)
            e >>= 1
        return result

    def _bis_zero(self, x):
        if self.kind == "gfq":
            return all(c == 0 for c in x)
        return x == 0

    def _bcmp(self, x, y):
        if self.kind == "rational":
            return (x > y) - (x < y)
        if self.kind == "gfp":
            return (x > y) - (x < y)
        rx, ry = tuple(reversed(x)), tuple(reversed(y))
        return (rx > ry) - (rx < ry)

    # -- scalar constructors -----------------------------------------------

    def zero(self):
        return Scalar(self, (self._bzero(),) * self.dim)

    def one(self):
        coords = [self._bzero()] * self.dim
        coords[0] = self._bone()
        return Scalar(self, tuple(coords))

    def scalar(self, value):
        """Build a scalar from an int, Fraction, or base element."""
        if isinstance(value, Scalar):
            return value.promote(self)
        coords = [self._bzero()] * self.dim
        if isinstance(value, int):
            coords[0] = self._bfrom_int(value)
        elif isinstance(value, Fraction):
            if self.kind != "rational":
                if value.denominator != 1:
                    num = value.numerator % self.p
                    den = value.denominator % self.p
                    coords[0] = self._bmul(self._bfrom_int(num),
                                           self._binv(self._bfrom_int(den)))
                else:
                    coords[0] = self._bfrom_int(value.numerator)
            else:
                coords[0] = value
        elif self.kind == "gfq" and isinstance(value, tuple):
            coords[0] = tuple(c % self.p for c in value)
        else:
            raise TypeError("cannot coerce %r into %r" % (value, self))
        return Scalar(self, tuple(coords))

    def generator(self, index):
        """The index-th (1-based) tower generator as a scalar."""
        if not 1 <= index <= len(self.tower):
            raise ValueError("no generator g%d in this context" % index)
        coords = [self._bzero()] * self.dim
        coords[1 << (index - 1)] = self._bone()
        return Scalar(self, tuple(coords))

    def base_element(self, value):
        """A scalar whose only nonzero coordinate is the given base element."""
        coords = [self._bzero()] * self.dim
        coords[0] = value
        return Scalar(self, tuple(coords))

    def iter_elements(self):
        """Deterministic enumeration of all elements (finite fields only)."""
        if self.kind == "rational":
            raise ValueError("cannot enumerate the rationals")
        if self.kind == "gfp":
            base = list(range(self.p))
        else:
            base = [tuple(reversed(c)) for c in itertools.product(
                range(self.p), repeat=len(self.modulus))]
        for combo in itertools.product(base, repeat=self.dim):
            yield Scalar(self, combo)

    # -- adjunctions ---------------------------------------------------------

    def adjoin_sqrt(self, d):
        """New context with a generator g, g^2 = d.  d must be a non-square."""
        if len(self.tower) >= self.tower_cap:
            raise TowerCapExceeded("tower height cap %d reached"
                                   % self.tower_cap)
        d = d.promote(self)
        return FieldContext(self.kind, self.p, self.modulus,
                            self.tower + ((_SQRT, d.coords),), self.tower_cap)

    def adjoin_artin_schreier(self, a):
        """New context with a generator g, g^2 + g = a (characteristic 2)."""
        if self.p != 2:
            raise WrongCharacteristic(
                "Artin-Schreier adjunction requires characteristic 2")
        if len(self.tower) >= self.tower_cap:
            raise TowerCapExceeded("tower height cap %d reached"
                                   % self.tower_cap)
        a = a.promote(self)
        return FieldContext(self.kind, self.p, self.modulus,
                            self.tower + ((_AS, a.coords),), self.tower_cap)

    def truncated(self, height):
        """The prefix context with the first `height` adjunctions."""
        return FieldContext(self.kind, self.p, self.modulus,
                            self.tower[:height], self.tower_cap)


class Scalar:
    """Immutable element of a FieldContext; coordinates over the base field."""

    __slots__ = ("ctx", "coords")

    def __init__(self, ctx, coords):
        self.ctx = ctx
        self.coords = tuple(coords)
        if len(self.coords) != ctx.dim:
            raise ValueError("coordinate length %d does not match context "
                             "dimension %d" % (len(self.coords), ctx.dim))

    # -- promotion ---------------------------------------------------------

    def promote(self, ctx):
        """Zero-extend into a context whose tower extends this scalar's."""
        if self.ctx == ctx:
            return self
        if not self.ctx.is_prefix_of(ctx):
            raise ContextMismatch("cannot promote %r scalar into %r"
                                  % (self.ctx, ctx))
        coords = list(self.coords) + [ctx._bzero()] * (ctx.dim - len(self.coords))
        return Scalar(ctx, tuple(coords))

    def _pair(self, other):
        if not isinstance(other, Scalar):
            other = self.ctx.scalar(other)
        if self.ctx is other.ctx or self.ctx == other.ctx:
            return self, other
        ctx = self.ctx.common(other.ctx)
        return self.promote(ctx), other.promote(ctx)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        a, b = self._pair(other)
        ctx = a.ctx
        return Scalar(ctx, tuple(ctx._badd(x, y)
                                 for x, y in zip(a.coords, b.coords)))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ctx, tuple(self.ctx._bneg(x) for x in self.coords))

    def __sub__(self, other):
        a, b = self._pair(other)
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        return b + (-a)

    def __mul__(self, other):
        a, b = self._pair(other)
        ctx = a.ctx
        return Scalar(ctx, _tower_mul(ctx, a.coords, b.coords,
                                      len(ctx.tower)))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("scalar division by zero")
        ctx = self.ctx
        return Scalar(ctx, _tower_inv(ctx, self.coords, len(ctx.tower)))

    def __truediv__(self, other):
        a, b = self._pair(other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._pair(other)
        return b * a.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ctx.one()
        acc = self
        while e:
            if e & 1:
                result = result * acc
            acc = acc * acc
            e >>= 1
        return result

    # -- predicates and comparison -------------------------------------------

    def trim(self):
        """The same scalar in the smallest prefix context that holds it."""
        height = len(self.ctx.tower)
        while height > 0:
            half = 1 << (height - 1)
            if all(self.ctx._bis_zero(c) for c in self.coords[half:2 * half]):
                height -= 1
            else:
                break
        if height == len(self.ctx.tower):
            return self
        sub = self.ctx.truncated(height)
        return Scalar(sub, self.coords[:sub.dim])

    def is_zero(self):
        return all(self.ctx._bis_zero(c) for c in self.coords)

    def is_one(self):
        return (self == self.ctx.one())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        try:
            a, b = self._pair(other)
        except ContextMismatch:
            return False
        return a.coords == b.coords

    def __hash__(self):
        # promotions zero-extend but compare equal: hash the trimmed coords
        return hash(self.trim().coords)

    def __repr__(self):
        return "Scalar(%s)" % format_scalar(self)

    def __bool__(self):
        return not self.is_zero()


def _tower_mul(ctx, xs, ys, level):
    """Multiply coordinate vectors at the given tower level (recursively).

    Promoted base-field values have zero high halves; branching on those
    keeps the recursion linear for the common sparse cases.
    """
    if level == 0:
        return (ctx._bmul(xs[0], ys[0]),)
    half = 1 << (level - 1)
    a, b = xs[:half], xs[half:]
    c, e = ys[:half], ys[half:]
    bz = ctx._bis_zero
    b_zero = all(bz(v) for v in b)
    e_zero = all(bz(v) for v in e)
    if b_zero and e_zero:
        return _tower_mul(ctx, a, c, level - 1) + (ctx._bzero(),) * half
    if b_zero:
        return (_tower_mul(ctx, a, c, level - 1)
                + _tower_mul(ctx, a, e, level - 1))
    if e_zero:
        return (_tower_mul(ctx, a, c, level - 1)
                + _tower_mul(ctx, b, c, level - 1))
    rec_kind, d = ctx.tower[level - 1]
    ac = _tower_mul(ctx, a, c, level - 1)
    be = _tower_mul(ctx, b, e, level - 1)
    ae = _tower_mul(ctx, a, e, level - 1)
    bc = _tower_mul(ctx, b, c, level - 1)
    bed = _tower_mul(ctx, be, d, level - 1)
    low = tuple(ctx._badd(x, y) for x, y in zip(ac, bed))
    high = tuple(ctx._badd(x, y) for x, y in zip(ae, bc))
    if rec_kind == _AS:
        # g^2 = g + a: the be part feeds both halves
        high = tuple(ctx._badd(x, y) for x, y in zip(high, be))
    return low + high


def _tower_inv(ctx, xs, level):
    """Inverse of a tower element by norm descent.

    For x = a + b g with g^2 = d: x^{-1} = (a - b g) / (a^2 - b^2 d).
    For g^2 = g + alpha (characteristic 2): the conjugate is a + b + b g
    and the norm is a^2 + a b + alpha b^2.  Both norms live one level down.
    """
    if level == 0:
        return (ctx._binv(xs[0]),)
    half = 1 << (level - 1)
    a, b = xs[:half], xs[half:]
    rec_kind, d = ctx.tower[level - 1]
    if all(ctx._bis_zero(c) for c in b):
        inv = _tower_inv(ctx, a, level - 1)
        return inv + (ctx._bzero(),) * half
    aa = _tower_mul(ctx, a, a, level - 1)
    bb = _tower_mul(ctx, b, b, level - 1)
    if rec_kind == _SQRT:
        bbd = _tower_mul(ctx, bb, d, level - 1)
        norm = tuple(ctx._badd(x, ctx._bneg(y)) for x, y in zip(aa, bbd))
        conj_lo, conj_hi = a, tuple(ctx._bneg(c) for c in b)
    else:
        ab = _tower_mul(ctx, a, b, level - 1)
        bba = _tower_mul(ctx, bb, d, level - 1)
        norm = tuple(ctx._badd(ctx._badd(x, y), z)
                     for x, y, z in zip(aa, ab, bba))
        conj_lo = tuple(ctx._badd(x, y) for x, y in zip(a, b))
        conj_hi = b
    norm_inv = _tower_inv(ctx, norm, level - 1)
    lo = _tower_mul(ctx, conj_lo, norm_inv, level - 1)
    hi = _tower_mul(ctx, conj_hi, norm_inv, level - 1)
    return lo + hi


def _base_solve(ctx, cols, rhs):
    """Solve sum_j cols[j]*x_j = rhs over the base field; None if singular."""
    n = len(rhs)
    aug = [[cols[j][i] for j in range(n)] + [rhs[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, n):
            if not ctx._bis_zero(aug[i][c]):
                piv = i
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = ctx._binv(aug[r][c])
        aug[r] = [ctx._bmul(inv, v) for v in aug[r]]
        for i in range(n):
            if i != r and not ctx._bis_zero(aug[i][c]):
                f = aug[i][c]
                aug[i] = [ctx._badd(v, ctx._bneg(ctx._bmul(f, w)))
                          for v, w in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
        if r == n:
            break
    if r < n:
        # consistent only if the remaining rhs rows vanished
        for i in range(r, n):
            if not ctx._bis_zero(aug[i][n]):
                return None
    sol = [ctx._bzero()] * n
    for row, c in enumerate(piv_cols):
        sol[c] = aug[row][n]
    return sol


# -- total order -------------------------------------------------------------

def canonical_compare(x, y):
    """Strict total order on scalars of one context: -1, 0 or 1.

    Lexicographic on coordinate vectors from the highest tower coordinate
    down; base coordinates use numeric order over Q and the integer
    representative order over GF (gfq tuples compared highest degree first).
    """
    if x.ctx != y.ctx:
        raise ContextMismatch("canonical_compare needs a shared context")
    for a, b in zip(reversed(x.coords), reversed(y.coords)):
        c = x.ctx._bcmp(a, b)
        if c:
            return c
    return 0


def canonical_min(x, y):
    return x if canonical_compare(x, y) <= 0 else y


# -- roots --------------------------------------------------------------------

def sqrt_or_adjoin(x, policy=EXTEND):
    """Return (r, ctx) with r*r == x, adjoining a square root if needed."""
    if x.is_zero():
        return x, x.ctx
    r = _find_sqrt(x)
    if r is not None:
        return r, x.ctx
    if policy == STRICT:
        raise NoRootStrictPolicy("no square root of %s in %r"
                                 % (format_scalar(x), x.ctx))
    ctx2 = x.ctx.adjoin_sqrt(x)
    return ctx2.generator(len(ctx2.tower)), ctx2


def artin_schreier_root_or_adjoin(a, policy=EXTEND):
    """Return (x, ctx) with x*x + x == a over characteristic 2."""
    ctx = a.ctx
    if ctx.characteristic != 2:
        raise WrongCharacteristic("Artin-Schreier roots need characteristic 2")
    r = _solve_frobenius_affine(a, include_identity=True)
    if r is not None:
        return r, ctx
    if policy == STRICT:
        raise NoRootStrictPolicy("x^2+x=%s has no root in %r"
                                 % (format_scalar(a), ctx))
    ctx2 = ctx.adjoin_artin_schreier(a)
    return ctx2.generator(len(ctx2.tower)), ctx2


def _find_sqrt(x):
    """A square root of x in its own context, or None."""
    ctx = x.ctx
    if ctx.kind == "rational":
        return _rational_tower_sqrt(x, len(ctx.tower))
    if ctx.characteristic == 2:
        return _solve_frobenius_affine(x, include_identity=False)
    # odd characteristic finite field: Euler criterion + Tonelli-Shanks
    q = ctx.order()
    if (x ** ((q - 1) // 2)) != ctx.one():
        return None
    return _tonelli_shanks(x, q)


def _rational_tower_sqrt(x, level):
    """Recursive square root search in a tower over Q; None if absent."""
    ctx = x.ctx
    if level == 0:
        f = x.coords[0]
        if f < 0:
            return None
        rn, rd = math.isqrt(f.numerator), math.isqrt(f.denominator)
        if rn * rn == f.numerator and rd * rd == f.denominator:
            root = [Fraction(rn, rd)] + [Fraction(0)] * (ctx.dim - 1)
            return Scalar(ctx, tuple(root))
        return None
    half = 1 << (level - 1)
    sub = ctx.truncated(level - 1)
    lo = Scalar(sub, x.coords[:half])
    hi = Scalar(sub, x.coords[half:])
    # only sqrt records occur over Q (Artin-Schreier needs characteristic 2)
    d = Scalar(sub, ctx.tower[level - 1][1])

    def _lift(a, b):
        return Scalar(ctx, tuple(list(a.coords) + list(b.coords)))

    if hi.is_zero():
        r = _rational_tower_sqrt(lo, level - 1)
        if r is not None:
            return _lift(r, sub.zero())
        r = _rational_tower_sqrt(lo / d, level - 1)
        if r is not None:
            return _lift(sub.zero(), r)
        return None
    # y = a + b g, y^2 = (a^2 + b^2 d) + 2ab g = lo + hi g
    norm = lo * lo - d * hi * hi
    s = _rational_tower_sqrt(norm, level - 1)
    if s is None:
        return None
    two = sub.scalar(2)
    for sign in (s, -s):
        bsq = (lo + sign) / (two * d)
        b = _rational_tower_sqrt(bsq, level - 1)
        if b is not None and not b.is_zero():
            a = hi / (two * b)
            cand = _lift(a, b)
            if cand * cand == x.promote(ctx):
                return cand
    return None


def _tonelli_shanks(x, q):
    """Square root in an odd-characteristic finite field (x is a residue)."""
    ctx = x.ctx
    one = ctx.one()
    m = q - 1
    s = 0
    while m % 2 == 0:
        m //= 2
        s += 1
    if s == 1:
        return x ** ((q + 1) // 4)
    z = None
    for cand in ctx.iter_elements():
        if cand.is_zero():
            continue
        if (cand ** ((q - 1) // 2)) != one:
            z = cand
            break
    c = z ** m
    t = x ** m
    r = x ** ((m + 1) // 2)
    while t != one:
        t2 = t
        i = 0
        while t2 != one:
            t2 = t2 * t2
            i += 1
        b = c ** (1 << (s - i - 1))
        r = r * b
        c = b * b
        t = t * c
        s = i
    return r


def _solve_frobenius_affine(target, include_identity):
    """Solve x^2 = target (or x^2 + x = target) by GF(2)-linear algebra.

    Squaring is additive in characteristic 2 and GF(2)-linear on the
    coordinate vector over the prime field, so both equations are linear
    systems over GF(2).
    """
    ctx = target.ctx
    k = ctx.base_degree
    n = ctx.dim * k

    def to_bits(s):
        bits = []
        for c in s.coords:
            if ctx.kind == "gfp":
                bits.append(c % 2)
            else:
                bits.extend(v % 2 for v in c)
        return bits

    def from_bits(bits):
        coords = []
        for i in range(ctx.dim):
            chunk = bits[i * k:(i + 1) * k]
            if ctx.kind == "gfp":
                coords.append(chunk[0] % 2)
            else:
                coords.append(tuple(v % 2 for v in chunk))
        return Scalar(ctx, tuple(coords))

    cols = []
    for j in range(n):
        bits = [0] * n
        bits[j] = 1
        e = from_bits(bits)
        img = e * e
        if include_identity:
            img = img + e
        cols.append(to_bits(img))
    rhs = to_bits(target)
    # GF(2) Gaussian elimination
    aug = [[cols[j][i] for j in range(n)] + [rhs[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, n):
            if aug[i][c]:
                piv = i
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        for i in range(n):
            if i != r and aug[i][c]:
                aug[i] = [(v + w) % 2 for v, w in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, n):
        if aug[i][n]:
            return None
    sol = [0] * n
    for row, c in enumerate(piv_cols):
        sol[c] = aug[row][n]
    return from_bits(sol)


# -- parsing and formatting ----------------------------------------------------

def format_scalar(x):
    """Canonical text form; format_scalar and parse_scalar round-trip."""
    ctx = x.ctx
    terms = []
    for idx, c in enumerate(x.coords):
        if ctx._bis_zero(c):
            continue
        coef = _format_base(ctx, c)
        gens = [i + 1 for i in range(len(ctx.tower)) if idx & (1 << i)]
        if gens:
            term = coef + "".join("*g%d" % g for g in gens)
        else:
            term = coef
        terms.append(term)
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def _format_base(ctx, c):
    if ctx.kind == "rational":
        if c.denominator == 1:
            return str(c.numerator)
        return "%d/%d" % (c.numerator, c.denominator)
    if ctx.kind == "gfp":
        return str(c)
    parts = []
    for i, v in enumerate(c):
        if v == 0:
            continue
        if i == 0:
            parts.append(str(v))
        elif i == 1:
            parts.append("%d*t" % v if v != 1 else "t")
        else:
            parts.append("%d*t^%d" % (v, i) if v != 1 else "t^%d" % i)
    if not parts:
        return "0"
    body = "+".join(parts)
    return "(%s)" % body if len(parts) > 1 or ctx.tower else body


def parse_scalar(text, ctx):
    """Parse the scalar grammar in the given context."""
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty scalar text", 0)
    pos = 0
    total = ctx.zero()
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        pos = 1
    while pos <= len(s):
        if pos == len(s):
            raise ParseError("dangling sign in %r" % text, pos)
        term, pos = _parse_term(s, pos, ctx)
        total = total + (term if sign == 1 else -term)
        if pos == len(s):
            return total
        if s[pos] not in "+-":
            raise ParseError("expected '+' or '-' in %r" % text, pos)
        sign = -1 if s[pos] == "-" else 1
        pos += 1
    return total


def _parse_term(s, pos, ctx):
    factors = []
    while True:
        f, pos = _parse_factor(s, pos, ctx)
        factors.append(f)
        if pos < len(s) and s[pos] == "*":
            pos += 1
            continue
        break
    term = ctx.one()
    for f in factors:
        term = term * f
    return term, pos


def _parse_factor(s, pos, ctx):
    if pos >= len(s):
        raise ParseError("unexpected end of scalar text", pos)
    ch = s[pos]
    if ch == "(":
        depth = 1
        j = pos + 1
        while j < len(s) and depth:
            if s[j] == "(":
                depth += 1
            elif s[j] == ")":
                depth -= 1
            j += 1
        if depth:
            raise ParseError("unbalanced parenthesis", pos)
        inner = parse_scalar(s[pos + 1:j - 1], ctx)
        return inner, j
    if ch == "g":
        j = pos + 1
        while j < len(s) and s[j].isdigit():
            j += 1
        if j == pos + 1:
            raise ParseError("generator needs an index", pos)
        idx = int(s[pos + 1:j])
        if idx < 1 or idx > len(ctx.tower):
            raise ParseError("no generator g%d in context" % idx, pos)
        return ctx.generator(idx), j
    if ch == "t":
        if ctx.kind != "gfq":
            raise ParseError("'t' only valid over GF(p^k)", pos)
        j = pos + 1
        power = 1
        if j < len(s) and s[j] == "^":
            j += 1
            k = j
            while k < len(s) and s[k].isdigit():
                k += 1
            if k == j:
                raise ParseError("exponent expected after '^'", j)
            power = int(s[j:k])
            j = k
        if len(ctx.modulus) < 2:
            raise ParseError("'t' needs extension degree >= 2", pos)
        t = ctx.base_element((0, 1) + (0,) * (len(ctx.modulus) - 2))
        return t ** power, j
    if ch.isdigit():
        j = pos
        while j < len(s) and s[j].isdigit():
            j += 1
        num = int(s[pos:j])
        if j < len(s) and s[j] == "/":
            k = j + 1
            while k < len(s) and s[k].isdigit():
                k += 1
            if k == j + 1:
                raise ParseError("denominator expected", j)
            den = int(s[j + 1:k])
            if ctx.kind == "rational":
                return ctx.scalar(Fraction(num, den)), k
            return ctx.scalar(num) / ctx.scalar(den), k
        return ctx.scalar(num), j
    raise ParseError("unexpected character %r" % ch, pos)


# -- context merging -----------------------------------------------------------

def merge_contexts(dst, src, policy=EXTEND):
    """Extend dst so that every adjunction of src has a root in it.

    Both contexts must share the base field.  Returns the merged context;
    the roots are located (or adjoined) in src's tower order, so merging is
    deterministic.
    """
    if (dst.kind, dst.p, dst.modulus) != (src.kind, src.p, src.modulus):
        raise ContextMismatch("cannot merge towers over different bases")
    cur = dst
    roots = []
    for height, (kind, coords) in enumerate(src.tower):
        val = Scalar(src.truncated(height), coords)
        val_m = embed_scalar(val, roots, cur)
        if kind == _SQRT:
            r, cur = sqrt_or_adjoin(val_m, policy)
        else:
            r, cur = artin_schreier_root_or_adjoin(val_m, policy)
        roots = [x.promote(cur) for x in roots]
        roots.append(r)
    return cur


def embed_scalar(s, gen_images, ctx):
    """Map a tower scalar through generator images into another context."""
    total = ctx.zero()
    for idx, c in enumerate(s.coords):
        if s.ctx._bis_zero(c):
            continue
        term = ctx.base_element(c)
        bit = 0
        k = idx
        while k:
            if k & 1:
                term = term * gen_images[bit]
            k >>= 1
            bit += 1
        total = total + term
    return total


# -- convenience constructors ---------------------------------------------------

def rationals(tower_cap=16):
    return FieldContext("rational", tower_cap=tower_cap)


def prime_field(p, tower_cap=16):
    return FieldContext("gfp", p, tower_cap=tower_cap)


def finite_field(p, modulus, tower_cap=16):
    """GF(p^k) with the given monic modulus X^k + c_{k-1}X^{k-1} + ... + c_0,
    passed as the low coefficient list (c_0, ..., c_{k-1})."""
    return FieldContext("gfq", p, tuple(modulus), tower_cap=tower_cap)


def gf4(tower_cap=16):
    """GF(4) as GF(2)[t]/(t^2+t+1)."""
    return finite_field(2, (1, 1), tower_cap=tower_cap)
