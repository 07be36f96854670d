"""Truncated arithmetic in Z_p and in the totally ramified Lubin-Tate tower.

The level-s ring is Z_p[x]/(Phi_s(x)) where Phi_s = P^(s+1)/P^(s) is an
Eisenstein polynomial of degree e = p^s (p - 1); the class of x is the
torsion point pi_s.  Elements are stored in the power basis of x as
``p**k * sum(c_i x**i)`` with integer ``c_i``.  Because the basis
valuations i/e are pairwise distinct modulo 1, the valuation of an element
is the exact minimum of ``k + v_p(c_i) + i/e``.

Precision is absolute and measured in units of 1/e (that is, in powers of
the uniformizer).  An element with precision ``B`` is known modulo x**B;
its i-th coefficient is therefore only meaningful modulo
``p**(ceil((B - i)/e) - k)`` and is stored reduced to that modulus.

The base ring Z_p itself is modelled as the degree one ring with modulus
X - p (so x = p and e = 1); it carries no Lubin-Tate data.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

from .errors import (
    HenselFails,
    InsufficientPrecision,
    NonPolynomialSeries,
    NotEisenstein,
    LevelRaiseRequired,
    ValidationError,
)

INF = math.inf


# ---------------------------------------------------------------------------
# integer helpers

def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def v_p(n, p):
    """p-adic valuation of a nonzero integer (``math.inf`` for 0)."""
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def v_p_frac(q, p):
    q = Fraction(q)
    if q == 0:
        return INF
    return v_p(q.numerator, p) - v_p(q.denominator, p)


def v_p_factorial(k, p):
    """Legendre's formula for v_p(k!)."""
    total = 0
    while k:
        k //= p
        total += k
    return total


def _ceil_div(a, b):
    return -((-a) // b)


# ---------------------------------------------------------------------------
# exact integer polynomials (coefficient lists, low degree first)

def poly_trim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_mul(f, g):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_trim(out)


def poly_add(f, g):
    n = max(len(f), len(g))
    return poly_trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)])


def poly_compose(f, g):
    """f(g(X)) for coefficient lists."""
    out = []
    for c in reversed(f):
        out = poly_add(poly_mul(out, g), [c])
    return out


def poly_divmod(f, g):
    """Exact division over Q; returns (quotient, remainder) as Fractions."""
    f = [Fraction(c) for c in poly_trim(f)]
    g = [Fraction(c) for c in poly_trim(g)]
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(f) - len(g) + 1, 0)
    lead = g[-1]
    while len(f) >= len(g) and f:
        c = f[-1] / lead
        shift = len(f) - len(g)
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] -= c * b
        f = poly_trim(f)
    return poly_trim(q), f


# ---------------------------------------------------------------------------
# precision and rings

@dataclass(frozen=True)
class PrecisionBudget:
    """Absolute precision in base-p digits plus internal guard digits."""

    p: int
    n_digits: int = 20
    guard_digits: int = 8

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError("p", f"{self.p} is not prime")
        if self.n_digits < 1:
            raise ValidationError("n_digits", "must be at least 1")
        if self.guard_digits < 0:
            raise ValidationError("guard_digits", "must be non-negative")

    @classmethod
    def for_series(cls, p, n_digits, truncation, level=0):
        """Budget with the default guard rule ceil(N_T/(p-1)) + s + 2."""
        guard = _ceil_div(truncation, p - 1) + level + 2
        return cls(p, n_digits, guard)

    @property
    def working_digits(self):
        return self.n_digits + self.guard_digits


def _tower_modulus(P, s):
    """Phi_s = P^(s+1)(X) / P^(s)(X) with P^(0) = X, as integers (monic)."""
    inner = [0, 1]
    for _ in range(s):
        inner = poly_compose(P, inner)
    outer = poly_compose(P, inner)
    q, r = poly_divmod(outer, inner)
    if r:
        raise NotEisenstein("P^(s) does not divide P^(s+1)")
    lead = q[-1]
    q = [c / lead for c in q]
    if any(c.denominator != 1 for c in q):
        raise NotEisenstein("tower modulus does not have integer coefficients")
    return tuple(int(c) for c in q)


def _check_eisenstein(mod, p):
    if mod[-1] != 1:
        raise NotEisenstein("modulus is not monic")
    if v_p(mod[0], p) != 1:
        raise NotEisenstein(f"constant term {mod[0]} does not have valuation 1")
    for c in mod[1:-1]:
        if c % p:
            raise NotEisenstein(f"interior coefficient {c} is not divisible by p")


@dataclass(frozen=True, eq=False)
class RingDescriptor:
    """The ring Z_p[x]/(Phi) of a tower level, or Z_p itself (level None)."""

    p: int
    level: object  # int >= 0 for tower rings, None for Z_p
    P: object  # tuple of integer coefficients of P, or None
    budget: PrecisionBudget
    modulus: tuple = field(default=())
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.modulus:
            if self.level is None:
                mod = (-self.p, 1)
            else:
                mod = _tower_modulus(list(self.P), self.level)
            object.__setattr__(self, "modulus", mod)
        _check_eisenstein(self.modulus, self.p)

    # identity ------------------------------------------------------------
    def _key(self):
        return (self.p, self.level, self.P, self.budget)

    def __eq__(self, other):
        return isinstance(other, RingDescriptor) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.level is None:
            return f"Z_{self.p}(prec={self.budget.n_digits})"
        return f"O_K{self.level}(p={self.p}, P={list(self.P)}, prec={self.budget.n_digits})"

    # derived data ----------------------------------------------------------
    @property
    def e(self):
        return len(self.modulus) - 1

    @property
    def cap(self):
        """Working absolute precision in uniformizer units."""
        return self.e * self.budget.working_digits

    @property
    def reported_cap(self):
        return self.e * self.budget.n_digits

    def ppow(self, n):
        cache = self._cache.setdefault("ppow", {})
        r = cache.get(n)
        if r is None:
            r = self.p ** n
            cache[n] = r
        return r

    @property
    def is_base(self):
        return self.level is None

    # element constructors ---------------------------------------------------
    def element(self, coeffs, k=0, prec=None):
        return ExtElement(self, coeffs, k, self.cap if prec is None else prec)

    def zero(self):
        return ExtElement(self, (0,) * self.e, 0, self.cap)

    def one(self):
        return self(1)

    def gen(self):
        """The class of x (pi_s at a tower level, p in the base ring)."""
        if self.e == 1:
            return self(-self.modulus[0])
        return ExtElement(self, (0, 1) + (0,) * (self.e - 2), 0, self.cap)

    def __call__(self, value):
        return self.coerce(value)

    def from_rational(self, q):
        q = Fraction(q)
        if q == 0:
            return self.zero()
        k = v_p(q.numerator, self.p) - v_p(q.denominator, self.p)
        num = q.numerator // self.p ** max(k, 0)
        den = q.denominator // self.p ** max(-k, 0)
        ex = _ceil_div(self.cap, self.e) - k
        if ex <= 0:
            return ExtElement(self, (0,) * self.e, 0, self.cap)
        mod = self.ppow(ex)
        c0 = num * pow(den, -1, mod) % mod
        return ExtElement(self, (c0,) + (0,) * (self.e - 1), k, self.cap)

    def from_coefficients(self, values):
        """Element sum(values[i] * x**i) with rational values.

        Lists longer than the degree e are allowed; the extra powers of x
        reduce through the modulus.
        """
        values = list(values)
        x = self.gen()
        out = self.zero()
        power = self.one()
        for q in values:
            if Fraction(q) != 0:
                out = out + power * self.from_rational(q)
            power = power * x
        return out

    def coerce(self, value):
        if isinstance(value, ExtElement):
            if value.ring == self:
                return value
            return self._embed(value)
        if isinstance(value, (int, Fraction)):
            return self.from_rational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into {self!r}")

    def _embed(self, a):
        src = a.ring
        if src.p != self.p:
            raise ValidationError("ring", "different primes")
        if src.is_base:
            value = Fraction(a.coeffs[0]) * Fraction(self.p) ** a.k
            out = self.from_rational(value)
            return out.with_precision(a.prec * self.e)
        if self.is_base or src.P != self.P or src.level > self.level:
            raise ValidationError("ring", f"cannot embed {src!r} into {self!r}")
        y = pi_at(self, src.level)
        out = self.zero()
        power = self.one()
        for c in a.coeffs:
            if c:
                out = out + power * c
            power = power * y
        out = out.shift(a.k)
        return out.with_precision(a.prec * (self.e // src.e))

    def raised(self, level):
        """The tower ring of the same P at a higher level."""
        if self.P is None:
            raise LevelRaiseRequired(level)
        if not self.is_base and level <= self.level:
            return self
        return make_tower(self.P, level, self.budget)

    def with_budget(self, budget):
        if self.is_base:
            return base_ring(budget)
        return make_tower(self.P, self.level, budget)

    def to_json(self):
        return {"p": self.p, "level": self.level,
                "P": None if self.P is None else [str(c) for c in self.P]}


_RING_CACHE = {}


def base_ring(budget):
    """Z_p at the given budget, with an attached P if one is needed later."""
    key = ("base", budget)
    r = _RING_CACHE.get(key)
    if r is None:
        r = RingDescriptor(budget.p, None, None, budget)
        _RING_CACHE[key] = r
    return r


def _lt_coefficients(P):
    coeffs = getattr(P, "P", P)
    coeffs = list(coeffs)
    if getattr(P, "is_polynomial", True) is False:
        raise NonPolynomialSeries("torsion towers need a polynomial Lubin-Tate series")
    out = []
    for c in coeffs:
        c = Fraction(c)
        if c.denominator != 1:
            raise NonPolynomialSeries("tower polynomials must have integer coefficients")
        out.append(int(c))
    return tuple(poly_trim(out))


def make_tower(P, s, budget):
    """Ring of level s for the Lubin-Tate polynomial P (coefficients or data)."""
    if s < 0:
        raise ValidationError("level", "must be non-negative")
    coeffs = _lt_coefficients(P)
    key = ("tower", coeffs, s, budget)
    r = _RING_CACHE.get(key)
    if r is None:
        r = RingDescriptor(budget.p, s, coeffs, budget)
        expected = budget.p ** s * (budget.p - 1)
        if r.e != expected:
            raise NotEisenstein(f"tower modulus has degree {r.e}, expected {expected}")
        _RING_CACHE[key] = r
    return r


# ---------------------------------------------------------------------------
# elements

class ExtElement:
    """Element p**k * sum(c_i x**i) known modulo x**prec."""

    __slots__ = ("ring", "coeffs", "k", "prec")

    def __init__(self, ring, coeffs, k=0, prec=None):
        e = ring.e
        p = ring.p
        if prec is None:
            prec = ring.cap
        prec = min(prec, ring.cap)
        coeffs = list(coeffs)
        if len(coeffs) < e:
            coeffs += [0] * (e - len(coeffs))
        out = []
        low = INF
        for i, c in enumerate(coeffs):
            ex = _ceil_div(prec - i, e) - k
            if ex <= 0 or c == 0:
                out.append(0)
                continue
            c %= ring.ppow(ex)
            out.append(c)
            if c and low > 0:
                low = min(low, v_p(c, p))
        if low == INF:
            out = [0] * e
            k = 0
        elif low > 0:
            d = ring.ppow(low)
            out = [c // d for c in out]
            k += low
        self.ring = ring
        self.coeffs = tuple(out)
        self.k = k
        self.prec = prec

    # basic queries -----------------------------------------------------------
    def is_zero(self):
        """True when every digit vanishes at the carried precision."""
        return not any(self.coeffs)

    def scaled_valuation(self):
        """e * valuation as an integer (the precision if zero)."""
        if self.is_zero():
            return self.prec
        e = self.ring.e
        p = self.ring.p
        return min(e * (self.k + v_p(c, p)) + i for i, c in enumerate(self.coeffs) if c)

    def valuation(self):
        if self.is_zero():
            return INF
        return Fraction(self.scaled_valuation(), self.ring.e)

    @property
    def precision(self):
        """Absolute precision as a valuation."""
        return Fraction(self.prec, self.ring.e)

    def zero_bound(self):
        """For a zero-to-precision element, the valuation it is known to exceed."""
        return self.precision if self.is_zero() else None

    def residue(self):
        """Image in the residue field F_p (requires valuation >= 0)."""
        if self.is_zero():
            return 0
        if self.k < 0 and self.scaled_valuation() < 0:
            raise InsufficientPrecision("residue of a non-integral element")
        if self.k > 0:
            return 0
        if self.k == 0:
            return self.coeffs[0] % self.ring.p
        return (self.coeffs[0] // self.ring.ppow(-self.k)) % self.ring.p

    def is_unit(self):
        return not self.is_zero() and self.scaled_valuation() == 0

    def coefficient_values(self):
        """The rationals q_i with self = sum q_i x**i."""
        f = Fraction(self.ring.p) ** self.k
        return [c * f for c in self.coeffs]

    def balanced_values(self):
        """Like coefficient_values, with each digit block taken in (-m/2, m/2]."""
        e = self.ring.e
        out = []
        for i, c in enumerate(self.coeffs):
            ex = _ceil_div(self.prec - i, e) - self.k
            if c and ex > 0:
                mod = self.ring.ppow(ex)
                if c > mod // 2:
                    c -= mod
            out.append(Fraction(c) * Fraction(self.ring.p) ** self.k)
        return out

    def to_json(self):
        """A rational string when only the constant term survives, else a list in powers of x."""
        vals = self.balanced_values()
        enc = [str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}" for q in vals]
        if not any(vals[1:]):
            return enc[0]
        return enc

    def __repr__(self):
        terms = []
        for i, q in enumerate(self.coefficient_values()):
            if q:
                terms.append(f"{q}" if i == 0 else f"{q}*x^{i}")
        body = " + ".join(terms) if terms else "0"
        return f"({body} + O(x^{self.prec}))"

    # precision manipulation -----------------------------------------------------
    def with_precision(self, prec):
        if prec >= self.prec:
            return self
        return ExtElement(self.ring, self.coeffs, self.k, prec)

    def shift(self, j):
        """Multiply by p**j (j may be negative; digits are consumed)."""
        if j == 0:
            return self
        e = self.ring.e
        return ExtElement(self.ring, self.coeffs, self.k + j, self.prec + e * j)

    def div_p(self, j=1):
        return self.shift(-j)

    # arithmetic ------------------------------------------------------------------
    def _other(self, other):
        if isinstance(other, ExtElement):
            if other.ring is self.ring or other.ring == self.ring:
                return other
            if other.ring.is_base or (not self.ring.is_base and other.ring.level < self.ring.level):
                return self.ring.coerce(other)
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            return self.ring.from_rational(other)
        return NotImplemented

    def _add(self, other, sign):
        ring = self.ring
        prec = min(self.prec, other.prec)
        if other.is_zero():
            return self.with_precision(prec)
        if self.is_zero():
            r = other if sign > 0 else -other
            return r.with_precision(prec)
        k = min(self.k, other.k)
        fa = ring.ppow(self.k - k)
        fb = ring.ppow(other.k - k)
        if sign > 0:
            coeffs = [a * fa + b * fb for a, b in zip(self.coeffs, other.coeffs)]
        else:
            coeffs = [a * fa - b * fb for a, b in zip(self.coeffs, other.coeffs)]
        return ExtElement(ring, coeffs, k, prec)

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self._add(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self._add(other, -1)

    def __rsub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other._add(self, -1)

    def __neg__(self):
        return ExtElement(self.ring, [-c for c in self.coeffs], self.k, self.prec)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            if other == 0:
                return self.ring.zero()
            j = v_p(other, self.ring.p)
            u = other // self.ring.ppow(j)
            e = self.ring.e
            return ExtElement(self.ring, [c * u for c in self.coeffs], self.k + j, self.prec + e * j)
        other = self._other(other)
        if other is NotImplemented:
            return other
        ring = self.ring
        e = ring.e
        va = self.scaled_valuation()
        vb = other.scaled_valuation()
        prec = min(self.prec + vb, other.prec + va, ring.cap)
        if self.is_zero() or other.is_zero():
            return ExtElement(ring, (0,) * e, 0, prec)
        a = self.coeffs
        b = other.coeffs
        if e == 1:
            return ExtElement(ring, (a[0] * b[0],), self.k + other.k, prec)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return ExtElement(ring, reduce_mod_modulus(ring, prod), self.k + other.k, prec)

    __rmul__ = __mul__

    def inverse(self):
        ring = self.ring
        if self.is_zero():
            raise InsufficientPrecision("inverse of an element that is zero to precision")
        e = ring.e
        ev = self.scaled_valuation()
        rel = self.prec - ev
        u = ExtElement(ring, self.coeffs, 0, self.prec - e * self.k)
        t = ev - e * self.k
        if t == 0:
            w = u
        else:
            w = (u * _x_power(ring, e - t)).div_p(1)
        # Newton iteration for the unit w
        z = ring.from_rational(pow(w.residue(), -1, ring.p))
        for _ in range(2 + (max(ring.cap, 1)).bit_length()):
            err = w * z - 1
            if err.is_zero():
                break
            z = z - z * err
        inv_u = z if t == 0 else (z * _x_power(ring, e - t)).div_p(1)
        out = inv_u.shift(-self.k)
        return out.with_precision(rel - ev)

    def __truediv__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError
            j = v_p(other, self.ring.p)
            u = other // self.ring.ppow(j)
            r = self.div_p(j)
            if u in (1,):
                return r
            return r * self.ring.from_rational(Fraction(1, u))
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._other(other) if not isinstance(other, ExtElement) else other
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    __hash__ = None


def reduce_mod_modulus(ring, prod):
    """Reduce an integer polynomial of degree < 2e-1 modulo the ring's modulus."""
    e = ring.e
    prod = list(prod)
    mod = ring.modulus
    for d in range(len(prod) - 1, e - 1, -1):
        c = prod[d]
        if c:
            base = d - e
            for j in range(e):
                m = mod[j]
                if m:
                    prod[base + j] -= c * m
    return prod[:e]


def _x_power(ring, j):
    cache = ring._cache.setdefault("xpow", {})
    r = cache.get(j)
    if r is None:
        if j < ring.e:
            if ring.e == 1:
                r = ring.from_rational((-ring.modulus[0]) ** j)
            else:
                coeffs = [0] * ring.e
                coeffs[j] = 1
                r = ExtElement(ring, coeffs, 0, ring.cap)
        else:
            r = _x_power(ring, j - 1) * ring.gen()
        cache[j] = r
    return r


# ---------------------------------------------------------------------------
# public operations

def val(a, p=None):
    """Exact valuation normalised by v(p) = 1; ``math.inf`` for zero.

    Rationals need ``p``.  Zero-to-precision elements report infinity; their
    precision bound is available through ``a.zero_bound()``.
    """
    if isinstance(a, ExtElement):
        return a.valuation()
    if p is None:
        raise ValueError("p is required for rational input")
    return v_p_frac(a, p)


def pi_at(ring, j):
    """The torsion point pi_j inside the level-s ring, i.e. P^(s-j)(x)."""
    if ring.is_base:
        raise ValidationError("ring", "the base ring holds no torsion points")
    s = ring.level
    if not 0 <= j <= s:
        raise ValidationError("j", f"must lie in 0..{s}")
    cache = ring._cache.setdefault("pi", {})
    if j in cache:
        return cache[j]
    if j == s:
        r = ring.gen()
    else:
        r = evaluate_poly(ring.P, pi_at(ring, j + 1))
    cache[j] = r
    return r


def evaluate_poly(coeffs, x):
    """Horner evaluation of a polynomial with rational or ring coefficients."""
    acc = x.ring.zero()
    for c in reversed(list(coeffs)):
        acc = acc * x + c
    return acc


def _poly_val(c, p):
    if isinstance(c, ExtElement):
        if c.is_zero():
            return None, c.precision
        return c.valuation(), None
    c = Fraction(c)
    if c == 0:
        return None, INF
    return v_p_frac(c, p), None


def newton_polygon(coeffs, p=None):
    """Slopes of the Newton polygon as (root valuation, multiplicity) pairs.

    The lower convex hull of the points (i, v(a_i)) is computed; a segment
    of hull slope -s contributes roots of valuation s.  Roots at zero (from
    vanishing trailing coefficients) are not reported.  The pairs are listed
    from the largest root valuation to the smallest.
    """
    coeffs = list(coeffs)
    if p is None:
        for c in coeffs:
            if isinstance(c, ExtElement):
                p = c.ring.p
                break
    if p is None:
        raise ValueError("p is required for rational coefficients")
    pts = []
    bounds = []
    for i, c in enumerate(coeffs):
        v, bound = _poly_val(c, p)
        if v is not None:
            pts.append((i, Fraction(v)))
        elif bound is not INF and bound is not None:
            bounds.append((i, bound))
    if not pts:
        raise InsufficientPrecision("polynomial is zero to precision")
    last = len(coeffs) - 1
    if pts[-1][0] != last:
        raise InsufficientPrecision("leading coefficient is zero to precision")
    lo = pts[0][0]
    if any(i < lo for i, _ in bounds):
        raise InsufficientPrecision("trailing coefficient is zero to precision")
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    # an unknown coefficient lying strictly below the hull could be a vertex
    for i, b in bounds:
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 < i < x2:
                line = y1 + (y2 - y1) * (i - x1) / (x2 - x1)
                if b < line:
                    raise InsufficientPrecision(f"coefficient {i} is zero to precision below the hull")
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.append((-(y2 - y1) / (x2 - x1), x2 - x1))
    return out


def _derivative(coeffs):
    return [c * i for i, c in enumerate(coeffs)][1:]


def hensel_root(coeffs, x0):
    """Newton iteration from x0 to a root of the polynomial ``coeffs``.

    Requires v(f(x0)) > 2 v(f'(x0)).
    """
    ring = x0.ring
    f = [ring.coerce(c) for c in coeffs]
    df = _derivative(f)
    fx = evaluate_poly(f, x0)
    if fx.is_zero():
        return x0
    dfx = evaluate_poly(df, x0)
    if dfx.is_zero() or fx.valuation() <= 2 * dfx.valuation():
        raise HenselFails(f"v(f(x0)) = {fx.valuation()} is not above 2 v(f'(x0)) = {2 * dfx.valuation() if not dfx.is_zero() else INF}")
    x = x0
    for _ in range(4 + ring.cap.bit_length()):
        fx = evaluate_poly(f, x)
        if fx.is_zero():
            break
        dfx = evaluate_poly(df, x)
        step = fx / dfx
        if step.is_zero():
            break
        x = x - step
    return x
