"""Lubin-Tate series, their formal group laws and the bracket series.

A Lubin-Tate series for the uniformizer w of Z_p satisfies
P(X) = wX mod X^2 and P(X) = X^p mod w.  The group law G_P and the brackets
[a]_{P,P~} are built degree by degree from their functional equations:
at total degree k the unknown homogeneous part H enters the equation
linearly through (w - w^k) H, which is invertible up to the factor w that
the lower-degree residual is always divisible by.

Coefficients are exact rationals with denominators prime to p.  For
evaluation at torsion points the bracket can instead be computed modulo a
power of p, which keeps the numbers small at high degree.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from .errors import LinearStepSingular, NotLubinTate, ValidationError, WindowTooShort
from .padic_core import is_prime, poly_trim, v_p_frac


@dataclass(frozen=True)
class LubinTateData:
    p: int
    w: Fraction
    P: tuple  # coefficients c_0..c_deg as Fractions
    is_polynomial: bool = True

    @property
    def degree(self):
        return len(self.P) - 1

    def integer_coefficients(self):
        return tuple(int(c) for c in self.P)

    def to_json(self):
        return {"p": self.p, "w": _fstr(self.w), "P": [_fstr(c) for c in self.P]}


def _fstr(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def validate(P, w, p=None):
    """Check both Lubin-Tate congruences and return the validated data."""
    w = Fraction(w)
    coeffs = tuple(Fraction(c) for c in poly_trim([Fraction(c) for c in P]))
    if p is None:
        num = abs(w.numerator)
        p = next((q for q in range(2, num + 1) if num % q == 0 and is_prime(q)), None)
        if p is None:
            raise ValidationError("w", "w must be p times a unit")
    if not is_prime(p):
        raise ValidationError("p", f"{p} is not prime")
    if v_p_frac(w, p) != 1:
        raise NotLubinTate("w is a uniformizer", 1, f"(v(w) = {v_p_frac(w, p)})")
    for i, c in enumerate(coeffs):
        if c and v_p_frac(c, p) < 0:
            raise NotLubinTate("integral coefficients", i)
    lin = coeffs[1] if len(coeffs) > 1 else Fraction(0)
    if (coeffs[0] if coeffs else 0) != 0:
        raise NotLubinTate("P = wX mod X^2", 0, "(nonzero constant term)")
    if lin != w:
        raise NotLubinTate("P = wX mod X^2", 1, f"(linear coefficient {lin} != w)")
    for i in range(max(len(coeffs), p + 1)):
        c = coeffs[i] if i < len(coeffs) else Fraction(0)
        target = Fraction(1) if i == p else Fraction(0)
        diff = c - target
        if diff and v_p_frac(diff, p) < v_p_frac(w, p):
            raise NotLubinTate("P = X^p mod w", i)
    return LubinTateData(p, w, coeffs)


def standard(p, kind="monomial", w=None):
    """The two families used throughout: wX + X^p and (X+1)^p - 1."""
    if kind == "monomial":
        w = Fraction(p if w is None else w)
        coeffs = [0, w] + [0] * (p - 2) + [1]
        return validate(coeffs, w, p)
    if kind == "multiplicative":
        coeffs = [math.comb(p, i) for i in range(p + 1)]
        coeffs[0] = 0
        return validate(coeffs, p, p)
    raise ValueError(f"unknown family {kind}")


# ---------------------------------------------------------------------------
# univariate truncated series (lists of Fractions, index = degree)

class _Arith:
    """Exact rationals, or rationals reduced modulo p^M."""

    def __init__(self, p, M=None):
        self.p = p
        self.M = M
        self.mod = None if M is None else p ** M

    def red(self, q):
        q = Fraction(q)
        if self.mod is None or q == 0:
            return q
        den = q.denominator
        k = 0
        while den % self.p == 0:
            den //= self.p
            k += 1
        num = q.numerator * pow(den, -1, self.mod) % self.mod
        return Fraction(num, self.p ** k) if k else Fraction(num)


def _mul_trunc(f, g, N, ar):
    out = [Fraction(0)] * (N + 1)
    for i, a in enumerate(f):
        if a and i <= N:
            for j in range(min(len(g), N + 1 - i)):
                b = g[j]
                if b:
                    out[i + j] += a * b
    return [ar.red(c) for c in out]


def _compose_trunc(f, g, N, ar):
    """f(g(X)) truncated at degree N; g has zero constant term."""
    out = [Fraction(0)] * (N + 1)
    for c in reversed(f):
        out = _mul_trunc(out, g, N, ar)
        out[0] += c
        out[0] = ar.red(out[0])
    return out


def _pad(f, N):
    f = list(f)[: N + 1]
    return f + [Fraction(0)] * (N + 1 - len(f))


def bracket(a, P, Pt=None, N=12, modulus_digits=None):
    """Coefficients of [a]_{P,P~}(X) up to degree N (index = degree).

    ``[a] = aX mod X^2`` and ``[a](P(X)) = P~([a](X))``.  With
    ``modulus_digits`` the computation is done modulo p^(digits + N + 2).
    """
    if Pt is None:
        Pt = P
    if P.w != Pt.w or P.p != Pt.p:
        raise ValidationError("P~", "bracket series need the same uniformizer")
    p = P.p
    w = P.w
    ar = _Arith(p, None if modulus_digits is None else modulus_digits + N + 2)
    F = [Fraction(0)] * (N + 1)
    if N >= 1:
        F[1] = ar.red(Fraction(a))
    Pp = _pad(P.P, N)
    for k in range(2, N + 1):
        lhs = _compose_trunc(F, Pp, k, ar)[k]
        rhs = _compose_trunc(list(Pt.P), F, k, ar)[k]
        denom = w ** k - w
        if denom == 0:
            raise LinearStepSingular(f"w^k - w vanishes at degree {k}")
        val = (rhs - lhs) / denom
        if val and v_p_frac(val, p) < 0 and modulus_digits is None:
            raise LinearStepSingular(f"degree {k} coefficient is not p-integral")
        F[k] = ar.red(val)
    return F


def compose(f, g, N):
    return _compose_trunc(f, _pad(g, N), N, _Arith(2))


def eval_series(coeffs, x):
    """Evaluate a truncated series (coefficient list) at a ring element."""
    acc = x.ring.zero()
    for c in reversed(list(coeffs)):
        acc = acc * x + Fraction(c)
    return acc


def torsion_equiv(x, P, Pt, N=None):
    """[1]_{P,P~}(x) for a point x of positive valuation.

    The bracket is truncated at degree N; the neglected tail has valuation
    at least (N+1) v(x), which must reach the working precision of x's ring.
    """
    vx = x.valuation()
    if not vx > 0:
        raise ValidationError("x", "needs positive valuation")
    target = Fraction(x.ring.cap, x.ring.e)
    needed = math.ceil(target / vx)
    if N is None:
        N = needed
    elif (N + 1) * vx < target:
        raise WindowTooShort(f"bracket truncated at degree {N} is too short", needed)
    coeffs = bracket(1, P, Pt, N, modulus_digits=x.ring.budget.working_digits)
    y = eval_series(coeffs, x)
    if not (y - x).is_zero() and (y - x).valuation() < 2 * vx:
        raise ValidationError("x", "bracket image is not within |x|^2 of x")
    return y


def iso_test(P, Pt):
    """G_P and G_P~ are isomorphic exactly when the uniformizers agree."""
    return P.p == Pt.p and P.w == Pt.w


# ---------------------------------------------------------------------------
# bivariate truncated series and the formal group law

class Bivariate:
    """Truncated multivariate series stored sparsely by exponent tuple.

    Used with two variables for group laws and three for associativity.
    """

    def __init__(self, terms, N):
        self.N = N
        self.terms = {k: Fraction(v) for k, v in terms.items() if v and sum(k) <= N}

    def __add__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return Bivariate(t, min(self.N, other.N))

    def __sub__(self, other):
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) - v
        return Bivariate(t, min(self.N, other.N))

    def __mul__(self, other):
        if not isinstance(other, Bivariate):
            return Bivariate({k: v * other for k, v in self.terms.items()}, self.N)
        N = min(self.N, other.N)
        t = {}
        for a, u in self.terms.items():
            sa = sum(a)
            for c, v in other.terms.items():
                if sa + sum(c) <= N:
                    key = tuple(x + y for x, y in zip(a, c))
                    t[key] = t.get(key, 0) + u * v
        return Bivariate(t, N)

    def homogeneous(self, k):
        return {key: v for key, v in self.terms.items() if sum(key) == k}

    def swap(self):
        return Bivariate({(b, a): v for (a, b), v in self.terms.items()}, self.N)

    def is_zero(self):
        return not self.terms

    def to_json(self):
        return {"N": self.N, "terms": {",".join(map(str, k)): _fstr(v) for k, v in sorted(self.terms.items())}}


def _var(i, nvars, N):
    key = tuple(1 if j == i else 0 for j in range(nvars))
    return Bivariate({key: 1}, N)


def _one(nvars, N):
    return Bivariate({(0,) * nvars: 1}, N)


def _univariate_in(f, var, N, nvars=2):
    """f in the given variable as a multivariate series."""
    return Bivariate({tuple(i if j == var else 0 for j in range(nvars)): c for i, c in enumerate(f) if c}, N)


def _substitute(G, A, B, N):
    """G(A, B) for bivariate A, B with zero constant terms."""
    maxa = max((a for a, _ in G.terms), default=0)
    maxb = max((b for _, b in G.terms), default=0)
    nv = len(next(iter(A.terms))) if A.terms else len(next(iter(B.terms)))
    apow = [_one(nv, N)]
    for _ in range(maxa):
        apow.append(apow[-1] * A)
    bpow = [_one(nv, N)]
    for _ in range(maxb):
        bpow.append(bpow[-1] * B)
    out = Bivariate({}, N)
    for (a, b), c in G.terms.items():
        out = out + (apow[a] * bpow[b]) * c
    return out


def _apply_poly(P, G, N):
    nv = len(next(iter(G.terms))) if G.terms else 2
    out = Bivariate({}, N)
    power = _one(nv, N)
    for c in P:
        if c:
            out = out + power * c
        power = power * G
    return out


@dataclass
class FormalGroupLaw:
    G: Bivariate
    P: LubinTateData
    N: int

    def coefficient(self, i, j):
        return self.G.terms.get((i, j), Fraction(0))

    def check(self):
        """Residuals of the defining properties, each a Bivariate."""
        N = self.N
        G = self.G
        X = Bivariate({(1, 0): 1}, N)
        zero = Bivariate({}, N)
        out = {}
        out["unit"] = _substitute(G, X, zero, N) - X
        out["commutative"] = G - G.swap()
        PX = _univariate_in(self.P.P, 0, N)
        PY = _univariate_in(self.P.P, 1, N)
        out["endomorphism"] = _apply_poly(self.P.P, G, N) - _substitute(G, PX, PY, N)
        return out

    def check_associative(self):
        """G(G(X,Y),Z) - G(X,G(Y,Z)) in three variables."""
        N = self.N
        X, Y, Z = (_var(i, 3, N) for i in range(3))
        G3 = Bivariate({(a, b, 0): c for (a, b), c in self.G.terms.items()}, N)
        left = _substitute(self.G, G3, Z, N)
        right = _substitute(self.G, X, _substitute(self.G, Y, Z, N), N)
        return left - right

    def evaluate(self, x, y):
        """G(x, y) for ring elements or truncated univariate series."""
        acc = None
        for (a, b), c in self.G.terms.items():
            term = (x ** a) * (y ** b) * c
            acc = term if acc is None else acc + term
        return acc


_GROUP_CACHE = {}


def group_law(P, N=12):
    """The formal group law G_P to total degree N, built degree by degree."""
    key = (P, N)
    if key in _GROUP_CACHE:
        return _GROUP_CACHE[key]
    w = P.w
    G = Bivariate({(1, 0): 1, (0, 1): 1}, N)
    PX = _univariate_in(P.P, 0, N)
    PY = _univariate_in(P.P, 1, N)
    for k in range(2, N + 1):
        Gk = Bivariate(G.terms, k)
        lhs = _apply_poly(P.P, Gk, k).homogeneous(k)
        rhs = _substitute(Gk, Bivariate(PX.terms, k), Bivariate(PY.terms, k), k).homogeneous(k)
        denom = w - w ** k
        if denom == 0:
            raise LinearStepSingular(f"w - w^k vanishes at degree {k}")
        terms = dict(G.terms)
        for mono in set(lhs) | set(rhs):
            val = (rhs.get(mono, 0) - lhs.get(mono, 0)) / denom
            if val and v_p_frac(val, P.p) < 0:
                raise LinearStepSingular(f"coefficient {mono} is not p-integral")
            if val:
                terms[mono] = val
        G = Bivariate(terms, N)
    fgl = FormalGroupLaw(G, P, N)
    _GROUP_CACHE[key] = fgl
    return fgl


def series_add(F1, F2, G, N):
    """G(F1(X), F2(X)) for univariate coefficient lists."""
    A = _univariate_in(F1, 0, N)
    B = _univariate_in(F2, 0, N)
    out = _substitute(G.G, A, B, N)
    res = [Fraction(0)] * (N + 1)
    for (a, b), c in out.terms.items():
        res[a] += c
    return res
