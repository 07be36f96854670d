"""Truncated Laurent series with exact per-coefficient valuations.

A series stores its nonzero coefficients in a dictionary together with the
interval of degrees on which it is known.  ``lo`` / ``hi`` are inclusive
truncation bounds; ``None`` means the series is exact in that direction
(every coefficient beyond the stored support is zero).  So an ordinary power
series in T has ``lo=None`` and a finite ``hi``, a series in T^-1 has a finite
``lo`` and ``hi=None``, and a Laurent polynomial has both bounds ``None``.

Coefficients are either ``ExtElement`` values of one ring or exact
``Fraction`` values (``ring=None``, with the prime given separately).
"""

from fractions import Fraction
import math

from .errors import WindowExhausted
from .padic_core import ExtElement, reduce_mod_modulus, v_p_frac

INF = math.inf

# products with at least this many coefficient pairs go through one big
# integer multiplication (Kronecker substitution) instead of a double loop
_KRONECKER_MIN = 256


def _is_zero(c):
    if isinstance(c, ExtElement):
        return c.is_zero()
    return c == 0


def scalar_val(c, p):
    if isinstance(c, ExtElement):
        return c.valuation()
    return v_p_frac(c, p)


class LaurentSeries:
    __slots__ = ("coeffs", "lo", "hi", "ring", "p")

    def __init__(self, coeffs, lo=None, hi=None, ring=None, p=None):
        if ring is not None:
            p = ring.p
        if p is None:
            raise ValueError("a prime or a ring is required")
        clean = {}
        for d, c in coeffs.items():
            if lo is not None and d < lo:
                continue
            if hi is not None and d > hi:
                continue
            if ring is not None and not isinstance(c, ExtElement):
                c = ring(c)
            elif ring is None:
                c = Fraction(c)
            if not _is_zero(c):
                clean[d] = c
        self.coeffs = clean
        self.lo = lo
        self.hi = hi
        self.ring = ring
        self.p = p

    # constructors -----------------------------------------------------------
    @classmethod
    def polynomial(cls, coeffs, ring=None, p=None):
        return cls(dict(coeffs), None, None, ring, p)

    @classmethod
    def power_series(cls, coeffs, hi, ring=None, p=None):
        if isinstance(coeffs, (list, tuple)):
            coeffs = dict(enumerate(coeffs))
        return cls(dict(coeffs), None, hi, ring, p)

    @classmethod
    def monomial(cls, c, d, ring=None, p=None):
        return cls({d: c}, None, None, ring, p)

    def _like(self, coeffs, lo, hi):
        out = LaurentSeries.__new__(LaurentSeries)
        out.coeffs = coeffs
        out.lo = lo
        out.hi = hi
        out.ring = self.ring
        out.p = self.p
        return out

    def one(self):
        return self._like({0: self._one()}, None, None)

    def zero(self):
        return self._like({}, None, None)

    def _one(self):
        return self.ring.one() if self.ring is not None else Fraction(1)

    def _scalar(self, c):
        if self.ring is not None:
            return self.ring(c)
        return Fraction(c)

    # queries ------------------------------------------------------------------
    @property
    def window(self):
        lo = self.lo if self.lo is not None else (min(self.coeffs) if self.coeffs else 0)
        hi = self.hi if self.hi is not None else (max(self.coeffs) if self.coeffs else 0)
        return (lo, hi)

    def is_polynomial(self):
        return self.lo is None and self.hi is None

    def known(self, d):
        return (self.lo is None or d >= self.lo) and (self.hi is None or d <= self.hi)

    def __getitem__(self, d):
        if not self.known(d):
            raise WindowExhausted(f"degree {d} lies outside the window {self.window}")
        c = self.coeffs.get(d)
        if c is None:
            return self.ring.zero() if self.ring is not None else Fraction(0)
        return c

    def support(self):
        return sorted(self.coeffs)

    def degree_range(self):
        if not self.coeffs:
            return None
        return min(self.coeffs), max(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def coefficient_valuations(self):
        return {d: scalar_val(c, self.p) for d, c in sorted(self.coeffs.items())}

    def min_valuation(self):
        if not self.coeffs:
            return INF
        return min(scalar_val(c, self.p) for c in self.coeffs.values())

    def gauss_valuation(self, r):
        """min over the stored window of v(a_i) + i*r, with a boundary flag."""
        r = Fraction(r)
        best = INF
        arg = None
        for d, c in self.coeffs.items():
            v = scalar_val(c, self.p) + d * r
            if v < best:
                best = v
                arg = d
        at_boundary = arg is not None and ((self.hi is not None and arg == self.hi) or
                                           (self.lo is not None and arg == self.lo))
        return best, at_boundary

    # arithmetic ----------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, LaurentSeries):
            return other
        return self._like({0: self._scalar(other)} if not _is_zero(self._scalar(other)) else {}, None, None)

    def __add__(self, other):
        other = self._coerce(other)
        lo = _max_opt(self.lo, other.lo)
        hi = _min_opt(self.hi, other.hi)
        out = {}
        for d, c in self.coeffs.items():
            if (lo is None or d >= lo) and (hi is None or d <= hi):
                out[d] = c
        for d, c in other.coeffs.items():
            if (lo is None or d >= lo) and (hi is None or d <= hi):
                if d in out:
                    s = out[d] + c
                    if _is_zero(s):
                        del out[d]
                    else:
                        out[d] = s
                else:
                    out[d] = c
        return self._like(out, lo, hi)

    __radd__ = __add__

    def __neg__(self):
        return self._like({d: -c for d, c in self.coeffs.items()}, self.lo, self.hi)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def _low_support(self):
        cand = []
        if self.coeffs:
            cand.append(min(self.coeffs))
        if self.hi is not None:
            cand.append(self.hi + 1)
        return min(cand) if cand else None

    def _high_support(self):
        cand = []
        if self.coeffs:
            cand.append(max(self.coeffs))
        if self.lo is not None:
            cand.append(self.lo - 1)
        return max(cand) if cand else None

    def product_window(self, other):
        if (self.lo is not None or other.lo is not None) and (self.hi is not None or other.hi is not None):
            if not (self.is_polynomial() or other.is_polynomial()):
                raise WindowExhausted("cannot multiply a series in T by a series in T^-1")
        hi = None
        for a, b in ((self, other), (other, self)):
            if a.hi is not None:
                ls = b._low_support()
                if ls is not None:
                    bound = a.hi + ls
                    hi = bound if hi is None else min(hi, bound)
        lo = None
        for a, b in ((self, other), (other, self)):
            if a.lo is not None:
                hs = b._high_support()
                if hs is not None:
                    bound = a.lo + hs
                    lo = bound if lo is None else max(lo, bound)
        return lo, hi

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            c = self._scalar(other)
            if _is_zero(c):
                return self._like({}, self.lo, self.hi)
            out = {}
            for d, a in self.coeffs.items():
                t = a * c
                if not _is_zero(t):
                    out[d] = t
            return self._like(out, self.lo, self.hi)
        lo, hi = self.product_window(other)
        if (self.ring is not None and other.ring is not None and self.ring == other.ring
                and len(self.coeffs) * len(other.coeffs) >= _KRONECKER_MIN):
            return self._like(_kronecker_product(self, other, lo, hi), lo, hi)
        out = {}
        b_items = sorted(other.coeffs.items())
        for d1, a in self.coeffs.items():
            for d2, b in b_items:
                d = d1 + d2
                if hi is not None and d > hi:
                    break
                if lo is not None and d < lo:
                    continue
                t = a * b
                if d in out:
                    out[d] = out[d] + t
                else:
                    out[d] = t
        out = {d: c for d, c in out.items() if not _is_zero(c)}
        return self._like(out, lo, hi)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = self.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def div_p(self, j=1):
        if self.ring is not None:
            out = {d: c.div_p(j) for d, c in self.coeffs.items()}
        else:
            f = Fraction(self.p) ** j
            out = {d: c / f for d, c in self.coeffs.items()}
        out = {d: c for d, c in out.items() if not _is_zero(c)}
        return self._like(out, self.lo, self.hi)

    def map_coefficients(self, fn):
        out = {}
        for d, c in self.coeffs.items():
            t = fn(c)
            if not _is_zero(t):
                out[d] = t
        return self._like(out, self.lo, self.hi)

    def shift(self, j):
        """Multiply by T**j."""
        return self._like({d + j: c for d, c in self.coeffs.items()},
                          None if self.lo is None else self.lo + j,
                          None if self.hi is None else self.hi + j)

    def derivative(self):
        """d/dT."""
        out = {}
        for d, c in self.coeffs.items():
            if d:
                out[d - 1] = c * d
        return self._like({d: c for d, c in out.items() if not _is_zero(c)},
                          None if self.lo is None else self.lo - 1,
                          None if self.hi is None else self.hi - 1)

    def log_derivative_operator(self):
        """T d/dT."""
        out = {d: c * d for d, c in self.coeffs.items() if d}
        return self._like({d: c for d, c in out.items() if not _is_zero(c)}, self.lo, self.hi)

    def substitute_power(self, n):
        """T -> T**n for a nonzero integer n."""
        if n == 0:
            raise ValueError("n must be nonzero")
        out = {d * n: c for d, c in self.coeffs.items()}
        if n > 0:
            lo = None if self.lo is None else self.lo * n
            hi = None if self.hi is None else self.hi * n + (n - 1)
        else:
            lo = None if self.hi is None else self.hi * n + (n + 1)
            hi = None if self.lo is None else self.lo * n - n - 1
        return self._like(out, lo, hi)

    def truncate(self, lo=None, hi=None):
        nlo = _max_opt(self.lo, lo)
        nhi = _min_opt(self.hi, hi)
        out = {d: c for d, c in self.coeffs.items()
               if (nlo is None or d >= nlo) and (nhi is None or d <= nhi)}
        return self._like(out, nlo, nhi)

    def part(self, sign):
        """Sub-polynomial of negative (-1), constant (0) or positive (+1) degrees."""
        if sign < 0:
            out = {d: c for d, c in self.coeffs.items() if d < 0}
            return self._like(out, self.lo, None if self.hi is None or self.hi >= -1 else self.hi)
        if sign > 0:
            out = {d: c for d, c in self.coeffs.items() if d > 0}
            return self._like(out, None if self.lo is None or self.lo <= 1 else self.lo, self.hi)
        return self._like({d: c for d, c in self.coeffs.items() if d == 0}, None, None)

    def constant(self):
        return self[0]

    def with_ring(self, ring):
        out = {d: ring(c) for d, c in self.coeffs.items()}
        res = LaurentSeries.__new__(LaurentSeries)
        res.coeffs = {d: c for d, c in out.items() if not _is_zero(c)}
        res.lo, res.hi, res.ring, res.p = self.lo, self.hi, ring, ring.p
        return res

    def equals(self, other, lo=None, hi=None):
        """Coefficientwise equality on the common window (optionally clipped)."""
        other = self._coerce(other)
        wlo = _max_opt(_max_opt(self.lo, other.lo), lo)
        whi = _min_opt(_min_opt(self.hi, other.hi), hi)
        degs = set(self.coeffs) | set(other.coeffs)
        for d in degs:
            if (wlo is not None and d < wlo) or (whi is not None and d > whi):
                continue
            a = self.coeffs.get(d)
            b = other.coeffs.get(d)
            if a is None:
                a = 0
            if b is None:
                b = 0
            diff = a - b
            if not _is_zero(diff):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, (LaurentSeries, int, Fraction, ExtElement)):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        terms = [f"({c})*T^{d}" for d, c in sorted(self.coeffs.items())[:8]]
        more = " + ..." if len(self.coeffs) > 8 else ""
        return f"LaurentSeries[{self.lo},{self.hi}](" + " + ".join(terms) + more + ")"

    def to_json(self):
        def enc(c):
            if isinstance(c, ExtElement):
                return c.to_json()
            return _frac_str(c)
        lo, hi = self.window
        return {"window": [lo, hi],
                "coeffs": {str(d): enc(c) for d, c in sorted(self.coeffs.items())}}


def _frac_str(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _max_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _min_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _clip(items, other_lo_deg, other_hi_deg, lo, hi):
    out = []
    for d, c in items:
        if hi is not None and d + other_lo_deg > hi:
            continue
        if lo is not None and d + other_hi_deg < lo:
            continue
        out.append((d, c))
    return out


def _pack(items, e, slot_bytes, base_deg, n_deg):
    """Little-endian byte image of sum c_(d,i) 2^(8*slot_bytes*((d-base)(2e-1)+i))."""
    width = 2 * e - 1
    zero_slot = bytes(slot_bytes)
    chunks = [zero_slot] * (n_deg * width)
    for d, vec in items:
        base = (d - base_deg) * width
        for i, v in enumerate(vec):
            if v:
                chunks[base + i] = v.to_bytes(slot_bytes, "little")
    return int.from_bytes(b"".join(chunks), "little")


def _scaled_vectors(items, ring):
    """Integer coefficient vectors sharing one power of p, plus that power."""
    kmin = min(c.k for _, c in items)
    out = []
    for d, c in items:
        f = ring.ppow(c.k - kmin)
        out.append((d, [x * f for x in c.coeffs]))
    return kmin, out


def _kronecker_product(a, b, lo, hi):
    """Coefficients of a*b in [lo, hi] over a tower ring.

    Both series become integers with one slot per (degree, x-power); a single
    multiplication gives every convolution at once.  The precision attached
    to each output coefficient is the pairwise rule applied to the worst
    input pair, which never overstates what the double loop would report.
    """
    ring = a.ring
    e = ring.e
    a_items = sorted(a.coeffs.items())
    b_items = sorted(b.coeffs.items())
    a_items = _clip(a_items, b_items[0][0], b_items[-1][0], lo, hi)
    b_items = _clip(b_items, a_items[0][0] if a_items else 0, a_items[-1][0] if a_items else 0, lo, hi)
    if not a_items or not b_items:
        return {}
    va = min(c.scaled_valuation() for _, c in a_items)
    vb = min(c.scaled_valuation() for _, c in b_items)
    pa = min(c.prec for _, c in a_items)
    pb = min(c.prec for _, c in b_items)
    prec = min(pa + vb, pb + va, ring.cap)
    ka, va_vecs = _scaled_vectors(a_items, ring)
    kb, vb_vecs = _scaled_vectors(b_items, ring)
    max_a = max(max(v) for _, v in va_vecs)
    max_b = max(max(v) for _, v in vb_vecs)
    terms = min(len(va_vecs), len(vb_vecs)) * e
    bits = max_a.bit_length() + max_b.bit_length() + terms.bit_length() + 1
    slot_bytes = (bits + 7) // 8
    a_lo, a_hi = va_vecs[0][0], va_vecs[-1][0]
    b_lo, b_hi = vb_vecs[0][0], vb_vecs[-1][0]
    A = _pack(va_vecs, e, slot_bytes, a_lo, a_hi - a_lo + 1)
    B = _pack(vb_vecs, e, slot_bytes, b_lo, b_hi - b_lo + 1)
    C = A * B
    width = 2 * e - 1
    n_out = (a_hi - a_lo) + (b_hi - b_lo) + 1
    raw = C.to_bytes(n_out * width * slot_bytes + slot_bytes, "little")
    out = {}
    k = ka + kb
    start_deg = a_lo + b_lo
    for t in range(n_out):
        d = start_deg + t
        if (lo is not None and d < lo) or (hi is not None and d > hi):
            continue
        base = t * width * slot_bytes
        prod = [int.from_bytes(raw[base + i * slot_bytes: base + (i + 1) * slot_bytes], "little")
                for i in range(width)]
        if not any(prod):
            continue
        c = ExtElement(ring, reduce_mod_modulus(ring, prod), k, prec)
        if not c.is_zero():
            out[d] = c
    return out
