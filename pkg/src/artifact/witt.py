"""Finite-length Witt vectors computed through their ghost components.

Entries may be ``ExtElement`` values, exact rationals (with a prime) or
``LaurentSeries`` values; all arithmetic goes through the ghost map

    phi_n = X_0^(p^n) + p X_1^(p^(n-1)) + ... + p^n X_n,

which is an injective ring morphism when p is not a zero divisor.  Recovering
the n-th entry divides by p^n, so a vector of length m+1 consumes m digits
of precision; rings are expected to carry at least that many guard digits.
A recovered entry of negative valuation is reported as ``NotIntegral``:
the solvability criterion consumes exactly this signal.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from .errors import (
    DegreeNotPositive,
    InsufficientPrecision,
    IntegralityViolation,
    NotIntegral,
    PatternViolation,
)
from .laurent import LaurentSeries
from .padic_core import ExtElement, evaluate_poly, v_p, v_p_frac

NEG_INF = -math.inf


# ---------------------------------------------------------------------------
# scalar helpers (ExtElement, Fraction or LaurentSeries entries)

def _divp(x, j, p):
    if j == 0:
        return x
    if isinstance(x, (ExtElement, LaurentSeries)):
        return x.div_p(j)
    return Fraction(x) / p ** j


def _val(x, p):
    if isinstance(x, ExtElement):
        return x.valuation()
    if isinstance(x, LaurentSeries):
        return x.min_valuation()
    return v_p_frac(x, p)


def _is_zero(x):
    if isinstance(x, (ExtElement, LaurentSeries)):
        return x.is_zero()
    return x == 0


def _zero_like(x):
    if isinstance(x, ExtElement):
        return x.ring.zero()
    if isinstance(x, LaurentSeries):
        return x.zero()
    return Fraction(0)


def _one_like(x):
    if isinstance(x, ExtElement):
        return x.ring.one()
    if isinstance(x, LaurentSeries):
        return x.one()
    return Fraction(1)


def _check_entry(x, index, p):
    """Raise NotIntegral / InsufficientPrecision for an unghosted entry."""
    if isinstance(x, ExtElement):
        if x.is_zero():
            if x.prec < 0:
                raise InsufficientPrecision(f"entry {index} is unknown after dividing by p^{index}")
            return
        v = x.valuation()
        if v < 0:
            raise NotIntegral(index, v)
        return
    if isinstance(x, LaurentSeries):
        for d, c in x.coeffs.items():
            _check_entry(c, index, p)
        return
    v = v_p_frac(x, p)
    if v < 0:
        raise NotIntegral(index, v)


# ---------------------------------------------------------------------------
# vectors

class GhostVector:
    """Ghost (phantom) components <phi_0, ..., phi_m>."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p):
        self.entries = tuple(entries)
        self.p = p

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def _zip(self, other, op):
        if len(self) != len(other):
            raise ValueError("ghost vectors of different lengths")
        return GhostVector([op(a, b) for a, b in zip(self.entries, other.entries)], self.p)

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __mul__(self, other):
        if isinstance(other, GhostVector):
            return self._zip(other, lambda a, b: a * b)
        return GhostVector([a * other for a in self.entries], self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return GhostVector([-a for a in self.entries], self.p)

    def __eq__(self, other):
        if not isinstance(other, GhostVector) or len(self) != len(other):
            return NotImplemented
        return all(_is_zero(a - b) for a, b in zip(self.entries, other.entries))

    __hash__ = None

    def __repr__(self):
        return "<" + ", ".join(map(repr, self.entries)) + ">"

    def to_json(self):
        return {"ghost": True, "entries": [_encode(x) for x in self.entries]}


class WittVector:
    """A Witt vector (lambda_0, ..., lambda_m) of length m+1."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p=None, check=True):
        entries = tuple(entries)
        if not entries:
            raise ValueError("a Witt vector has at least one entry")
        if p is None:
            p = _prime_of(entries[0])
        self.entries = entries
        self.p = p
        if check:
            for i, x in enumerate(entries):
                if not _is_zero(x) and _val(x, p) < 0:
                    raise NotIntegral(i, _val(x, p))

    @property
    def m(self):
        return len(self.entries) - 1

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def ghost(self):
        return ghost(self)

    def __add__(self, other):
        return witt_add(self, other)

    def __sub__(self, other):
        return witt_add(self, -other)

    def __mul__(self, other):
        return witt_mul(self, other)

    def __neg__(self):
        return witt_neg(self)

    def __eq__(self, other):
        if not isinstance(other, WittVector) or len(self) != len(other):
            return NotImplemented
        return all(_is_zero(a - b) for a, b in zip(self.entries, other.entries))

    __hash__ = None

    def is_zero(self):
        return all(_is_zero(x) for x in self.entries)

    def valuations(self):
        return [_val(x, self.p) for x in self.entries]

    def map(self, fn):
        return WittVector([fn(x) for x in self.entries], self.p, check=False)

    def __repr__(self):
        return "W(" + ", ".join(map(repr, self.entries)) + ")"

    def to_json(self):
        return [_encode(x) for x in self.entries]


def _prime_of(x):
    if isinstance(x, ExtElement):
        return x.ring.p
    if isinstance(x, LaurentSeries):
        return x.p
    raise ValueError("a prime is required for rational entries")


def _encode(x):
    if isinstance(x, (ExtElement, LaurentSeries)):
        return x.to_json()
    q = Fraction(x)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# ghost map and its inverse

def ghost(w):
    """Ghost components of a Witt vector."""
    p = w.p
    out = []
    powers = []  # powers[i] = lambda_i^(p^(n-i)) for the current n
    for n, lam in enumerate(w.entries):
        powers = [x ** p for x in powers]
        powers.append(lam)
        acc = powers[0]
        for i in range(1, n + 1):
            acc = acc + powers[i] * p ** i
        out.append(acc)
    return GhostVector(out, p)


def unghost(g, check=True):
    """The unique Witt vector with the given ghost components.

    Raises ``NotIntegral(j, v)`` when the recovered entry lambda_j has
    negative valuation (with ``check=True``).
    """
    p = g.p
    entries = []
    powers = []
    for n, phi in enumerate(g.entries):
        powers = [x ** p for x in powers]
        acc = phi
        for i, x in enumerate(powers):
            acc = acc - x * p ** i
        lam = _divp(acc, n, p)
        if check:
            _check_entry(lam, n, p)
        entries.append(lam)
        powers.append(lam)
    return WittVector(entries, p, check=False)


def _unghost_internal(g):
    try:
        return unghost(g)
    except NotIntegral as exc:
        raise IntegralityViolation(
            f"Witt arithmetic produced a non-integral entry {exc.index} "
            f"(valuation {exc.valuation}); precision is exhausted") from exc


def witt_add(a, b):
    _same_shape(a, b)
    return _unghost_internal(ghost(a) + ghost(b))


def witt_mul(a, b):
    _same_shape(a, b)
    return _unghost_internal(ghost(a) * ghost(b))


def witt_neg(a):
    return _unghost_internal(-ghost(a))


def witt_scalar(n, a):
    """The Witt vector n * a for an integer n."""
    return _unghost_internal(ghost(a) * n)


def _same_shape(a, b):
    if len(a) != len(b):
        raise ValueError("Witt vectors of different lengths")


def frobenius(w):
    """F : W_{m} -> W_{m-1}, the ghost shift <phi_1, ..., phi_m>."""
    if len(w) < 2:
        raise ValueError("Frobenius needs length at least 2")
    g = ghost(w)
    return _unghost_internal(GhostVector(g.entries[1:], w.p))


def verschiebung(w):
    """V : W_m -> W_{m+1}, (lambda_0, ..., lambda_m) -> (0, lambda_0, ..., lambda_m)."""
    return WittVector((_zero_like(w.entries[0]),) + w.entries, w.p, check=False)


def truncate(w, length):
    return WittVector(w.entries[:length], w.p, check=False)


def teichmuller(x, length, p=None):
    """(x, 0, ..., 0)."""
    if p is None:
        p = _prime_of(x)
    return WittVector((x,) + tuple(_zero_like(x) for _ in range(length - 1)), p, check=False)


def _residue_zero(x, p):
    """Entry vanishes in the residue field (valuation > 0)."""
    if _is_zero(x):
        return True
    return _val(x, p) > 0


def length(w):
    """Length l(w) = m - k where k is the first entry nonzero in the residue field.

    Entries of positive valuation count as zero; for Z_p entries this is
    reduction modulo p.  Returns ``-inf`` for a vector that is zero in the
    residue field.
    """
    for k, x in enumerate(w.entries):
        if not _residue_zero(x, w.p):
            return w.m - k
    return NEG_INF


def first_unit_index(w):
    for k, x in enumerate(w.entries):
        if not _residue_zero(x, w.p):
            return k
    return None


# ---------------------------------------------------------------------------
# canonical lifts [h(b)]

def _eval_h(h, b):
    if callable(h):
        return h(b)
    return evaluate_poly(h, b)


def lubin_tate_orbit(b, m, P=None):
    """[b, P(b), ..., P^(m)(b)]."""
    if P is None:
        P = b.ring.P
    out = [b]
    for _ in range(m):
        out.append(evaluate_poly(P, out[-1]))
    return out


def canonical_lift(h, b, length, P=None):
    """[h(b)] = unghost(<h(b), h(P(b)), ..., h(P^(m)(b))>) of the given length.

    ``h`` is a polynomial (coefficient list, low degree first) or a callable
    evaluating a suitably truncated series on ring elements.
    """
    if b.valuation() <= 0:
        raise ValueError("b must have positive valuation")
    pts = lubin_tate_orbit(b, length - 1, P)
    g = GhostVector([b.ring.coerce(_eval_h(h, x)) for x in pts], b.ring.p)
    return unghost(g)


def pi_lift(ring, m, length):
    """[pi_m] of the given length: ghost <pi_m, ..., pi_0, 0, 0, ...>."""
    from .padic_core import pi_at

    entries = []
    for j in range(length):
        entries.append(pi_at(ring, m - j) if j <= m else ring.zero())
    return unghost(GhostVector(entries, ring.p))


def key_valuation_profile(h, b, length, P=None):
    """Check the valuation pattern of [h(b)] against r = v_p(h(0)).

    The entries before index r are non-units and entry r is a unit.  Returns
    r (``math.inf`` when h(0) = 0, in which case every entry is a non-unit).
    """
    p = b.ring.p
    h0 = h(b.ring.zero()) if callable(h) else (Fraction(h[0]) if len(h) else Fraction(0))
    if isinstance(h0, ExtElement):
        r = math.inf if h0.is_zero() else h0.valuation()
    else:
        r = v_p_frac(h0, p)
    if r != math.inf and (not isinstance(r, int) and Fraction(r).denominator != 1):
        raise PatternViolation("constant term of h is not in Z_p")
    lift = canonical_lift(h, b, length, P)
    vals = lift.valuations()
    for j, v in enumerate(vals):
        if j < r and not (v > 0):
            raise PatternViolation(f"entry {j} should be a non-unit, valuation {v}")
        if j == r and v != 0:
            raise PatternViolation(f"entry {j} should be a unit, valuation {v}")
    return r


# ---------------------------------------------------------------------------
# co-monomials and the decomposition of Witt vectors over Laurent rings

def split_degree(d, p):
    """d = n p^m with n prime to p."""
    m = v_p(d, p)
    return d // p ** m, m


@dataclass(frozen=True)
class ComonomialBlock:
    """lambda T^-d with d = n p^m, stored through its kept entries.

    ``lam`` has length min(s, m) + 1; when m > s it holds the entries
    lambda_(m-s), ..., lambda_m (the first m - s are not part of W_s).
    """

    n: int
    m: int
    s: int
    lam: WittVector

    @property
    def d(self):
        return self.n * self.lam.p ** self.m

    def expand(self):
        return comonomial(self.lam, self.n * self.lam.p ** self.m, self.s, truncated=True)

    def to_json(self):
        return {"n": self.n, "m": self.m, "s": self.s, "degree": -self.d, "lambda": self.lam.to_json()}


def comonomial(lam, d, s, truncated=False):
    """The Witt vector lambda T^-d in W_s of Laurent polynomials.

    Position i holds lambda_j T^-(n p^j) with j = i + m - s (zero when j < 0).
    With ``truncated=True`` ``lam`` already holds only lambda_(max(0,m-s)..m).
    """
    if d <= 0:
        raise DegreeNotPositive(f"degree {d} is not positive")
    p = lam.p
    n, m = split_degree(d, p)
    entries = list(lam.entries)
    if truncated:
        if len(entries) != min(s, m) + 1:
            raise ValueError("truncated lambda has the wrong length")
        offset = max(0, m - s)
    else:
        if len(entries) != m + 1:
            raise ValueError(f"lambda must have length m+1 = {m + 1}")
        offset = 0
    sample = entries[0]
    ring = sample.ring if isinstance(sample, ExtElement) else None
    out = []
    for i in range(s + 1):
        j = i + m - s
        if j < 0:
            out.append(LaurentSeries.polynomial({}, ring=ring, p=p))
        else:
            c = entries[j - offset]
            out.append(LaurentSeries.polynomial({-n * p ** j: c}, ring=ring, p=p))
    return WittVector(out, p, check=False)


def comonomial_block(lam, d, s):
    p = lam.p
    n, m = split_degree(d, p)
    if m > s:
        lam = WittVector(lam.entries[m - s:], p, check=False)
    return ComonomialBlock(n, m, s, lam)


@dataclass
class Decomposition:
    blocks: dict  # d -> ComonomialBlock
    const: WittVector
    positive: WittVector

    def reassemble(self):
        """Witt sum of all pieces, as a vector over Laurent polynomials."""
        total = _laurent_vector(self.const)
        for blk in self.blocks.values():
            total = witt_add(total, blk.expand())
        return witt_add(total, self.positive)


def _laurent_vector(w):
    sample = w.entries[0]
    ring = sample.ring if isinstance(sample, ExtElement) else None
    return WittVector([LaurentSeries.polynomial({0: x}, ring=ring, p=w.p) for x in w.entries], w.p, check=False)


def decompose(f):
    """Split f in W_s(Laurent) into co-monomial blocks, a constant and a positive part.

    The decomposition is computed on ghost components: a co-monomial of
    degree -n p^m contributes to the i-th ghost component only in degree
    -n p^(i+m-s), so each ghost term belongs to exactly one block.
    """
    p = f.p
    s = f.m
    g = ghost(f)
    sample = g.entries[0]
    ring = sample.ring
    zero = ring.zero() if ring is not None else Fraction(0)
    block_ghosts = {}
    const = [zero] * (s + 1)
    pos = []
    for i, phi in enumerate(g.entries):
        if phi.lo is not None or (phi.hi is not None and phi.hi < 0):
            raise InsufficientPrecision("decompose needs polynomial or power series entries")
        pos.append(phi.part(1))
        for deg, c in phi.coeffs.items():
            if deg == 0:
                const[i] = c
            elif deg < 0:
                n, k = split_degree(-deg, p)
                m = k + s - i
                block_ghosts.setdefault((n, m), {})[i] = c
    blocks = {}
    for (n, m), comps in sorted(block_ghosts.items()):
        if m <= s:
            gh = [_divp(comps.get(s - m + j, zero), s - m, p) for j in range(m + 1)]
        else:
            gh = [comps.get(i, zero) for i in range(s + 1)]
        lam = unghost(GhostVector(gh, p))
        if lam.is_zero():
            continue
        blk = ComonomialBlock(n, m, s, lam)
        blocks[blk.d] = blk
    const_w = unghost(GhostVector(const, p))
    pos_w = unghost(GhostVector(pos, p))
    return Decomposition(blocks, const_w, pos_w)
