"""Rank-one differential operators d - g(T) over tower rings.

The derivation is d = T d/dT throughout.  An operator is stored as a finite
Laurent polynomial g(T) = sum a_i T^i whose constant term a_0 is kept apart
(exactly, as a rational, whenever possible).

Solvability splits into three independent questions:

* the constant a_0 must lie in Z_p;
* the positive part gives ghost vectors phi_(n,m) = a_(n p^m) / n, one per
  n prime to p, whose Witt vectors must be integral (after extending the
  ghost vector by zeros until a valuation certificate covers every later
  entry);
* the negative part is read as a pure Witt vector: with M the largest
  exponent in the support of the n-th block, phi_j = -a_(-n p^j) / (n pi_(M-j))
  and the block is solvable when the recovered Witt vector is integral.

Degrees whose exponential exp(-a_i T^i / i) converges near |T| = 1 are
stripped from the negative part first; they do not change the module.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from .errors import (
    InsufficientPrecision,
    LevelRaiseRequired,
    LevelTooLow,
    NotIntegral,
    NotSolvable,
    PositiveSupport,
    ValidationError,
)
from .laurent import LaurentSeries
from .padic_core import ExtElement, make_tower, pi_at, v_p, v_p_factorial
from .witt import (
    ComonomialBlock,
    Decomposition,
    GhostVector,
    WittVector,
    comonomial,
    first_unit_index,
    ghost,
    split_degree,
    unghost,
    _unghost_internal,
)

INF = math.inf


# ---------------------------------------------------------------------------
# operators

def _nonzero(c):
    if isinstance(c, ExtElement):
        return not c.is_zero()
    return c != 0


@dataclass
class RankOneOperator:
    """d - g(T) with g = a0 + sum_{i != 0} coeffs[i] T^i.

    ``P`` (integer coefficients of a Lubin-Tate polynomial) lets the
    negative-part analysis raise the tower level; it defaults to the ring's.
    """

    ring: object
    coeffs: dict
    a0: object = Fraction(0)
    P: object = None

    def __post_init__(self):
        clean = {}
        for i, c in self.coeffs.items():
            i = int(i)
            if i == 0:
                raise ValidationError("coeffs", "the constant term goes in a0")
            c = self.ring(c)
            if not c.is_zero():
                clean[i] = c
        self.coeffs = clean
        if not isinstance(self.a0, ExtElement):
            self.a0 = Fraction(self.a0)
        if self.P is None:
            self.P = self.ring.P
        elif self.P is not None:
            self.P = tuple(int(c) for c in self.P)

    @property
    def p(self):
        return self.ring.p

    @property
    def window(self):
        if not self.coeffs:
            return (0, 0)
        return (min(min(self.coeffs), 0), max(max(self.coeffs), 0))

    def g(self):
        """g(T) as a Laurent polynomial over the ring (a0 included)."""
        terms = dict(self.coeffs)
        a0 = self.ring(self.a0)
        if not a0.is_zero():
            terms[0] = a0
        return LaurentSeries.polynomial(terms, ring=self.ring)

    def part(self, sign):
        """The operator restricted to negative (-1) or positive (+1) degrees."""
        keep = {i: c for i, c in self.coeffs.items() if (i < 0) == (sign < 0)}
        return RankOneOperator(self.ring, keep, Fraction(0), self.P)

    def with_ring(self, ring):
        return RankOneOperator(ring, {i: ring(c) for i, c in self.coeffs.items()}, self.a0, self.P)

    def __eq__(self, other):
        if not isinstance(other, RankOneOperator):
            return NotImplemented
        if self.ring.p != other.ring.p:
            return False
        a, b = self, other
        if not a.ring.is_base and not b.ring.is_base and a.ring.level != b.ring.level:
            top = a.ring if a.ring.level > b.ring.level else b.ring
            a, b = a.with_ring(top), b.with_ring(top)
        elif a.ring.is_base != b.ring.is_base:
            top = b.ring if a.ring.is_base else a.ring
            a, b = a.with_ring(top), b.with_ring(top)
        if _a0_diff_nonzero(a.a0, b.a0):
            return False
        for i in set(a.coeffs) | set(b.coeffs):
            x = a.coeffs.get(i, a.ring.zero())
            y = b.coeffs.get(i, a.ring.zero())
            if not (x - y).is_zero():
                return False
        return True

    __hash__ = None

    def to_json(self):
        a0 = self.a0.to_json() if isinstance(self.a0, ExtElement) else _fstr(self.a0)
        return {"ring": self.ring.to_json(), "a0": a0,
                "coeffs": {str(i): c.to_json() for i, c in sorted(self.coeffs.items())}}


def _a0_diff_nonzero(x, y):
    d = x - y
    if isinstance(d, ExtElement):
        return not d.is_zero()
    return d != 0


def _fstr(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _venc(v):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return _fstr(v)


# ---------------------------------------------------------------------------
# iterated derivation matrices and radius

def iterate_matrices(op, S):
    """g_[1], ..., g_[S] for the d/dT form of the operator.

    g_[1] = g(T)/T and g_[s+1] = d/dT g_[s] + g_[s] g_[1].
    """
    if S < 1:
        raise ValidationError("S", "must be at least 1")
    g1 = op.g().shift(-1)
    out = [g1]
    for _ in range(S - 1):
        cur = out[-1]
        out.append(cur.derivative() + cur * g1)
    return out


@dataclass(frozen=True)
class RayEstimate:
    """Valuation of the radius (Ray(M, rho) = p^-value) at test radius r."""

    value: object
    small_radius: bool
    r: object
    terms: tuple = ()

    def to_json(self):
        return {"radius_valuation": _venc(self.value), "small_radius": self.small_radius,
                "r": _venc(self.r), "terms": [[k, _venc(t)] for k, t in self.terms]}


def ray_estimate(op, r=Fraction(0), S=16):
    """Estimate the radius valuation of the operator at |T| = p^-r.

    r is the valuation of the test radius rho, so r > 0 means rho < 1.
    When |g|_rho > 1 the value is exact: 1/(p-1) + r - v_rho(g).  Otherwise
    the largest (v(k!) - v_rho(g_[k]))/k over the second half of the S
    iterates stands in for the limsup, and the result is never below r.
    """
    if S < 8:
        raise ValidationError("S", "needs at least 8 iterates")
    r = Fraction(r)
    p = op.p
    omega = Fraction(1, p - 1)
    G, _ = op.g().gauss_valuation(r) if op.g().coeffs else (INF, False)
    if G != INF and G < 0:
        return RayEstimate(omega + r - G, True, r, ())
    mats = iterate_matrices(op, S)
    terms = []
    best = r
    for k in range(S // 2, S + 1):
        gk = mats[k - 1]
        Gk = gk.gauss_valuation(r)[0] if gk.coeffs else INF
        t = -INF if Gk == INF else (Fraction(v_p_factorial(k, p)) - Gk) / k
        terms.append((k, t))
        if t > best:
            best = t
    return RayEstimate(best, False, r, tuple(terms))


# ---------------------------------------------------------------------------
# positive part

@dataclass
class PositiveBlock:
    n: int
    ghosts: list
    lam: object  # WittVector, or None when a witness is recorded
    witness: object  # NotIntegral or None
    certified_length: object  # N at which the tail certificate held

    def to_json(self):
        return {"n": self.n, "ghosts": [_enc(x) for x in self.ghosts],
                "lambda": None if self.lam is None else self.lam.to_json(),
                "witness": None if self.witness is None else self.witness.to_json(),
                "certified_length": self.certified_length}


def _enc(x):
    if isinstance(x, ExtElement):
        return x.to_json()
    return _fstr(x)


def _tail_certified(lam, p):
    """Every entry past the end of a zero-extended ghost vector is integral.

    With phi_t = 0 for t > N the later entries satisfy
    p^t lambda_t = -sum_{k<t} p^k lambda_k^(p^(t-k)); if every entry k <= N
    has p^t v(lambda_k) - t >= 1/(p-1) for all t >= N+1-k, induction shows all
    later entries have valuation >= 1/(p-1).
    """
    N = len(lam) - 1
    omega = Fraction(1, p - 1)
    for k, x in enumerate(lam.entries):
        if x.is_zero():
            continue
        v = x.valuation()
        if v <= 0:
            return False
        t = N + 1 - k
        prev = None
        while True:
            val = p ** t * v - t
            if val < omega:
                return False
            if prev is not None and val >= prev:
                break
            prev = val
            t += 1
    return True


def solve_positive(op, max_extension=None):
    """Per-n Witt vectors of the positive part and their integrality verdicts.

    Returns (solvable, blocks).  A coefficient of negative valuation fails
    the small-radius condition and is reported as a witness with n = 0.
    """
    ring = op.ring
    p = op.p
    pos = {i: c for i, c in op.coeffs.items() if i > 0}
    blocks = []
    if not pos:
        return True, blocks
    for i, c in sorted(pos.items()):
        if c.valuation() < 0:
            return False, [PositiveBlock(0, [], None, NotIntegral(i, c.valuation()), None)]
    if max_extension is None:
        max_extension = ring.budget.guard_digits
    groups = {}
    for i in pos:
        n, m = split_degree(i, p)
        groups.setdefault(n, set()).add(m)
    ok = True
    for n in sorted(groups):
        M = max(groups[n])
        ghosts = [ring(pos.get(n * p ** m, ring.zero())) / n for m in range(M + 1)]
        length = M + 1
        while True:
            gh = ghosts + [ring.zero()] * (length - M - 1)
            try:
                lam = unghost(GhostVector(gh, p))
            except NotIntegral as exc:
                blocks.append(PositiveBlock(n, ghosts, None, exc, None))
                ok = False
                break
            if _tail_certified(lam, p):
                blocks.append(PositiveBlock(n, ghosts, lam, None, length - 1))
                break
            if length - M - 1 >= max_extension:
                raise InsufficientPrecision(
                    f"positive block n={n}: no integrality certificate after {max_extension} extensions")
            length += 1
    return ok, blocks


# ---------------------------------------------------------------------------
# negative part

def strip_small_tail(op, r=Fraction(0)):
    """Remove negative degrees whose exponential converges at the test radius.

    A term a_i T^i (i <= -1) is removed when v(a_i / i) + i r > 1/(p-1):
    then exp(-a_i T^i / i) converges on |T| = p^-r and changing the basis by
    it deletes the term.  ``r = 0`` is the limit r -> 0+ (the Robba ring).
    Returns (stripped operator, removed degrees, log of the witness
    exponential, i.e. -sum a_i T^i / i over the removed degrees).
    """
    r = Fraction(r)
    if r < 0:
        raise ValidationError("r", "the test radius must satisfy rho <= 1 (r >= 0)")
    p = op.p
    omega = Fraction(1, p - 1)
    keep = {}
    removed = []
    witness = {}
    for i, c in op.coeffs.items():
        if i < 0:
            v = c.valuation() - v_p(-i, p) + i * r
            if v > omega:
                removed.append(i)
                witness[i] = -(c / i)
                continue
        keep[i] = c
    stripped = RankOneOperator(op.ring, keep, op.a0, op.P)
    return stripped, sorted(removed), LaurentSeries.polynomial(witness, ring=op.ring)


@dataclass
class NegativeBlock:
    n: int
    M: int
    ghosts: list
    lam: object
    witness: object
    contribution: int

    @property
    def d(self):
        return self.n * self.ghosts[0].ring.p ** self.M if self.ghosts else self.n

    def to_json(self):
        return {"n": self.n, "M": self.M, "ghosts": [_enc(x) for x in self.ghosts],
                "lambda": None if self.lam is None else self.lam.to_json(),
                "witness": None if self.witness is None else self.witness.to_json(),
                "irregularity": self.contribution}


def block_irregularity(n, lam, p):
    """n p^l(lambda) with l the residue-field length (0 for a residue-zero block)."""
    r = first_unit_index(lam)
    if r is None:
        return 0
    return n * p ** (lam.m - r)


def _working_ring(op, needed):
    ring = op.ring
    if not ring.is_base and ring.level >= needed:
        return ring
    if op.P is None:
        raise LevelRaiseRequired(needed)
    return make_tower(op.P, needed, ring.budget)


def solve_negative(op, strip=True, r=Fraction(0), override_M=None):
    """Pure-pattern inversion of the negative part.

    Returns (solvable, blocks, f_minus, ring, removed) where ``f_minus`` is
    the pure Witt vector sum of the recovered co-monomials (None when some
    block is not integral) and ``ring`` the tower ring used.
    """
    p = op.p
    removed = []
    if strip:
        op, removed, _ = strip_small_tail(op, r)
    neg = {i: c for i, c in op.coeffs.items() if i < 0}
    groups = {}
    for i in neg:
        n, m = split_degree(-i, p)
        groups[n] = max(groups.get(n, 0), m)
    if override_M is not None:
        for n in groups:
            if override_M < groups[n]:
                raise ValidationError("override_M", f"below the support exponent {groups[n]} of block n={n}")
            groups[n] = override_M
    if not groups:
        return True, [], None, op.ring, removed
    top = max(groups.values())
    ring = _working_ring(op, top)
    blocks = []
    ok = True
    for n in sorted(groups):
        M = groups[n]
        ghosts = []
        for j in range(M + 1):
            a = neg.get(-n * p ** j)
            if a is None:
                ghosts.append(ring.zero())
            else:
                ghosts.append(-ring(a) / (pi_at(ring, M - j) * n))
        try:
            lam = unghost(GhostVector(ghosts, p))
        except NotIntegral as exc:
            blocks.append(NegativeBlock(n, M, ghosts, None, exc, 0))
            ok = False
            continue
        blocks.append(NegativeBlock(n, M, ghosts, lam, None, block_irregularity(n, lam, p)))
    f_minus = None
    if ok:
        f_minus = assemble_pure(blocks, top, ring)
    return ok, blocks, f_minus, ring, removed


def assemble_pure(blocks, s, ring):
    """Sum of the co-monomials lambda_n T^-(n p^M(n)) in W_s(Laurent)."""
    p = ring.p
    if not blocks:
        return None
    # Witt addition is additive on ghosts: sum the (monomial) ghosts of the
    # co-monomials and invert once instead of once per block
    total = None
    for blk in blocks:
        g = ghost(comonomial(blk.lam, blk.n * p ** blk.M, s))
        total = g if total is None else total + g
    return _unghost_internal(total)


# ---------------------------------------------------------------------------
# moderate part

def _mult_order(p, b, limit=10 ** 7):
    if b == 1:
        return 1
    x = p % b
    h = 1
    while x != 1:
        x = x * p % b
        h += 1
        if h > limit:
            raise InsufficientPrecision("multiplicative order search exceeded its limit")
    return h


def _factor(b):
    out = {}
    q = 2
    while q * q <= b:
        while b % q == 0:
            out[q] = out.get(q, 0) + 1
            b //= q
        q += 1
    if b > 1:
        out[b] = out.get(b, 0) + 1
    return out


def _tower_power(q, r, limit=10 ** 6):
    """[q]_r = q^(q^(...^q)) with r copies of q, or None when too large."""
    val = q
    for _ in range(r - 1):
        if val * math.log2(q) > limit:
            return None
        val = q ** val
    return val


@dataclass(frozen=True)
class ModerateReport:
    in_Zp: object  # True / False
    in_Z_local: object  # a0 in Z_(p); None when a0 is not rational
    in_Z: object
    frobenius_order: object  # minimal h with (p^h - 1) a0 in Z, or None
    frobenius_bound: object  # prod([q_i]_{r_i} - 1), or None
    bound_holds: object  # whether (p^bound - 1) a0 is an integer

    @property
    def solvable(self):
        return bool(self.in_Zp)

    @property
    def trivial(self):
        return bool(self.in_Z)

    def to_json(self):
        return {"solvable": self.solvable, "trivial": self.trivial,
                "in_Z_p": self.in_Zp, "in_Z_(p)": self.in_Z_local,
                "frobenius_order": self.frobenius_order,
                "frobenius_bound": None if self.frobenius_bound is None else str(self.frobenius_bound),
                "bound_holds": self.bound_holds}


def moderate(a0, p):
    """Solvability, triviality and Frobenius order of d - a0.

    d - a0 is solvable iff a0 is in Z_p and trivial iff a0 is in Z.  For
    a0 = a/b in Z_(p) the minimal h with (p^h - 1) a0 in Z is the order of p
    modulo b.  The product bound prod([q_i]_{r_i} - 1) over b = prod q_i^{r_i}
    is reported with a flag saying whether it is actually a multiple of the
    order; for r_i >= 2 it need not be (p = 2, b = 9 gives 26, order 6).
    """
    if isinstance(a0, ExtElement):
        v = a0.valuation()
        return ModerateReport(v >= 0, None, None, None, None, None)
    a0 = Fraction(a0)
    b = a0.denominator
    in_zp = b % p != 0
    if not in_zp:
        return ModerateReport(False, False, False, None, None, None)
    h = _mult_order(p, b)
    bound = 1
    for q, r in _factor(b).items():
        t = _tower_power(q, r)
        if t is None:
            bound = None
            break
        bound *= t - 1
    holds = None if bound is None else pow(p, bound, b) == 1 % b
    return ModerateReport(True, True, b == 1, h, bound, holds)


# ---------------------------------------------------------------------------
# reports

@dataclass
class SolvabilityReport:
    solvable: bool
    a0_status: ModerateReport
    stripped_tail: list
    blocks: list  # NegativeBlock
    positive: list  # PositiveBlock
    positive_ok: bool
    negative_ok: bool
    irregularity: object  # int, or None when not solvable
    f_minus: object  # WittVector over Laurent polynomials, or None
    ring: object

    def to_json(self):
        return {
            "solvable": self.solvable,
            "a0_status": self.a0_status.to_json(),
            "stripped_tail": list(self.stripped_tail),
            "positive_part": {"solvable": self.positive_ok, "blocks": [b.to_json() for b in self.positive]},
            "negative_part": {"solvable": self.negative_ok, "blocks": [b.to_json() for b in self.blocks]},
            "irregularity": self.irregularity,
            "witt_decomposition": None if self.f_minus is None else self.f_minus.to_json(),
            "level": self.ring.level,
        }


def analyse(op, strip=True, override_M=None):
    """Full solvability analysis: a0, positive part and negative part."""
    mod = moderate(op.a0, op.p)
    pos_ok, pos_blocks = solve_positive(op)
    neg_ok, blocks, f_minus, ring, removed = solve_negative(op, strip=strip, override_M=override_M)
    solvable = bool(mod.in_Zp) and pos_ok and neg_ok
    irr = None
    if solvable:
        irr = max([b.contribution for b in blocks] + [0])
    return SolvabilityReport(solvable, mod, removed, blocks, pos_blocks, pos_ok, neg_ok,
                             irr, f_minus, ring)


def irregularity(report):
    """max over blocks of n p^l(lambda) and 0."""
    if not report.solvable:
        raise NotSolvable("irregularity is defined for solvable operators")
    return max([b.contribution for b in report.blocks] + [0])


# ---------------------------------------------------------------------------
# construction from classification data

def _as_laurent_vector(f, ring):
    if isinstance(f, WittVector):
        return f
    if isinstance(f, Decomposition):
        blocks = list(f.blocks.values())
    else:
        blocks = list(f)
    if not blocks:
        return None
    s = max(b.s for b in blocks)
    total = None
    for b in blocks:
        if not isinstance(b, ComonomialBlock):
            raise ValidationError("f", "expected co-monomial blocks")
        if b.s != s:
            raise ValidationError("f", "blocks must share the Witt length")
        g = ghost(b.expand())
        total = g if total is None else total + g
    return _unghost_internal(total)


def build_L(a0, f_minus, ring, P=None):
    """The operator d - g with g = d log(T^a0 exp(sum_i pi_(s-i) phi_i / p^i)).

    phi_i are the ghost components of f^- (Laurent polynomials in T^-1);
    d phi_i is divisible by p^i, so the result is integral.  For the single
    co-monomial (1) T^-1 this is d + pi_0 T^-1.
    """
    f = _as_laurent_vector(f_minus, ring) if f_minus is not None else None
    coeffs = {}
    if f is not None:
        s = f.m
        if ring.is_base or ring.level < s:
            raise LevelTooLow(f"need level >= {s}, got {ring.level}")
        phis = ghost(f).entries
        for i, phi in enumerate(phis):
            if any(d >= 0 for d in phi.coeffs):
                raise PositiveSupport("f^- must be supported in strictly negative degrees")
            pi = pi_at(ring, s - i)
            for d, c in phi.coeffs.items():
                term = (ring(c) * d).div_p(i) * pi
                coeffs[d] = coeffs[d] + term if d in coeffs else term
    return RankOneOperator(ring, coeffs, a0, P if P is not None else ring.P)


def tensor(op1, op2):
    """d - (g1 + g2)."""
    if op1.p != op2.p:
        raise ValidationError("ops", "different primes")
    r1, r2 = op1.ring, op2.ring
    if r1 == r2:
        ring = r1
    elif r1.is_base:
        ring = r2
    elif r2.is_base:
        ring = r1
    else:
        ring = r1 if r1.level >= r2.level else r2
    coeffs = {i: ring(c) for i, c in op1.coeffs.items()}
    for i, c in op2.coeffs.items():
        coeffs[i] = coeffs[i] + ring(c) if i in coeffs else ring(c)
    return RankOneOperator(ring, coeffs, op1.a0 + op2.a0, op1.P or op2.P)


# ---------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ClassificationKey:
    """Isomorphism-class key of a solvable operator.

    ``a0`` is a0 mod Z; ``blocks`` lists (n, l, residues) for every block
    with a unit entry, the residues of lambda mod p from the first unit
    entry on.  Dropping the leading residue-zero entries identifies a block
    with its Frobenius twists, since on F_p coefficients the twist sends
    (n, M, lambda) to (n, M+1, (0, lambda)).  Equal keys imply isomorphic
    operators; unequal keys are distinct under the implemented
    normalizations only.
    """

    p: int
    a0: object
    blocks: tuple

    def to_json(self):
        a0 = _fstr(self.a0) if isinstance(self.a0, Fraction) else [_fstr(x) for x in self.a0]
        return {"p": self.p, "a0_mod_Z": a0,
                "blocks": [{"n": n, "length": l, "residues": list(res)} for n, l, res in self.blocks]}


def _a0_mod_z(a0):
    if isinstance(a0, ExtElement):
        return tuple(a0.balanced_values())
    a0 = Fraction(a0)
    return a0 - math.floor(a0)


def classify(op, report=None):
    """The ClassificationKey of a solvable operator."""
    if report is None:
        report = analyse(op)
    if not report.solvable:
        raise NotSolvable("only solvable operators are classified")
    p = op.p
    blocks = []
    for b in report.blocks:
        r = first_unit_index(b.lam)
        if r is None:
            continue
        res = tuple(x.residue() for x in b.lam.entries[r:])
        blocks.append((b.n, len(res) - 1, res))
    return ClassificationKey(p, _a0_mod_z(op.a0), tuple(sorted(blocks)))
