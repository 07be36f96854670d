"""Series over tower rings: exp/log, Artin-Hasse and pi-exponentials.

Everything here works on truncated ``LaurentSeries``.  Series in T carry a
finite upper bound ``hi`` and series in T^-1 a finite lower bound ``lo``;
the functions that build exponentials take a truncation degree ``N`` (the
``N_T`` of the precision budget) and return series known up to degree N in
the relevant direction.

The universal Artin-Hasse series E(T) = exp(sum_j T^(p^j)/p^j) is expanded
once over exact rationals through the recurrence

    k a_k = sum_{p^j <= k} a_{k - p^j},

which follows from T E'(T)/E(T) = sum_j T^(p^j).  Every other exponential
is a product of substitutions of E(T), so no division by p happens outside
that exact stage (apart from recovering Witt entries from ghost vectors).
"""

from dataclasses import dataclass
from fractions import Fraction
import math

from .errors import (
    IntegralityViolation,
    InsufficientPrecision,
    LevelTooLow,
    NotIntegral,
    NotOverconvergent,
    PositiveSupport,
    ValidationError,
    WindowTooShort,
)
from .laurent import LaurentSeries, scalar_val
from .errors import HenselFails
from .padic_core import ExtElement, hensel_root, pi_at, poly_add, poly_mul
from .witt import (
    GhostVector,
    WittVector,
    decompose,
    ghost,
    split_degree,
    unghost,
)

INF = math.inf

MIN_GROWTH_WINDOW = 16


# ---------------------------------------------------------------------------
# small helpers

def gauss_val(f, r):
    """min_i v(a_i) + i*r over the stored window, with a boundary flag.

    ``r`` is the valuation of the radius (|T| = p^-r).  The flag is true when
    the minimum sits on a truncation bound, i.e. further terms could lower it.
    """
    if not f.coeffs and f.lo is None and f.hi is None:
        return INF, False
    return f.gauss_valuation(r)


def _flip(f):
    """T -> T^-1."""
    return f.substitute_power(-1)


def _is_inverse_series(f):
    return f.lo is not None and f.hi is None


def _unit_like(f):
    return f._one()


def _div_int(c, k):
    if isinstance(c, ExtElement):
        return c / k
    return Fraction(c) / k


# ---------------------------------------------------------------------------
# exp and log

def exp_series(f, N=None):
    """Formal exp(f) for f without constant term.

    ``f`` is a power series in T or in T^-1.  The result is known up to the
    window of ``f`` (or to degree ``N`` when ``f`` is a polynomial).  Over a
    tower ring the division by k costs v_p(k) digits per step; when that eats
    the whole budget ``InsufficientPrecision`` is raised.
    """
    if _is_inverse_series(f):
        return _flip(exp_series(_flip(f), N))
    if f.lo is not None:
        raise ValidationError("f", "exp_series needs a power series in T or in T^-1")
    if any(d < 0 for d in f.coeffs):
        raise ValidationError("f", "mixed positive and negative degrees")
    if f.coeffs.get(0) is not None:
        raise ValidationError("f", "constant term must vanish")
    hi = f.hi
    if N is not None:
        hi = N if hi is None else min(hi, N)
    if hi is None:
        raise ValidationError("N", "a truncation degree is required for polynomials")
    one = _unit_like(f)
    g = [one]
    df = [(j, c * j) for j, c in sorted(f.coeffs.items())]
    for k in range(1, hi + 1):
        acc = None
        for j, c in df:
            if j > k:
                break
            t = c * g[k - j]
            acc = t if acc is None else acc + t
        if acc is None:
            g.append(one * 0)
        else:
            g.append(_div_int(acc, k))
    _check_known(g, f)
    return LaurentSeries.power_series(dict(enumerate(g)), hi, ring=f.ring, p=f.p)


def _check_known(coeffs, f):
    if f.ring is None:
        return
    for k, c in enumerate(coeffs):
        if c.prec < 0:
            raise InsufficientPrecision(f"coefficient {k} lost all precision")


def log_series(h, N=None):
    """Formal log(h) for h with constant term 1 (power series in T or T^-1)."""
    if _is_inverse_series(h):
        return _flip(log_series(_flip(h), N))
    if h.lo is not None or any(d < 0 for d in h.coeffs):
        raise ValidationError("h", "log_series needs a power series in T or in T^-1")
    if h[0] != 1:
        raise ValidationError("h", "constant term must be 1")
    hi = h.hi
    if N is not None:
        hi = N if hi is None else min(hi, N)
    if hi is None:
        raise ValidationError("N", "a truncation degree is required for polynomials")
    zero = _unit_like(h) * 0
    a = [h[k] if k <= hi else zero for k in range(hi + 1)]
    L = [zero]
    for k in range(1, hi + 1):
        acc = a[k] * k
        for j in range(1, k):
            if not _zero(L[j]) and not _zero(a[k - j]):
                acc = acc - L[j] * a[k - j] * j
        L.append(_div_int(acc, k))
    _check_known(L, h)
    return LaurentSeries.power_series(dict(enumerate(L)), hi, ring=h.ring, p=h.p)


def _zero(c):
    if isinstance(c, ExtElement):
        return c.is_zero()
    return c == 0


# ---------------------------------------------------------------------------
# Artin-Hasse

_AH_CACHE = {}


def artin_hasse_universal(p, N):
    """E(T) = exp(T + T^p/p + T^(p^2)/p^2 + ...) to degree N, exact rationals.

    Raises ``IntegralityViolation`` if a coefficient has p in its
    denominator (it never should).  Results are cached per prime; a request
    for a shorter expansion reuses a longer cached one.
    """
    if N < 0:
        raise ValidationError("N", "must be non-negative")
    cached = _AH_CACHE.get(p)
    if cached is not None and len(cached) > N:
        coeffs = cached
    else:
        coeffs = list(cached) if cached is not None else [Fraction(1)]
        powers = []
        q = 1
        while q <= N:
            powers.append(q)
            q *= p
        for k in range(len(coeffs), N + 1):
            acc = Fraction(0)
            for q in powers:
                if q > k:
                    break
                acc += coeffs[k - q]
            a = acc / k
            if a.denominator % p == 0:
                raise IntegralityViolation(f"Artin-Hasse coefficient {k} has p in its denominator")
            coeffs.append(a)
        _AH_CACHE[p] = coeffs
    return LaurentSeries.power_series(dict(enumerate(coeffs[:N + 1])), N, p=p)


def _ah_coefficients(p, N):
    artin_hasse_universal(p, N)
    return _AH_CACHE[p]


def _ah_factor(c, p, step, sign, N, ring):
    """E(c T^(sign*step)) known up to degree N in the relevant direction."""
    K = N // step
    a = _ah_coefficients(p, K)
    out = {}
    power = None
    for k in range(K + 1):
        if k == 0:
            out[0] = ring.one() if ring is not None else Fraction(1)
            power = c
            continue
        if k > 1:
            power = power * c
        if _zero(power):
            break
        out[sign * k * step] = power * a[k]
    if sign > 0:
        return LaurentSeries(out, None, N, ring, p)
    return LaurentSeries(out, -N, None, ring, p)


def E_of_witt(lam, n=1, sign=1, N=64, ring=None):
    """E(lambda, T^(sign*n)) = prod_j E(lambda_j T^(sign*n*p^j)) to degree N.

    Entries may be rationals (exact result) or ring elements.  Entries whose
    degree n p^j exceeds N do not contribute to the window.
    """
    if n <= 0:
        raise ValidationError("n", "substitution degree must be positive")
    if sign not in (1, -1):
        raise ValidationError("sign", "must be +1 or -1")
    p = lam.p
    entries = list(lam.entries)
    if ring is None:
        for x in entries:
            if isinstance(x, ExtElement):
                ring = x.ring
                break
    if ring is not None:
        entries = [ring(x) for x in entries]
    one = ring.one() if ring is not None else Fraction(1)
    result = LaurentSeries({0: one}, None, N, ring, p) if sign > 0 else LaurentSeries({0: one}, -N, None, ring, p)
    for j, x in enumerate(entries):
        step = n * p ** j
        if step > N:
            break
        if _zero(x):
            continue
        result = result * _ah_factor(x, p, step, sign, N, ring)
    return result


# ---------------------------------------------------------------------------
# pi-exponentials

def _witt_length_for(n, p, N):
    """Number of Witt entries lambda_j with n p^j <= N (at least 1)."""
    L = 1
    while n * p ** L <= N:
        L += 1
    return L


def _pi_times(lam, k, ring, L):
    """The Witt vector [pi_k] * lambda, of length L.

    [pi_k] has ghost components <pi_k, ..., pi_0, 0, 0, ...>, so the ghost
    components of the product are pi_(k-j) phi_j(lambda) for j <= k and 0
    afterwards; entries of lambda past index k never matter.
    """
    p = ring.p
    entries = [ring(x) for x in lam.entries]
    phis = ghost(WittVector(entries, p, check=False)).entries
    gh = []
    for j in range(L):
        if j <= k:
            phi = phis[j] if j < len(phis) else ring.zero()
            gh.append(pi_at(ring, k - j) * phi)
        else:
            gh.append(ring.zero())
    try:
        return unghost(GhostVector(gh, p))
    except NotIntegral as exc:
        raise IntegralityViolation(
            f"[pi_{k}]*lambda has a non-integral entry {exc.index}; "
            f"lambda is not integral or precision is exhausted") from exc


def _check_level(ring, m):
    if ring is None or ring.is_base or ring.level < m:
        have = None if ring is None else ring.level
        raise LevelTooLow(f"need a tower ring of level >= {m}, got level {have}")


def pi_exponential(lam, d, ring, sign=1, N=64):
    """e_d(lambda, T^sign) = E([pi_m] lambda, T^(sign*n)) with d = n p^m.

    ``lam`` has length m+1.  The tower ring must have level at least m.
    """
    p = ring.p
    n, m = split_degree(d, p)
    _check_level(ring, m)
    if len(lam) != m + 1:
        raise ValidationError("lambda", f"must have length m+1 = {m + 1} for d = {d}")
    L = max(m + 1, _witt_length_for(n, p, N))
    mu = _pi_times(lam, m, ring, L)
    return E_of_witt(mu, n, sign, N, ring)


def E_m(ring, m, N=64, sign=1):
    """E_m(T) = e_(p^m)((1, 0, ..., 0), T)."""
    lam = WittVector([ring.one()] + [ring.zero()] * m, ring.p, check=False)
    return pi_exponential(lam, ring.p ** m, ring, sign, N)


def theta(lam, d, ring, frob=None, N=64):
    """theta_d(lambda, T) = e_d(frob(lambda), T^p) / e_d(lambda, T).

    ``frob`` acts entrywise on lambda and defaults to the identity (which is
    a valid Frobenius lift on Z_p coefficients).  The quotient is computed as
    a product, using E(-mu, T) = 1/E(mu, T).
    """
    p = ring.p
    n, m = split_degree(d, p)
    _check_level(ring, m)
    if len(lam) != m + 1:
        raise ValidationError("lambda", f"must have length m+1 = {m + 1} for d = {d}")
    lam = WittVector([ring(x) for x in lam.entries], p, check=False)
    lam_f = lam if frob is None else lam.map(lambda x: ring(frob(x)))
    L = max(m + 1, _witt_length_for(n, p, N))
    mu_f = _pi_times(lam_f, m, ring, L)
    mu = _pi_times(lam, m, ring, L)
    neg = unghost(GhostVector([-x for x in ghost(mu).entries], p))
    num = E_of_witt(mu_f, n * p, 1, N, ring)
    den_inv = E_of_witt(neg, n, 1, N, ring)
    return num * den_inv


def e_minus(f, ring, N=64):
    """e_(p^s)(f^-(T), 1) for f^- in W_s of Laurent polynomials in T^-1.

    Computed blockwise: a co-monomial lambda T^-(n p^m) contributes
    E([pi_m] lambda, T^-n) when m <= s and, when m > s, the kept entries
    lambda_(m-s..m) contribute E([pi_s] lambda, T^-(n p^(m-s))).
    """
    p = ring.p
    s = f.m
    _check_level(ring, s)
    dec = decompose(f)
    if not all(_zero(x) for x in dec.const.entries) or not all(x.is_zero() for x in dec.positive.entries):
        raise PositiveSupport("f^- must be supported in strictly negative degrees")
    result = LaurentSeries({0: ring.one()}, -N, None, ring, p)
    for d, blk in sorted(dec.blocks.items()):
        k = min(blk.m, s)
        step = blk.n * p ** max(0, blk.m - s)
        L = max(k + 1, _witt_length_for(step, p, N))
        mu = _pi_times(blk.lam, k, ring, L)
        result = result * E_of_witt(mu, step, -1, N, ring)
    return result


def e_minus_direct(f, ring, N=64):
    """exp(sum_i pi_(s-i) phi_i(f^-) / p^i), the defining formula.

    Divides by p^i and by k! along the way, so it needs far more guard
    digits than ``e_minus``; it is meant as a cross-check.
    """
    p = ring.p
    s = f.m
    _check_level(ring, s)
    phis = ghost(f).entries
    total = LaurentSeries({}, None, None, ring, p)
    for i, phi in enumerate(phis):
        term = phi.with_ring(ring) * pi_at(ring, s - i)
        total = total + term.div_p(i)
    total = total.truncate(lo=-N)
    if any(d >= 0 for d in total.coeffs):
        raise PositiveSupport("f^- must be supported in strictly negative degrees")
    return exp_series(LaurentSeries(total.coeffs, -N, None, ring, p))


# ---------------------------------------------------------------------------
# growth of coefficient valuations

OVERCONVERGENT = "Overconvergent"
UNIT_RADIUS = "UnitRadius"
SUBUNIT = "Subunit"


@dataclass(frozen=True)
class GrowthReport:
    """Hull-based summary of how v(a_i) behaves on the tail of a window.

    ``slope`` is the slope of the lower convex hull of the points (i, v(a_i))
    at the middle of the tail window; ``intercept`` is the largest c with
    v(a_i) >= c + slope * i on the whole tail.  Degrees are measured in the
    direction of the series (|i| for series in T^-1).
    """

    window: tuple
    slope: object
    intercept: object
    min_tail_val: object
    classification: str
    threshold: Fraction

    def to_json(self):
        def enc(x):
            if x == INF:
                return "inf"
            if x == -INF:
                return "-inf"
            q = Fraction(x)
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return {"window": list(self.window), "slope": enc(self.slope),
                "intercept": enc(self.intercept), "min_tail_val": enc(self.min_tail_val),
                "classification": self.classification, "threshold": enc(self.threshold)}


def growth_threshold(p):
    """Slope above which a tail counts as growing: 1/(2p(p-1))."""
    return Fraction(1, 2 * p * (p - 1))


def _lower_hull(pts):
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _directed(f):
    """Return (series in T, window lo, hi) for the growth direction of f."""
    if _is_inverse_series(f):
        f = _flip(f)
    if f.hi is None:
        return f, None
    lo = 0 if f.lo is None else f.lo
    if f.coeffs:
        lo = min(lo, min(f.coeffs))
    return f, (lo, f.hi)


def growth_slope(f, tail_fraction=None):
    """Classify the growth of coefficient valuations over the tail window.

    The tail window is the last ``tail_fraction`` of the known degrees; the
    default 1 - 1/p makes it [hi/p, hi], one full period of the patterns that
    repeat under d -> p d (a window that misses every power of p can miss the
    smallest valuations).
    Classification uses the threshold t = 1/(2p(p-1)):
    Overconvergent when slope >= t and the tail valuations are positive,
    Subunit when slope <= -t, UnitRadius otherwise.
    """
    g, win = _directed(f)
    p = f.p
    thr = growth_threshold(p)
    if win is None:
        # an exact polynomial: the tail is identically zero
        lo, hi = g.window
        return GrowthReport((lo, hi), INF, INF, INF, OVERCONVERGENT, thr)
    lo, hi = win
    if hi - lo + 1 < MIN_GROWTH_WINDOW:
        raise WindowTooShort(f"window [{lo}, {hi}] is shorter than {MIN_GROWTH_WINDOW}",
                             needed=lo + MIN_GROWTH_WINDOW - 1)
    tf = Fraction(1) - Fraction(1, p) if tail_fraction is None else Fraction(tail_fraction)
    if not 0 < tf <= 1:
        raise ValidationError("tail_fraction", "must lie in (0, 1]")
    start = hi - int(tf * (hi - lo))
    if hi - start + 1 < MIN_GROWTH_WINDOW // 2:
        start = max(lo, hi - MIN_GROWTH_WINDOW // 2 + 1)
    pts = []
    for d in range(start, hi + 1):
        c = g.coeffs.get(d)
        if c is None:
            continue
        v = scalar_val(c, p)
        if v != INF:
            pts.append((d, Fraction(v)))
    if not pts:
        return GrowthReport((start, hi), INF, INF, INF, OVERCONVERGENT, thr)
    min_tail = min(v for _, v in pts)
    if len(pts) == 1:
        slope = Fraction(0)
    else:
        hull = _lower_hull(pts)
        mid = Fraction(start + hi, 2)
        slope = None
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= mid <= x2:
                slope = (y2 - y1) / (x2 - x1)
                break
        if slope is None:
            # all points on one side of the middle
            (x1, y1), (x2, y2) = (hull[0], hull[1]) if hull[0][0] > mid else (hull[-2], hull[-1])
            slope = (y2 - y1) / (x2 - x1)
    intercept = min(v - slope * d for d, v in pts)
    if slope >= thr and min_tail > 0:
        cls = OVERCONVERGENT
    elif slope <= -thr:
        cls = SUBUNIT
    else:
        cls = UNIT_RADIUS
    return GrowthReport((start, hi), slope, intercept, min_tail, cls, thr)


# ---------------------------------------------------------------------------
# evaluation at T = 1

@dataclass(frozen=True)
class Evaluation:
    """Value of a series at T = 1 with the valuation bound on the dropped tail."""

    value: object
    error_valuation: object

    def to_json(self):
        v = self.value.to_json() if isinstance(self.value, ExtElement) else str(self.value)
        ev = "inf" if self.error_valuation == INF else str(Fraction(self.error_valuation))
        return {"value": v, "error_valuation": ev}


def eval_at_1(f, report=None, target=None):
    """Sum of the coefficients of an overconvergent series.

    The dropped tail is bounded with the growth fit: every coefficient past
    the window has valuation at least intercept + slope * (hi + 1).  The
    returned value carries that bound as its precision.  With ``target``
    set, ``WindowTooShort`` reports the window end needed to reach it.
    """
    if f.is_polynomial():
        total = f._one() * 0
        for c in f.coeffs.values():
            total = total + c
        return Evaluation(total, INF)
    if report is None:
        report = growth_slope(f)
    if report.classification != OVERCONVERGENT:
        raise NotOverconvergent(f"growth classification is {report.classification}")
    hi = report.window[1]
    if report.slope == INF:
        bound = INF
    else:
        bound = report.intercept + report.slope * (hi + 1)
    if target is not None and bound < target:
        needed = math.ceil((Fraction(target) - report.intercept) / report.slope)
        raise WindowTooShort(f"tail bound {bound} is below the target {target}", needed=needed)
    total = f._one() * 0
    for c in f.coeffs.values():
        total = total + c
    if isinstance(total, ExtElement) and bound != INF:
        e = total.ring.e
        total = total.with_precision(max(0, math.floor(bound * e)))
    return Evaluation(total, bound)


def ramified_root_of_unity(ring, m=0):
    """xi_m = 1 + y with y the image of pi_m in the multiplicative group.

    The torsion point pi_m of the tower is carried to the multiplicative
    formal group (X+1)^p - 1 through the Lubin-Tate isomorphism, giving a
    primitive p^(m+1)-th root of unity congruent to 1 + pi_m.  A short
    bracket gives a seed, which Newton's method refines on the cyclotomic
    polynomial (1+y)^(p^(m+1)) - 1 divided by (1+y)^(p^m) - 1.
    """
    from .lubin_tate import bracket, eval_series, standard, validate

    _check_level(ring, m)
    p = ring.p
    data = validate(ring.P, ring.P[1], ring.p)
    mult = standard(p, "multiplicative")
    x = pi_at(ring, m)
    cyc = _shifted_cyclotomic(p, m)
    N = 2 * p
    while True:
        seed = eval_series(bracket(1, data, mult, N, modulus_digits=ring.budget.working_digits), x)
        try:
            y = hensel_root(cyc, seed)
            break
        except HenselFails:
            if N > ring.cap:
                raise
            N *= 2
    return ring.one() + y


def _shifted_cyclotomic(p, m):
    """Coefficients of Phi_(p^(m+1))(1+y) as integers."""
    inner = [1]
    for _ in range(p ** m):
        inner = poly_mul(inner, [1, 1])
    out = [0]
    power = [1]
    for _ in range(p):
        out = poly_add(out, power)
        power = poly_mul(power, inner)
    return out
