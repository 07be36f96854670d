"""Independent reference computations used by the tests.

Nothing here imports the package under test.  The oracles are deliberately
naive: dense integer polynomials reduced modulo a monic modulus and p^N,
rational power series with exact Fractions, and Witt polynomials evaluated
directly from their definition.
"""

from fractions import Fraction


def vp(n, p):
    n = abs(n)
    if n == 0:
        return float("inf")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vq(q, p):
    q = Fraction(q)
    if q == 0:
        return float("inf")
    return vp(q.numerator, p) - vp(q.denominator, p)


def poly_compose_int(f, g):
    out = [0]
    for c in reversed(f):
        out = poly_mul_int(out, g)
        out[0] += c
    return out


def poly_mul_int(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def tower_modulus(P, s):
    """P^(s+1)(X)/P^(s)(X) by long division of integer polynomials."""
    inner = [0, 1]
    for _ in range(s):
        inner = poly_compose_int(P, inner)
    outer = poly_compose_int(P, inner)
    num = list(outer)
    den = list(inner)
    while den and den[-1] == 0:
        den.pop()
    while num and num[-1] == 0:
        num.pop()
    q = [0] * (len(num) - len(den) + 1)
    rem = list(num)
    for k in range(len(q) - 1, -1, -1):
        c = rem[k + len(den) - 1] // den[-1]
        q[k] = c
        for i, d in enumerate(den):
            rem[k + i] -= c * d
    assert not any(rem), "P^(s) does not divide P^(s+1)"
    return q


class PolyModRing:
    """Z[x]/(modulus, p^N) with dense integer coefficient lists."""

    def __init__(self, modulus, p, N):
        self.mod = list(modulus)
        self.e = len(modulus) - 1
        self.p = p
        self.N = N
        self.q = p ** N

    def reduce(self, f):
        f = list(f)
        for k in range(len(f) - 1, self.e - 1, -1):
            c = f[k]
            if c:
                for i in range(self.e + 1):
                    f[k - self.e + i] -= c * self.mod[i]
        f = f[: self.e] + [0] * max(0, self.e - len(f))
        return [c % self.q for c in f]

    def mul(self, a, b):
        return self.reduce(poly_mul_int(a, b))

    def add(self, a, b):
        return [(x + y) % self.q for x, y in zip(a, b)]

    def const(self, c):
        return self.reduce([c])


def exp_series_rational(f, N):
    """exp(f) for a rational series f with f(0) = 0, via the ODE y' = f' y."""
    fd = [Fraction(k) * f[k] for k in range(1, N + 1)] + [Fraction(0)]
    y = [Fraction(0)] * (N + 1)
    y[0] = Fraction(1)
    for k in range(1, N + 1):
        acc = Fraction(0)
        for i in range(1, k + 1):
            acc += fd[i - 1] * y[k - i]
        y[k] = acc / k
    return y


def artin_hasse_rational(p, N):
    """exp(sum_{j} T^(p^j)/p^j) to degree N as exact Fractions."""
    f = [Fraction(0)] * (N + 1)
    pj = 1
    while pj <= N:
        f[pj] = Fraction(1, pj)
        pj *= p
    return exp_series_rational(f, N)


def witt_poly(x, p, n):
    """n-th ghost component sum_i p^i x_i^(p^(n-i)) of a Witt vector."""
    return sum(p ** i * x[i] ** (p ** (n - i)) for i in range(n + 1))


def mobius_exp_coefficient_check(p, N):
    """The AH coefficients through the product prod_(k prime to p)(1 - T^k)^(-mu(k)/k)."""
    def mu(k):
        res, d, m = 1, 2, k
        while d * d <= m:
            if m % d == 0:
                m //= d
                if m % d == 0:
                    return 0
                res = -res
            d += 1
        if m > 1:
            res = -res
        return res

    series = [Fraction(0)] * (N + 1)
    series[0] = Fraction(1)
    for k in range(1, N + 1):
        if k % p == 0 or mu(k) == 0:
            continue
        a = Fraction(-mu(k), k)
        # (1 - T^k)^(-mu/k) = sum_j binom(a, j)(-T^k)^j, with a = -mu/k
        b = [Fraction(0)] * (N + 1)
        coef = Fraction(1)
        j = 0
        while j * k <= N:
            b[j * k] = coef * (-1) ** j
            coef = coef * (a - j) / (j + 1)
            j += 1
        new = [Fraction(0)] * (N + 1)
        for i, u in enumerate(series):
            if u:
                for t in range(0, N + 1 - i, k):
                    if b[t]:
                        new[i + t] += u * b[t]
        series = new
    return series

