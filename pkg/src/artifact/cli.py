"""Command line front end: JSON job in, JSON report out.

Usage::

    artifact solvable --input job.json
    artifact witt ghost --input job.json --prec 30
    artifact lt group-law --input job.json

Ring elements are encoded either as a single rational string ("3/5", "-1")
or as a list of rational strings giving the coefficients in powers of the
uniformizer x of the declared ring (x = pi_level on a tower level, x = p on
Z_p).  Every number in the output is a string.  Verdicts such as "not
solvable" exit with status 0; errors print ``{"error": code, ...}`` and
exit with status 2.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import lubin_tate as lt
from . import padic_series as ps
from . import solvability as sv
from . import witt
from .errors import ArtifactError, ParseError, ValidationError
from .laurent import LaurentSeries
from .padic_core import (
    ExtElement,
    PrecisionBudget,
    base_ring,
    is_prime,
    make_tower,
    newton_polygon,
    pi_at,
)

DEFAULT_PRECISION = 20
DEFAULT_TRUNCATION = 64
DEFAULT_LT_DEGREE = 12

COMMANDS = ("solvable", "irregularity", "decompose", "classify", "radius", "ah-exp",
            "pi-exp", "theta-eval", "witt", "lt")
WITT_OPS = ("add", "mul", "ghost", "unghost", "frob", "versch")
LT_OPS = ("validate", "group-law", "bracket", "torsion", "iso")


# ---------------------------------------------------------------------------
# encoding

def fstr(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def encode_element(a):
    if isinstance(a, ExtElement):
        return a.to_json()
    return fstr(a)


def encode_value(v):
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return fstr(v)


def encode_series(f):
    return {"window": [f.lo, f.hi],
            "coefficients": {str(d): encode_element(c) for d, c in sorted(f.coeffs.items())}}


def encode_witt(w):
    out = []
    for x in w.entries:
        if isinstance(x, LaurentSeries):
            out.append({str(d): encode_element(c) for d, c in sorted(x.coeffs.items())})
        else:
            out.append(encode_element(x))
    return out


def _rational(value, where):
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: cannot read {value!r} as a rational") from exc


def _check_denominator(q, p, where):
    if q.denominator % p == 0:
        raise ValidationError(where, f"denominator of {fstr(q)} is divisible by p = {p}")


def decode_element(value, ring, where, allow_p_denominator=False):
    if isinstance(value, list):
        qs = [_rational(v, where) for v in value]
        if not allow_p_denominator:
            for q in qs:
                _check_denominator(q, ring.p, where)
        return ring.from_coefficients(qs)
    q = _rational(value, where)
    if not allow_p_denominator:
        _check_denominator(q, ring.p, where)
    return ring.from_rational(q)


# ---------------------------------------------------------------------------
# jobs

class JobSpec:
    """A validated job: prime, budget, optional Lubin-Tate data and payload."""

    def __init__(self, raw, prec=None, trunc=None, level=None):
        if not isinstance(raw, dict):
            raise ValidationError("job", "top level must be a JSON object")
        self.raw = raw
        if "p" not in raw:
            raise ValidationError("p", "missing")
        try:
            self.p = int(raw["p"])
        except (TypeError, ValueError) as exc:
            raise ValidationError("p", "not an integer") from exc
        if not is_prime(self.p):
            raise ValidationError("p", f"{self.p} is not prime")
        self.precision = int(prec if prec is not None else raw.get("precision", DEFAULT_PRECISION))
        if self.precision < 1:
            raise ValidationError("precision", "must be at least 1")
        self.truncation = int(trunc if trunc is not None else raw.get("truncation", DEFAULT_TRUNCATION))
        if self.truncation < 1:
            raise ValidationError("truncation", "must be at least 1")
        lvl = level if level is not None else raw.get("level")
        self.level = None if lvl is None else int(lvl)
        if self.level is not None and self.level < 0:
            raise ValidationError("level", "must be non-negative")
        self.lubin_tate = None
        if raw.get("lubin_tate") is not None:
            self.lubin_tate = parse_lubin_tate(raw["lubin_tate"], self.p, "lubin_tate")
        self.budget = PrecisionBudget.for_series(self.p, self.precision, self.truncation,
                                                 self.level or 0)

    def ring(self, level=None):
        level = self.level if level is None else level
        if level is None:
            return base_ring(self.budget)
        if self.lubin_tate is None:
            raise ValidationError("lubin_tate", "a tower level needs a Lubin-Tate polynomial")
        if not self.lubin_tate.is_polynomial:
            raise ValidationError("lubin_tate", "tower rings need a polynomial P")
        return make_tower(self.lubin_tate.integer_coefficients(), level, self.budget)

    def field(self, name, default=None, required=False):
        if name not in self.raw:
            if required:
                raise ValidationError(name, "missing")
            return default
        return self.raw[name]

    def echo(self, achieved=None):
        out = {"p": self.p, "precision": self.precision, "truncation": self.truncation,
               "guard_digits": self.budget.guard_digits,
               "level": self.level}
        if achieved is not None:
            out["achieved"] = achieved
        return out


def parse_lubin_tate(obj, p, where):
    if not isinstance(obj, dict) or "P" not in obj:
        raise ValidationError(where, "needs P")
    coeffs = [_rational(c, where) for c in obj["P"]]
    w = _rational(obj.get("w", coeffs[1] if len(coeffs) > 1 else 0), where)
    for c in coeffs:
        _check_denominator(c, p, where)
    return lt.validate(coeffs, w, p)


def parse_job(source, prec=None, trunc=None, level=None):
    """Read a job from a path, a file object or an already decoded dict."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            if hasattr(source, "read"):
                raw = json.load(source)
            else:
                with open(source) as fh:
                    raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return JobSpec(raw, prec, trunc, level)


def _operator(job):
    """The operator d + sum c_i T^i of the payload, stored as d - g with g = -sum c_i T^i."""
    ring = job.ring()
    coeffs = job.field("coefficients", {}, required=True)
    if not isinstance(coeffs, dict):
        raise ValidationError("coefficients", "must map degrees to elements")
    out = {}
    a0 = Fraction(0)
    for key, value in coeffs.items():
        try:
            i = int(key)
        except ValueError as exc:
            raise ParseError(f"coefficients: degree {key!r} is not an integer") from exc
        if i == 0 and not isinstance(value, list):
            # the residue stays an exact rational so that a0 in Z can be decided
            a0 = -_rational(value, "coefficients.0")
        else:
            c = -decode_element(value, ring, f"coefficients.{key}")
            if i == 0:
                a0 = c
            else:
                out[i] = c
    P = job.lubin_tate.integer_coefficients() if job.lubin_tate is not None else None
    return sv.RankOneOperator(ring, out, a0, P)


def _witt_vector(job, name, ring):
    entries = job.field(name, required=True)
    if not isinstance(entries, list) or not entries:
        raise ValidationError(name, "must be a non-empty list")
    return witt.WittVector([decode_element(x, ring, f"{name}[{i}]") for i, x in enumerate(entries)],
                           job.p, check=False)


def _laurent_witt(job, name, ring):
    entries = job.field(name, required=True)
    if not isinstance(entries, list) or not entries:
        raise ValidationError(name, "must be a non-empty list of degree maps")
    out = []
    for i, ent in enumerate(entries):
        if not isinstance(ent, dict):
            raise ValidationError(f"{name}[{i}]", "must map degrees to elements")
        terms = {int(d): decode_element(v, ring, f"{name}[{i}].{d}") for d, v in ent.items()}
        out.append(LaurentSeries.polynomial(terms, ring=ring))
    return witt.WittVector(out, job.p, check=False)


# ---------------------------------------------------------------------------
# commands

def cmd_solvable(job, args):
    op = _operator(job)
    rep = sv.analyse(op, override_M=args.override_M)
    out = rep.to_json()
    if rep.f_minus is not None:
        out["witt_decomposition"] = encode_witt(rep.f_minus)
    out["solvable"] = rep.solvable
    return out


def cmd_irregularity(job, args):
    op = _operator(job)
    rep = sv.analyse(op, override_M=args.override_M)
    return {"irregularity": sv.irregularity(rep),
            "blocks": [{"n": b.n, "M": b.M, "irregularity": b.contribution} for b in rep.blocks]}


def cmd_classify(job, args):
    op = _operator(job)
    rep = sv.analyse(op, override_M=args.override_M)
    return {"key": sv.classify(op, rep).to_json()}


def cmd_decompose(job, args):
    ring = job.ring()
    f = _laurent_witt(job, "witt", ring)
    dec = witt.decompose(f)
    return {"blocks": [{"n": b.n, "m": b.m, "degree": -b.d, "lambda": encode_witt(b.lam)}
                       for _, b in sorted(dec.blocks.items())],
            "constant": encode_witt(dec.const),
            "positive": encode_witt(dec.positive)}


def cmd_radius(job, args):
    op = _operator(job)
    r = _rational(job.field("r", "0"), "r")
    S = int(job.field("S", 16))
    est = sv.ray_estimate(op, r, S)
    return {"radius_valuation": encode_value(est.value), "small_radius": est.small_radius,
            "r": fstr(r), "S": S}


def cmd_ah_exp(job, args):
    E = ps.artin_hasse_universal(job.p, job.truncation)
    return {"coefficients": {str(d): fstr(c) for d, c in sorted(E.coeffs.items())}}


def _lambda_and_degree(job, ring):
    d = int(job.field("d", 1))
    lam = _witt_vector(job, "lambda", ring)
    return lam, d


def _tail_fraction(args):
    return None if args.tail_window is None else Fraction(args.tail_window)


def cmd_pi_exp(job, args):
    ring = job.ring()
    lam, d = _lambda_and_degree(job, ring)
    sign = int(job.field("sign", 1))
    f = ps.pi_exponential(lam, d, ring, sign, job.truncation)
    rep = ps.growth_slope(f, _tail_fraction(args))
    return {"series": encode_series(f), "growth": rep.to_json()}


def cmd_theta_eval(job, args):
    ring = job.ring()
    lam, d = _lambda_and_degree(job, ring)
    n, m = witt.split_degree(d, job.p)
    th = ps.theta(lam, d, ring, None, job.truncation)
    rep = ps.growth_slope(th, _tail_fraction(args))
    ev = ps.eval_at_1(th, rep)
    value = ev.value
    order = None
    power = value
    for k in range(m + 2):
        if (power - 1).is_zero():
            order = job.p ** k
            break
        power = power ** job.p
    return {"value": encode_element(value), "error_valuation": encode_value(ev.error_valuation),
            "root_order": order, "growth": rep.to_json()}


def cmd_witt(job, args):
    ring = job.ring()
    op = args.op
    if op in ("add", "mul"):
        a = _witt_vector(job, "witt", ring)
        b = _witt_vector(job, "witt2", ring)
        res = a + b if op == "add" else a * b
        return {"result": encode_witt(res)}
    if op == "ghost":
        return {"ghost": encode_witt(witt.ghost(_witt_vector(job, "witt", ring)))}
    if op == "unghost":
        entries = job.field("ghost", required=True)
        g = witt.GhostVector([decode_element(x, ring, f"ghost[{i}]") for i, x in enumerate(entries)], job.p)
        return {"result": encode_witt(witt.unghost(g))}
    if op == "frob":
        return {"result": encode_witt(witt.frobenius(_witt_vector(job, "witt", ring)))}
    if op == "versch":
        return {"result": encode_witt(witt.verschiebung(_witt_vector(job, "witt", ring)))}
    raise ValidationError("op", f"unknown witt operation {op}")


def _lt_required(job):
    if job.lubin_tate is None:
        raise ValidationError("lubin_tate", "missing")
    return job.lubin_tate


def cmd_lt(job, args):
    op = args.op
    P = _lt_required(job)
    N = int(job.field("degree", DEFAULT_LT_DEGREE))
    if op == "validate":
        return {"valid": True, "lubin_tate": P.to_json()}
    if op == "group-law":
        G = lt.group_law(P, N)
        residuals = {k: v.is_zero() for k, v in G.check().items()}
        return {"group_law": G.G.to_json(), "residuals_vanish": residuals}
    if op == "bracket":
        Pt = parse_lubin_tate(job.raw["lubin_tate2"], job.p, "lubin_tate2") if "lubin_tate2" in job.raw else P
        a = _rational(job.field("a", "1"), "a")
        _check_denominator(a, job.p, "a")
        return {"bracket": [fstr(c) for c in lt.bracket(a, P, Pt, N)]}
    if op == "torsion":
        level = job.level if job.level is not None else 0
        rows = []
        for s in range(level + 1):
            ring = job.ring(s)
            slopes = newton_polygon(ring.modulus, job.p)
            compat = all((lt.eval_series(P.P, pi_at(ring, j + 1)) - pi_at(ring, j)).is_zero()
                         for j in range(s))
            rows.append({"level": s, "modulus": [str(c) for c in ring.modulus],
                         "eisenstein": True,
                         "root_valuations": [[fstr(v), str(mult)] for v, mult in slopes],
                         "compatible": compat})
        return {"tower": rows}
    if op == "iso":
        Pt = parse_lubin_tate(job.field("lubin_tate2", required=True), job.p, "lubin_tate2")
        return {"isomorphic": lt.iso_test(P, Pt)}
    raise ValidationError("op", f"unknown lt operation {op}")


HANDLERS = {
    "solvable": cmd_solvable,
    "irregularity": cmd_irregularity,
    "decompose": cmd_decompose,
    "classify": cmd_classify,
    "radius": cmd_radius,
    "ah-exp": cmd_ah_exp,
    "pi-exp": cmd_pi_exp,
    "theta-eval": cmd_theta_eval,
    "witt": cmd_witt,
    "lt": cmd_lt,
}


def _label(command, args):
    op = getattr(args, "op", None)
    return command if op is None else f"{command} {op}"


def run(command, job, args):
    """Run one command; returns (report dict, exit code)."""
    try:
        body = HANDLERS[command](job, args)
        code = 0
    except ArtifactError as exc:
        body = exc.to_json()
        code = 2
    body["command"] = _label(command, args)
    body["job"] = job.echo()
    return body, code


def build_parser():
    parser = argparse.ArgumentParser(prog="artifact", description="p-adic solvability toolkit")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("op", nargs="?", help="sub-operation for witt and lt")
    parser.add_argument("--input", help="job file (default: standard input)")
    parser.add_argument("--out", help="report file (default: standard output)")
    parser.add_argument("--prec", type=int, help="precision in base-p digits")
    parser.add_argument("--trunc", type=int, help="series truncation degree")
    parser.add_argument("--level", type=int, help="tower level")
    parser.add_argument("--override-M", dest="override_M", type=int, help="force the block top index")
    parser.add_argument("--tail-window", dest="tail_window", help="tail fraction for growth fits")
    return parser


def stringify(obj):
    """Turn every number in a report into a string (booleans and null stay)."""
    if isinstance(obj, dict):
        return {str(k): stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [stringify(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, float):
        return encode_value(obj) if obj in (float("inf"), float("-inf")) else repr(obj)
    if isinstance(obj, (int, Fraction)):
        return fstr(obj)
    return str(obj)


def _emit(report, path):
    text = json.dumps(stringify(report), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "witt" and args.op not in WITT_OPS:
        parser.error(f"witt needs one of {', '.join(WITT_OPS)}")
    if args.command == "lt" and args.op not in LT_OPS:
        parser.error(f"lt needs one of {', '.join(LT_OPS)}")
    if args.command not in ("witt", "lt") and args.op is not None:
        parser.error(f"{args.command} takes no sub-operation")
    try:
        job = parse_job(args.input if args.input else sys.stdin, args.prec, args.trunc, args.level)
    except ArtifactError as exc:
        out = exc.to_json()
        out["command"] = _label(args.command, args)
        _emit(out, args.out)
        return 2
    report, code = run(args.command, job, args)
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
