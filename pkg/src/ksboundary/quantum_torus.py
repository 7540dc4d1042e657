"""The quantum torus algebra on Gamma_KS and its classical Lie algebra.

Keys are pairs (gamma, beta) with beta = Q(gamma). Coefficients are QLaurent by
default; GsSeries and QRational coefficients are also accepted, so the same
product serves the q-side and the g_s-side of a computation.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import factorial
from typing import Iterable

from .charge_lattice import Charge, GeometrySpec, as_charge, vadd
from .coefficients import (
    CoefficientError,
    GsSeries,
    QLaurent,
    QRational,
    frac_str,
    parse_frac,
    parse_qlaurent,
    parse_series,
    qpow_series,
    render_qlaurent,
    render_series,
    substitute_q_to_gs,
)

Key = tuple[Charge, Charge]


class TorusError(ValueError):
    pass


# -- coefficient helpers ------------------------------------------------------

def _is_zero(c) -> bool:
    if isinstance(c, QRational):
        return c.is_zero()
    return not c


def _unify(a, b):
    """Bring two coefficients into one ring (QLaurent is promoted to series)."""
    if isinstance(a, GsSeries) and isinstance(b, QLaurent):
        return a, substitute_q_to_gs(b, a.order)
    if isinstance(b, GsSeries) and isinstance(a, QLaurent):
        return substitute_q_to_gs(a, b.order), b
    if isinstance(a, QRational) and isinstance(b, QLaurent):
        return a, QRational(b)
    if isinstance(b, QRational) and isinstance(a, QLaurent):
        return QRational(a), b
    if isinstance(a, GsSeries) and isinstance(b, GsSeries) and a.order != b.order:
        # a coefficient is only as good as its least precise ingredient
        m = min(a.order, b.order)
        return a.truncate(m), b.truncate(m)
    return a, b


def cadd(a, b):
    a, b = _unify(a, b)
    return a + b


def cmul(a, b):
    a, b = _unify(a, b)
    return a * b


def qshift(c, half_exp: int):
    """c * q^(half_exp/2)."""
    if half_exp == 0:
        return c
    if isinstance(c, QLaurent):
        return c.scale_q(half_exp)
    if isinstance(c, GsSeries):
        return c * qpow_series(half_exp, c.order)
    if isinstance(c, QRational):
        return QRational(c.num.scale_q(half_exp), c.den)
    raise TorusError(f"unsupported coefficient type {type(c).__name__}")


def _coerce(c):
    if isinstance(c, (int, Fraction)):
        return QLaurent.const(c)
    if isinstance(c, (QLaurent, GsSeries, QRational)):
        return c
    raise TorusError(f"unsupported coefficient type {type(c).__name__}")


# -- the algebra --------------------------------------------------------------

class TorusElement:
    """Finite sum of c * e_(gamma, beta), truncated at grading degree ``bound``."""

    __slots__ = ("spec", "terms", "bound")

    def __init__(self, spec: GeometrySpec, terms=None, bound: int | None = None):
        self.spec = spec
        self.bound = bound
        d: dict[Key, object] = {}
        for key, c in (terms or {}).items():
            key = check_key(spec, key)
            if bound is not None and spec.key_degree(*key) > bound:
                continue
            c = _coerce(c)
            if key in d:
                c = cadd(d[key], c)
            d[key] = c
        self.terms = {k: v for k, v in d.items() if not _is_zero(v)}

    @classmethod
    def one(cls, spec, bound=None, coeff=1) -> "TorusElement":
        z = (0,) * spec.rank
        return cls(spec, {(z, spec.Q(z)): coeff}, bound)

    @classmethod
    def generator(cls, spec, gamma, coeff=1, bound=None) -> "TorusElement":
        gamma = as_charge(gamma, spec.rank)
        return cls(spec, {(gamma, spec.Q(gamma)): coeff}, bound)

    def _compat(self, other: "TorusElement") -> int | None:
        if other.spec is not self.spec and other.spec != self.spec:
            raise TorusError("torus elements over different geometries")
        if self.bound is None:
            return other.bound
        if other.bound is None:
            return self.bound
        return min(self.bound, other.bound)

    def __add__(self, other):
        if not isinstance(other, TorusElement):
            other = TorusElement.one(self.spec, self.bound, other)
        bound = self._compat(other)
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = cadd(d[k], v) if k in d else v
        return TorusElement(self.spec, d, bound)

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.spec, {k: -v for k, v in self.terms.items()}, self.bound)

    def __sub__(self, other):
        if not isinstance(other, TorusElement):
            other = TorusElement.one(self.spec, self.bound, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TorusElement":
        return TorusElement(self.spec, {k: cmul(v, c) for k, v in self.terms.items()}, self.bound)

    def __mul__(self, other):
        if isinstance(other, TorusElement):
            return torus_mul(self, other)
        return self.scale(_coerce(other) if isinstance(other, int) else other)

    def __rmul__(self, other):
        return self.scale(_coerce(other) if isinstance(other, int) else other)

    def __eq__(self, other):
        if not isinstance(other, TorusElement):
            return NotImplemented
        if self.terms.keys() != other.terms.keys():
            return False
        for k, v in self.terms.items():
            a, b = _unify(v, other.terms[k])
            if a != b:
                return False
        return True

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, gamma) -> object:
        gamma = as_charge(gamma, self.spec.rank)
        return self.terms.get((gamma, self.spec.Q(gamma)), QLaurent())

    def truncate(self, bound: int) -> "TorusElement":
        return TorusElement(self.spec, self.terms, bound)

    def map_coeffs(self, f) -> "TorusElement":
        return TorusElement(self.spec, {k: f(v) for k, v in self.terms.items()}, self.bound)

    def substitute(self, order: int) -> "TorusElement":
        """Coefficients pushed through q^(1/2) = -exp(g_s/2)."""

        def conv(c):
            if isinstance(c, QLaurent):
                return substitute_q_to_gs(c, order)
            if isinstance(c, QRational):
                return c.to_series(order)
            return c.truncate(order) if c.order > order else c

        return self.map_coeffs(conv)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: term_order(kv[0]))

    def __repr__(self):
        return f"TorusElement({render_torus(self)})"

    def __str__(self):
        return render_torus(self)


def check_key(spec: GeometrySpec, key) -> Key:
    gamma, beta = key
    gamma = as_charge(gamma, spec.rank)
    beta = as_charge(beta, spec.flavor_rank)
    if spec.Q(gamma) != beta:
        raise TorusError(f"({gamma}, {beta}) is not in Gamma_KS: Q(gamma) = {spec.Q(gamma)}")
    return gamma, beta


def term_order(key: Key):
    """Lexicographic on (beta, gamma) with the unit term last."""
    gamma, beta = key
    return (not any(gamma) and not any(beta), beta, gamma)


def torus_mul(a: TorusElement, b: TorusElement) -> TorusElement:
    """e_1 e_2 = q^(<g1,g2>/2) e_(1+2), extended bilinearly and truncated."""
    bound = a._compat(b)
    spec = a.spec
    d: dict[Key, object] = {}
    for (g1, b1), c1 in a.terms.items():
        for (g2, b2), c2 in b.terms.items():
            key = (vadd(g1, g2), vadd(b1, b2))
            if bound is not None and spec.key_degree(*key) > bound:
                continue
            c = qshift(cmul(c1, c2), spec.pairing(g1, g2))
            d[key] = cadd(d[key], c) if key in d else c
    return TorusElement(spec, d, bound)


def torus_pow(a: TorusElement, n: int) -> TorusElement:
    out = TorusElement.one(a.spec, a.bound)
    for _ in range(n):
        out = torus_mul(out, a)
    return out


def torus_exp(a: TorusElement, bound: int | None = None) -> TorusElement:
    """sum_m a^m / m!, exact through grading degree ``bound``."""
    bound = a.bound if bound is None else bound
    if bound is None:
        raise TorusError("torus_exp needs a grading bound")
    a = a.truncate(bound)
    for gamma, beta in a.terms:
        deg = a.spec.key_degree(gamma, beta)
        if deg <= 0:
            raise TorusError(f"exp needs positive-degree terms; ({gamma}, {beta}) has degree {deg}")
    coeff_one = 1
    first = next(iter(a.terms.values()), None)
    if isinstance(first, GsSeries):
        coeff_one = GsSeries.one(first.order)
    out = TorusElement.one(a.spec, bound, coeff_one)
    power = TorusElement.one(a.spec, bound, coeff_one)
    m = 0
    while True:
        m += 1
        power = torus_mul(power, a)
        if power.is_zero():
            return out
        out = out + power.scale(Fraction(1, factorial(m)))


def commutator(a: TorusElement, b: TorusElement) -> TorusElement:
    return torus_mul(a, b) - torus_mul(b, a)


# -- classical Lie algebra ----------------------------------------------------

class ClassicalElement:
    __slots__ = ("spec", "terms")

    def __init__(self, spec: GeometrySpec, terms=None):
        self.spec = spec
        d: dict[Key, Fraction] = {}
        for key, c in (terms or {}).items():
            key = check_key(spec, key)
            d[key] = d.get(key, Fraction(0)) + Fraction(c)
        self.terms = {k: v for k, v in d.items() if v}

    @classmethod
    def generator(cls, spec, gamma, coeff=1) -> "ClassicalElement":
        gamma = as_charge(gamma, spec.rank)
        return cls(spec, {(gamma, spec.Q(gamma)): coeff})

    def __add__(self, other):
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = d.get(k, 0) + v
        return ClassicalElement(self.spec, d)

    def __neg__(self):
        return ClassicalElement(self.spec, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ClassicalElement":
        return ClassicalElement(self.spec, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, ClassicalElement) and self.terms == other.terms

    __hash__ = None

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        parts = [f"{frac_str(c)}*e_{g}" for (g, _), c in sorted(self.terms.items(), key=lambda kv: term_order(kv[0]))]
        return "ClassicalElement(" + " + ".join(parts) + ")"


def classical_bracket(a: ClassicalElement, b: ClassicalElement) -> ClassicalElement:
    """[e_1, e_2] = (-1)^<g1,g2> <g1,g2> e_(1+2)."""
    spec = a.spec
    d: dict[Key, Fraction] = {}
    for (g1, b1), c1 in a.terms.items():
        for (g2, b2), c2 in b.terms.items():
            p = spec.pairing(g1, g2)
            if not p:
                continue
            key = (vadd(g1, g2), vadd(b1, b2))
            d[key] = d.get(key, Fraction(0)) + (-1) ** (p % 2) * p * c1 * c2
    return ClassicalElement(spec, d)


# -- text form ----------------------------------------------------------------

def _gamma_str(gamma: Charge) -> str:
    return "(" + ",".join(str(x) for x in gamma) + ")"


def _coeff_str(c) -> tuple[str, str]:
    """(sign, body) of a coefficient; body '' means the coefficient is 1."""
    if isinstance(c, QLaurent):
        if all(v < 0 for v in c.coeffs.values()):
            sign, c = "-", -c
        else:
            sign = "+"
        if c == QLaurent.const(1):
            return sign, ""
        text = render_qlaurent(c)
        return sign, text if len(c.coeffs) == 1 else f"({text})"
    if isinstance(c, GsSeries):
        return "+", f"({render_series(c)})"
    if isinstance(c, QRational):
        return "+", f"(({render_qlaurent(c.num)}) / ({render_qlaurent(c.den)}))"
    return "+", frac_str(Fraction(c))


def render_torus(a: TorusElement) -> str:
    if a.is_zero():
        return "0"
    out = []
    for (gamma, _), c in a.sorted_items():
        sign, body = _coeff_str(c)
        if any(gamma):
            term = f"{body}·ê_{{{_gamma_str(gamma)}}}" if body else f"ê_{{{_gamma_str(gamma)}}}"
        else:
            term = body or "1"
        if not out:
            out.append(("−" if sign == "-" else "") + term)
        else:
            out.append(f" {'−' if sign == '-' else '+'} {term}")
    return "".join(out)


_GEN = re.compile(r"^ê_\{\((?P<g>[-\d,\s]+)\)\}$")


def _split_top(text: str) -> list[tuple[str, str]]:
    """Split at top-level ' + ' / ' − ' separators."""
    parts, depth, start, sign = [], 0, 0, "+"
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif depth == 0 and text.startswith((" + ", " − "), i):
            parts.append((sign, text[start:i]))
            sign = "+" if text[i + 1] == "+" else "-"
            i += 3
            start = i
            continue
        i += 1
    parts.append((sign, text[start:]))
    return parts


def parse_torus(spec: GeometrySpec, text: str, bound: int | None = None) -> TorusElement:
    text = text.strip()
    if text == "0":
        return TorusElement(spec, {}, bound)
    terms = TorusElement(spec, {}, bound)
    for sign, body in _split_top(text):
        body = body.strip()
        if body.startswith("−"):
            sign = "-" if sign == "+" else "+"
            body = body[1:]
        if "·ê_" in body:
            cpart, gpart = body.split("·ê_", 1)
            gpart = "ê_" + gpart
        elif body.startswith("ê_"):
            cpart, gpart = "", body
        else:
            cpart, gpart = body, None
        coeff = _parse_coeff(cpart)
        if gpart is None:
            gamma = (0,) * spec.rank
        else:
            m = _GEN.match(gpart)
            if not m:
                raise TorusError(f"cannot parse generator {gpart!r}")
            gamma = tuple(int(x) for x in m.group("g").split(","))
        if sign == "-":
            coeff = -coeff
        terms = terms + TorusElement.generator(spec, gamma, coeff, bound)
    return terms


def _parse_coeff(text: str):
    text = text.strip()
    if not text:
        return QLaurent.const(1)
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1].strip()
        if inner.startswith("["):
            return parse_series(inner)
        if inner.startswith("(") and ") / (" in inner:
            num, den = inner[1:-1].split(") / (")
            return QRational(parse_qlaurent(num), parse_qlaurent(den))
        return parse_qlaurent(inner)
    try:
        return parse_qlaurent(text)
    except CoefficientError:
        return QLaurent.const(parse_frac(text))


def generators(spec: GeometrySpec, gammas: Iterable, bound=None) -> list[TorusElement]:
    return [TorusElement.generator(spec, g, 1, bound) for g in gammas]
