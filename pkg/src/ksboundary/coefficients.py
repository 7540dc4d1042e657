"""Exact coefficient rings.

``QLaurent``  Laurent polynomials in q^(1/2) over Q, exponents stored doubled.
``GsSeries``  Laurent series in g_s over Q with a finite principal part,
              known exactly through a recorded order M.
``QRational`` quotients of two ``QLaurent`` values, kept symbolic until a
              g_s expansion is requested.

The bridge between the two rings is ``substitute_q_to_gs`` which applies
q^(1/2) = -exp(g_s/2).
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import factorial


class CoefficientError(ValueError):
    pass


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text.strip().replace("−", "-"))


# ----------------------------------------------------------------------------
# Laurent polynomials in q^(1/2)
# ----------------------------------------------------------------------------


class QLaurent:
    """Element of Q[q^(1/2), q^(-1/2)].

    Keys of ``coeffs`` are exponents of q^(1/2), i.e. ``{1: c}`` is c*q^(1/2)
    and ``{2: c}`` is c*q.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=None):
        d = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v:
                    d[int(k)] = v
        self.coeffs = d
        self._hash = None

    @classmethod
    def const(cls, c) -> "QLaurent":
        return cls({0: c})

    @classmethod
    def qpow(cls, half_exp: int, c=1) -> "QLaurent":
        """c * q^(half_exp/2)."""
        return cls({half_exp: c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QLaurent.const(other)
        if not isinstance(other, QLaurent):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def _coerce(self, other) -> "QLaurent":
        if isinstance(other, QLaurent):
            return other
        if isinstance(other, (int, Fraction)):
            return QLaurent.const(other)
        raise CoefficientError(f"cannot mix QLaurent with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        d = dict(self.coeffs)
        for k, v in other.coeffs.items():
            d[k] = d.get(k, 0) + v
        return QLaurent(d)

    __radd__ = __add__

    def __neg__(self):
        return QLaurent({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        d: dict[int, Fraction] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                d[k] = d.get(k, 0) + v1 * v2
        return QLaurent(d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.coeffs) != 1:
                raise CoefficientError("only monomials are invertible in QLaurent")
            ((k, v),) = self.coeffs.items()
            return QLaurent({k * n: Fraction(1) / v ** (-n)})
        out = QLaurent.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale_q(self, half_shift: int) -> "QLaurent":
        return QLaurent({k + half_shift: v for k, v in self.coeffs.items()})

    def at_q_half(self, value) -> Fraction:
        """Evaluate at q^(1/2) = value (used for the classical limit q^(1/2) -> 1)."""
        value = Fraction(value)
        return sum((v * value ** k for k, v in self.coeffs.items()), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.coeffs.values())

    def min_exp(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    def max_exp(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def divmod(self, other: "QLaurent") -> tuple["QLaurent", "QLaurent"]:
        """Euclidean division after shifting both to ordinary polynomials in q^(1/2)."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero QLaurent")
        if self.is_zero():
            return QLaurent(), QLaurent()
        a0, b0 = self.min_exp(), other.min_exp()
        num = _to_poly(self.scale_q(-a0))
        den = _to_poly(other.scale_q(-b0))
        quo, rem = _poly_divmod(num, den)
        return (
            QLaurent(dict(enumerate(quo))).scale_q(a0 - b0),
            QLaurent(dict(enumerate(rem))).scale_q(a0),
        )

    def __repr__(self):
        return f"QLaurent({render_qlaurent(self)})"

    def __str__(self):
        return render_qlaurent(self)


def _to_poly(a: QLaurent) -> list[Fraction]:
    out = [Fraction(0)] * (a.max_exp() + 1)
    for k, v in a.coeffs.items():
        out[k] = v
    return out


def _poly_divmod(num: list[Fraction], den: list[Fraction]):
    while den and den[-1] == 0:
        den.pop()
    num = list(num)
    if len(num) < len(den):
        return [], num
    quo = [Fraction(0)] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(quo) - 1, -1, -1):
        c = num[i + len(den) - 1] / lead
        quo[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    rem = num[: len(den) - 1]
    return quo, rem


def _strip(p: list[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Monic gcd of two polynomials (coefficient lists, constant first)."""
    a, b = _strip(a), _strip(b)
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, _strip(r)
    if not a:
        return [Fraction(1)]
    lead = a[-1]
    return [c / lead for c in a]


def _qexp_str(k: int) -> str:
    if k % 2 == 0:
        return f"q^{{{k // 2}}}"
    return f"q^{{{k}/2}}"


def render_qlaurent(a: QLaurent) -> str:
    """Deterministic text form, exponents ascending: ``-q^{-1/2} + 2 + 1/3q^{1}``."""
    if a.is_zero():
        return "0"
    parts = []
    for k in sorted(a.coeffs):
        v = a.coeffs[k]
        mag = abs(v)
        if k == 0:
            body = frac_str(mag)
        elif mag == 1:
            body = _qexp_str(k)
        else:
            body = f"{frac_str(mag)}{_qexp_str(k)}"
        parts.append(("-" if v < 0 else "+", body))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_QTERM = re.compile(r"^(?P<c>\d+(?:/\d+)?)?(?:q\^\{(?P<e>-?\d+)(?P<h>/2)?\})?$")


def parse_qlaurent(text: str) -> QLaurent:
    text = text.strip().replace("−", "-")
    if text in ("", "0"):
        return QLaurent()
    tokens = re.split(r"\s+([+-])\s+", text)
    signs = ["+"] + tokens[1::2]
    bodies = tokens[0::2]
    if bodies[0].startswith("-"):
        signs[0] = "-"
        bodies[0] = bodies[0][1:]
    d: dict[int, Fraction] = {}
    for sign, body in zip(signs, bodies):
        m = _QTERM.match(body.strip())
        if not m or (m.group("c") is None and m.group("e") is None):
            raise CoefficientError(f"cannot parse q-Laurent term {body!r}")
        c = Fraction(m.group("c")) if m.group("c") else Fraction(1)
        if m.group("e") is None:
            k = 0
        else:
            e = int(m.group("e"))
            k = e if m.group("h") else 2 * e
        d[k] = d.get(k, 0) + (c if sign == "+" else -c)
    return QLaurent(d)


# ----------------------------------------------------------------------------
# Truncated Laurent series in g_s
# ----------------------------------------------------------------------------


class GsSeries:
    """Laurent series sum_{n >= min_exp} c_n g_s^n, exact through g_s^order.

    ``coeffs[i]`` is the coefficient of g_s^(min_exp + i). Trailing entries
    beyond ``order`` are never stored.
    """

    __slots__ = ("min_exp", "coeffs", "order")

    def __init__(self, coeffs, min_exp: int = 0, order: int = 8):
        self.order = int(order)
        cs = [Fraction(c) for c in coeffs]
        cs = cs[: max(0, self.order - min_exp + 1)]
        # strip leading zeros so min_exp is the true valuation
        i = 0
        while i < len(cs) and cs[i] == 0:
            i += 1
        cs = cs[i:]
        min_exp += i
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs
        self.min_exp = min_exp if cs else 0

    @classmethod
    def zero(cls, order: int) -> "GsSeries":
        return cls([], 0, order)

    @classmethod
    def one(cls, order: int) -> "GsSeries":
        return cls([1], 0, order)

    @classmethod
    def const(cls, c, order: int) -> "GsSeries":
        return cls([c], 0, order)

    @classmethod
    def monomial(cls, exp: int, c, order: int) -> "GsSeries":
        return cls([c], exp, order)

    @classmethod
    def from_dict(cls, d: dict[int, Fraction], order: int) -> "GsSeries":
        d = {k: v for k, v in d.items() if v}
        if not d:
            return cls.zero(order)
        lo = min(d)
        hi = max(d)
        return cls([d.get(k, 0) for k in range(lo, hi + 1)], lo, order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def valuation(self) -> int | None:
        return self.min_exp if self.coeffs else None

    def __getitem__(self, n: int) -> Fraction:
        if n > self.order:
            raise CoefficientError(f"coefficient g_s^{n} lies beyond truncation order {self.order}")
        i = n - self.min_exp
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.min_exp + i, c

    def to_dict(self) -> dict[int, Fraction]:
        return dict(self.items())

    def truncate(self, order: int) -> "GsSeries":
        if order > self.order:
            raise CoefficientError(
                f"cannot raise truncation order from {self.order} to {order}"
            )
        return GsSeries(self.coeffs, self.min_exp, order)

    def _check(self, other) -> "GsSeries":
        if isinstance(other, (int, Fraction)):
            return GsSeries.const(other, self.order)
        if not isinstance(other, GsSeries):
            raise CoefficientError(f"cannot mix GsSeries with {type(other).__name__}")
        if other.order != self.order:
            raise CoefficientError(
                f"truncation mismatch: order {self.order} vs {other.order}"
            )
        return other

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GsSeries.const(other, self.order)
        if not isinstance(other, GsSeries):
            return NotImplemented
        return (
            self.order == other.order
            and self.min_exp == other.min_exp
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.order, self.min_exp, tuple(self.coeffs)))

    def agrees_with(self, other: "GsSeries", through: int | None = None) -> bool:
        """Equality of coefficients up to the smaller of the two orders."""
        top = min(self.order, other.order) if through is None else through
        lo = min(self.min_exp if self else 0, other.min_exp if other else 0)
        return all(self[n] == other[n] for n in range(lo, top + 1))

    def __add__(self, other):
        other = self._check(other)
        if not other.coeffs:
            return self
        if not self.coeffs:
            return other
        lo = min(self.min_exp, other.min_exp)
        hi = min(self.order, max(self.min_exp + len(self.coeffs), other.min_exp + len(other.coeffs)) - 1)
        out = [Fraction(0)] * max(0, hi - lo + 1)
        for i, c in enumerate(self.coeffs):
            j = self.min_exp + i - lo
            if j < len(out):
                out[j] += c
        for i, c in enumerate(other.coeffs):
            j = other.min_exp + i - lo
            if j < len(out):
                out[j] += c
        return GsSeries(out, lo, self.order)

    __radd__ = __add__

    def __neg__(self):
        return GsSeries([-c for c in self.coeffs], self.min_exp, self.order)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GsSeries([c * other for c in self.coeffs], self.min_exp, self.order)
        return self._mul(self._check(other))

    def _mul(self, other: "GsSeries") -> "GsSeries":
        if not self.coeffs or not other.coeffs:
            return GsSeries.zero(min(self.order, other.order))
        # a pole in one factor eats precision of the other
        order = min(self.order + min(other.min_exp, 0), other.order + min(self.min_exp, 0))
        lo = self.min_exp + other.min_exp
        n = order - lo + 1
        if n <= 0:
            return GsSeries.zero(order)
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * n
        for i, x in enumerate(a[:n]):
            if not x:
                continue
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
        return GsSeries(out, lo, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return self * other.reciprocal()

    def shift(self, k: int) -> "GsSeries":
        """Multiply by g_s^k, keeping the truncation order fixed."""
        return GsSeries(self.coeffs, self.min_exp + k, self.order)

    def reciprocal(self) -> "GsSeries":
        """1/s for s = g_s^v * u with u(0) != 0; the result is exact through order - 2v."""
        if not self.coeffs:
            raise ZeroDivisionError("reciprocal of zero series")
        v = self.min_exp
        unit = GsSeries(self.coeffs, 0, self.order - v)
        inv = series_inv(unit)
        return GsSeries(inv.coeffs, -v, inv.order - v)

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = GsSeries.one(self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __repr__(self):
        return f"GsSeries({render_series(self)})"

    def __str__(self):
        return render_series(self)


def series_mul(a: GsSeries, b: GsSeries) -> GsSeries:
    """Product of series known to different orders; the result order is what both support."""
    return a._mul(b)


def series_exp(s: GsSeries) -> GsSeries:
    """exp(s) for s with positive valuation."""
    if s.coeffs and s.min_exp < 1:
        raise CoefficientError(
            f"exp needs positive valuation; offending exponent g_s^{s.min_exp}"
        )
    M = s.order
    if M < 0:
        return GsSeries.zero(M)
    a = [s[n] for n in range(0, M + 1)]
    # e' = s' e  ->  n e_n = sum_k k a_k e_{n-k}
    e = [Fraction(0)] * (M + 1)
    e[0] = Fraction(1)
    for n in range(1, M + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            if a[k]:
                acc += k * a[k] * e[n - k]
        e[n] = acc / n
    return GsSeries(e, 0, M)


def series_log(s: GsSeries) -> GsSeries:
    """log(s) for s with constant term 1 and no principal part."""
    if not s.coeffs or s.min_exp != 0 or s.coeffs[0] != 1:
        bad = s.min_exp if s.coeffs and s.min_exp != 0 else 0
        raise CoefficientError(f"log needs constant term 1; offending exponent g_s^{bad}")
    M = s.order
    a = [s[n] for n in range(0, M + 1)]
    lg = [Fraction(0)] * (M + 1)
    # s * l' = s'  ->  n l_n = n a_n - sum_{k=1}^{n-1} k l_k a_{n-k}
    for n in range(1, M + 1):
        acc = n * a[n]
        for k in range(1, n):
            acc -= k * lg[k] * a[n - k]
        lg[n] = acc / n
    return GsSeries(lg, 0, M)


def series_inv(s: GsSeries) -> GsSeries:
    """1/s for s with min_exp == 0 and nonzero constant term."""
    if not s.coeffs or s.min_exp != 0:
        bad = s.min_exp if s.coeffs else 0
        raise CoefficientError(f"inv needs a unit at g_s^0; offending exponent g_s^{bad}")
    M = s.order
    a = [s[n] for n in range(0, M + 1)]
    inv = [Fraction(0)] * (M + 1)
    inv[0] = 1 / a[0]
    for n in range(1, M + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            if a[k]:
                acc += a[k] * inv[n - k]
        inv[n] = -acc * inv[0]
    return GsSeries(inv, 0, M)


def series_exp_log_inv(s: GsSeries, which: str) -> GsSeries:
    try:
        return {"exp": series_exp, "log": series_log, "inv": series_inv}[which](s)
    except KeyError:
        raise CoefficientError(f"unknown series function {which!r}") from None


@lru_cache(maxsize=None)
def _exp_half(k: int, order: int) -> GsSeries:
    # exp(k g_s / 2) = sum (k/2)^n g_s^n / n!
    h = Fraction(k, 2)
    return GsSeries([h ** n / factorial(n) for n in range(order + 1)], 0, order)


def exp_half_gs(k: int, order: int) -> GsSeries:
    """exp(k * g_s / 2) through ``order``."""
    return _exp_half(int(k), int(order))


def qpow_series(half_exp: int, order: int) -> GsSeries:
    """Image of q^(half_exp/2) under q^(1/2) = -exp(g_s/2)."""
    s = exp_half_gs(half_exp, order)
    return -s if half_exp % 2 else s


def substitute_q_to_gs(a: QLaurent, order: int) -> GsSeries:
    if order < 0:
        raise CoefficientError("order must be non-negative")
    out = GsSeries.zero(order)
    for k, c in a.coeffs.items():
        out = out + qpow_series(k, order) * c
    return out


_SERIES = re.compile(r"^\[(?P<body>.*)\]\s*\+O\(g_s\^(?P<top>-?\d+)\)$")


def render_series(s: GsSeries) -> str:
    """``[-1: 1/2, 0: 1] +O(g_s^9)``: exponent-coefficient pairs, exponents ascending."""
    body = ", ".join(f"{n}: {frac_str(c)}" for n, c in s.items())
    return f"[{body}] +O(g_s^{s.order + 1})"


def parse_series(text: str) -> GsSeries:
    m = _SERIES.match(text.strip())
    if not m:
        raise CoefficientError(f"cannot parse series {text!r}")
    order = int(m.group("top")) - 1
    d = {}
    body = m.group("body").strip()
    if body:
        for item in body.split(","):
            k, v = item.split(":")
            d[int(k)] = parse_frac(v)
    return GsSeries.from_dict(d, order)


# ----------------------------------------------------------------------------
# Rational functions of q^(1/2)
# ----------------------------------------------------------------------------


class QRational:
    """num/den with ``QLaurent`` parts, kept in lowest terms.

    The denominator is stored as a monic polynomial in q^(1/2) with nonzero
    constant term; any power of q^(1/2) lives in the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: QLaurent, den: QLaurent | None = None):
        den = QLaurent.const(1) if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = QLaurent(), QLaurent.const(1)
            return
        a, b = num.min_exp(), den.min_exp()
        n = _to_poly(num.scale_q(-a))
        d = _to_poly(den.scale_q(-b))
        g = _poly_gcd(n, d)
        if len(g) > 1:
            n, _ = _poly_divmod(n, g)
            d, _ = _poly_divmod(d, g)
        d = _strip(d)
        lead = d[-1]
        self.num = QLaurent({k: c / lead for k, c in enumerate(n)}).scale_q(a - b)
        self.den = QLaurent({k: c / lead for k, c in enumerate(d)})

    @classmethod
    def from_laurent(cls, a: QLaurent) -> "QRational":
        return cls(a)

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        if isinstance(other, QLaurent):
            other = QRational(other)
        if self.den == other.den:
            return QRational(self.num + other.num, self.den)
        return QRational(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return QRational(-self.num, self.den)

    def __sub__(self, other):
        if isinstance(other, QLaurent):
            other = QRational(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QRational(self.num * other, self.den)
        if isinstance(other, QLaurent):
            return QRational(self.num * other, self.den)
        return QRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, QLaurent):
            other = QRational(other)
        if not isinstance(other, QRational):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def as_laurent(self) -> QLaurent | None:
        """The exact quotient if it is a Laurent polynomial, otherwise None."""
        quo, rem = self.num.divmod(self.den)
        return quo if rem.is_zero() else None

    def to_series(self, order: int) -> GsSeries:
        """Expansion exact through ``order``; precision lost to the pole is pre-paid."""
        den0 = substitute_q_to_gs(self.den, order)
        # the valuation of the denominator is bounded by its degree in g_s
        v = den0.min_exp if den0 else 0
        extra = 2 * max(v, 0)
        while True:
            num = substitute_q_to_gs(self.num, order + extra)
            den = substitute_q_to_gs(self.den, order + extra)
            if den.is_zero():
                extra += 2
                continue
            rec = den.reciprocal()
            m = min(num.order, rec.order)
            out = num.truncate(m) * rec.truncate(m)
            if out.order >= order:
                return out.truncate(order)
            extra += order - out.order

    def __repr__(self):
        return f"QRational(({self.num}) / ({self.den}))"
