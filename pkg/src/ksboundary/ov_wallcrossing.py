"""Integer BPS data, the multi-cover expansion, S-operators and annihilators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd

from . import intlinalg as la
from .boundary_states import BoundaryState, act, check_sigma_trivial_on_kernel
from .charge_lattice import Charge, Frame, GeometrySpec, as_charge, vscale
from .coefficients import QLaurent, QRational
from .quantum_torus import TorusElement, qshift, torus_exp, torus_mul


class IntegralityError(ValueError):
    pass


class BPSError(ValueError):
    pass


@dataclass(frozen=True)
class BPSData:
    """N_{gamma, j} as a frozen mapping {(gamma, j): N}."""

    entries: tuple[tuple[tuple[Charge, int], int], ...]

    def __init__(self, entries=None):
        d: dict[tuple[Charge, int], int] = {}
        for (gamma, j), n in dict(entries or {}).items():
            if Fraction(n).denominator != 1:
                raise IntegralityError(f"N_{{{tuple(gamma)},{j}}} = {n} is not an integer")
            key = (as_charge(gamma), int(j))
            d[key] = d.get(key, 0) + int(n)
        object.__setattr__(self, "entries", tuple(sorted((k, v) for k, v in d.items() if v)))

    def as_dict(self) -> dict[tuple[Charge, int], int]:
        return dict(self.entries)

    def support(self) -> list[Charge]:
        return sorted({g for (g, _), _ in self.entries})

    def __len__(self):
        return len(self.entries)


def content(gamma) -> int:
    c = 0
    for x in gamma:
        c = gcd(c, x)
    return c


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _kernel(n: int) -> QRational:
    """1 / (n (q^(n/2) - q^(-n/2)))."""
    return QRational(QLaurent.const(1), QLaurent({n: n, -n: -n}))


def ov_coefficient(N: BPSData, gamma) -> QRational:
    """a(gamma) = sum_{n | gamma} sum_j N_{gamma/n, j} q^(n j) / (n (q^(n/2) - q^(-n/2)))."""
    gamma = as_charge(gamma)
    table = N.as_dict()
    by_n: dict[int, QLaurent] = {}
    c = content(gamma)
    for n in divisors(c) if c else []:
        root = tuple(x // n for x in gamma)
        for (g, j), v in table.items():
            if g == root:
                by_n[n] = by_n.get(n, QLaurent()) + QLaurent.qpow(2 * n * j, v)
    # common denominator prod_n n (q^(n/2) - q^(-n/2)) keeps the fraction small
    out = QRational(QLaurent())
    for n, num in sorted(by_n.items()):
        out = out + _kernel(n) * num
    return out


def ov_coefficients(N: BPSData, degree: int, spec: GeometrySpec | None = None) -> dict[Charge, QRational]:
    """All nonzero a(gamma) for multiples of the support up to the degree bound."""
    out: dict[Charge, QRational] = {}
    for g in N.support():
        for n in range(1, degree + 1):
            gamma = vscale(n, g)
            if spec is not None and spec.degree(spec.Q(gamma)) > degree:
                break
            if spec is None and n > degree:
                break
            if gamma not in out:
                a = ov_coefficient(N, gamma)
                if not a.is_zero():
                    out[gamma] = a
    return out


def bps_extract(a: dict, degree: int | None = None) -> BPSData:
    """Invert the multi-cover expansion layer by layer (smallest content first)."""
    values = {as_charge(g): (v if isinstance(v, QRational) else QRational(v)) for g, v in a.items()}
    found: dict[tuple[Charge, int], int] = {}
    for gamma in sorted(values, key=lambda g: (content(g), g)):
        rem = values[gamma]
        c = content(gamma)
        for n in divisors(c)[1:] if c else []:
            root = tuple(x // n for x in gamma)
            num = QLaurent()
            for (g, j), v in found.items():
                if g == root:
                    num = num + QLaurent.qpow(2 * n * j, v)
            if num:
                rem = rem - _kernel(n) * num
        if rem.is_zero():
            continue
        poly = (rem * QLaurent({1: 1, -1: -1})).as_laurent()
        if poly is None:
            raise IntegralityError(f"a({gamma}) leaves a remainder that is not of the form P(q)/(q^1/2 - q^-1/2)")
        for k, v in poly.coeffs.items():
            if k % 2 or v.denominator != 1:
                raise IntegralityError(
                    f"a({gamma}) violates integrality: coefficient {v} at q^({k}/2)"
                )
            found[(gamma, k // 2)] = int(v)
    return BPSData(found)


# -- S-operators --------------------------------------------------------------

def _on_power(spec, gamma0, gamma, poly: dict[int, object]) -> TorusElement:
    """e_gamma0 * sum_k c_k e_(k gamma) as a torus element."""
    e0 = TorusElement.generator(spec, gamma0)
    h = TorusElement(spec, {(vscale(k, gamma), spec.Q(vscale(k, gamma))): c for k, c in poly.items()})
    return torus_mul(e0, h)


def _poly_mul(a: dict[int, object], b: dict[int, object], top: int) -> dict[int, object]:
    out: dict[int, object] = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j <= top:
                out[i + j] = out[i + j] + x * y if i + j in out else x * y
    return {k: v for k, v in out.items() if v}


def _geometric_inverse(c: QLaurent, top: int) -> dict[int, QLaurent]:
    """(1 - c x)^(-1) through x^top."""
    out = {0: QLaurent.const(1)}
    p = QLaurent.const(1)
    for k in range(1, top + 1):
        p = p * c
        out[k] = p
    return out


def s_ratio(j: int, m: int, top: int | None = None) -> tuple[dict[int, QLaurent], dict[int, QLaurent]]:
    """S(q^m x) / S(x) for S = S_{gamma, j} as (numerator, denominator) polynomials in x."""
    one = {0: QLaurent.const(1)}
    num, den = dict(one), dict(one)
    big = 10 ** 9 if top is None else top
    if m > 0:
        for k in range(m):
            den = _poly_mul(den, {0: QLaurent.const(1), 1: -QLaurent.qpow(2 * j + 1 + 2 * k)}, big)
    elif m < 0:
        for k in range(1, -m + 1):
            num = _poly_mul(num, {0: QLaurent.const(1), 1: -QLaurent.qpow(2 * j + 1 - 2 * k)}, big)
    return num, den


def s_conjugate(spec: GeometrySpec, gamma, j: int, gamma0, bound: int) -> TorusElement:
    """S_{gamma,j} e_gamma0 S_{gamma,j}^(-1), in powers of e_gamma up to ``bound``."""
    gamma = as_charge(gamma, spec.rank)
    gamma0 = as_charge(gamma0, spec.rank)
    m = spec.pairing(gamma, gamma0)
    num, den = s_ratio(j, m, bound)
    if m > 0:
        series = {0: QLaurent.const(1)}
        for k in range(m):
            series = _poly_mul(series, _geometric_inverse(QLaurent.qpow(2 * j + 1 + 2 * k), bound), bound)
    else:
        series = num
    return _on_power(spec, gamma0, gamma, {k: v for k, v in series.items() if k <= bound})


def _x_exp(coeffs: dict[int, QRational], top: int) -> dict[int, QRational]:
    """exp(sum_n c_n x^n) through x^top for a single commuting variable x."""
    out = {0: QRational(QLaurent.const(1))}
    power = dict(out)
    for m in range(1, top + 1):
        power = _poly_mul(power, coeffs, top)
        if not power:
            break
        for k, v in power.items():
            t = v * Fraction(1, factorial(m))
            out[k] = out[k] + t if k in out else t
    return {k: v for k, v in out.items() if not v.is_zero()}


def s_log_coefficients(j: int, top: int, scale: int = 1) -> dict[int, QRational]:
    """scale * q^(n(j+1/2)) / (n (q^n - 1)) for n = 1..top."""
    return {
        n: QRational(QLaurent.qpow(n * (2 * j + 1), Fraction(scale, n)), QLaurent({2 * n: 1, 0: -1}))
        for n in range(1, top + 1)
    }


def s_conjugate_bruteforce(spec: GeometrySpec, gamma, j: int, gamma0, bound: int) -> TorusElement:
    """Conjugate e_gamma0 by the truncated exponentials S, S^(-1) over Q(q^(1/2))."""
    gamma = as_charge(gamma, spec.rank)
    gamma0 = as_charge(gamma0, spec.rank)
    s = _x_exp(s_log_coefficients(j, bound), bound)
    sinv = _x_exp(s_log_coefficients(j, bound, -1), bound)

    def elem(poly):
        return TorusElement(spec, {(vscale(k, gamma), spec.Q(vscale(k, gamma))): c for k, c in poly.items()})

    prod = torus_mul(torus_mul(elem(s), TorusElement.generator(spec, gamma0)), elem(sinv))
    terms = {}
    for (g, b), c in prod.terms.items():
        k = _power_of(g, gamma0, gamma)
        if k is None or k > bound:
            continue
        c = c if isinstance(c, QLaurent) else c.as_laurent()
        if c is None:
            raise BPSError(f"conjugation left a non-polynomial coefficient at {g}")
        terms[(g, b)] = c
    return TorusElement(spec, terms)


def _power_of(g, gamma0, gamma) -> int | None:
    """k >= 0 with g = gamma0 + k gamma, or None."""
    d = tuple(x - y for x, y in zip(g, gamma0))
    if not any(d):
        return 0
    i = next((i for i, x in enumerate(gamma) if x), None)
    if i is None or d[i] % gamma[i]:
        return None
    k = d[i] // gamma[i]
    return k if k > 0 and vscale(k, gamma) == d else None


# -- states -------------------------------------------------------------------

def check_frame_support(spec: GeometrySpec, N: BPSData, frame: Frame) -> None:
    if not spec.is_transverse(frame):
        raise BPSError(f"frame {list(frame.basis)} is not transverse to K = {list(spec.kernel)}")
    cols = la.from_columns(list(frame.basis), spec.rank)
    for g in N.support():
        if len(g) != spec.rank or la.solve_integer(cols, g) is None:
            raise BPSError(f"BPS support class {g} does not lie in the frame")


def build_state(
    spec: GeometrySpec,
    N: BPSData,
    frame: Frame,
    degree: int = 6,
    order: int = 8,
    factor_order: list | None = None,
) -> BoundaryState:
    """Psi = prod_gamma exp(a(gamma) e_gamma) Omega_0 through the given truncations.

    The exponentials are taken exactly over Q(q^(1/2)); each coefficient is
    expanded in g_s once, at the end.
    """
    check_frame_support(spec, N, frame)
    check_sigma_trivial_on_kernel(spec)
    coeffs = ov_coefficients(N, degree, spec)
    gammas = list(coeffs)
    if factor_order is not None:
        # listed classes first, then every remaining factor in the default order
        listed = [g for g in (as_charge(x) for x in factor_order) if g in coeffs]
        gammas = listed + [g for g in gammas if g not in listed]
    word = TorusElement.one(spec, degree)
    for g in gammas:
        if g in coeffs:
            word = torus_mul(word, torus_exp(TorusElement.generator(spec, g, coeffs[g], degree), degree))
    return _apply_to_vacuum(word, degree, order)


def build_state_via_s(spec: GeometrySpec, N: BPSData, frame: Frame, degree: int = 6, order: int = 8) -> BoundaryState:
    """Psi = prod S_{gamma,j}^{N} Omega_0 with S given by its logarithm."""
    check_frame_support(spec, N, frame)
    check_sigma_trivial_on_kernel(spec)
    word = TorusElement.one(spec, degree)
    for (g, j), n in N.entries:
        terms = {}
        for k, c in s_log_coefficients(j, degree, n).items():
            gk = vscale(k, g)
            terms[(gk, spec.Q(gk))] = c
        x = TorusElement(spec, terms, degree)
        if not x.is_zero():
            word = torus_mul(word, torus_exp(x, degree))
    return _apply_to_vacuum(word, degree, order)


def _apply_to_vacuum(word: TorusElement, degree: int, order: int) -> BoundaryState:
    # a coefficient with a pole of order p costs p orders of the vacuum scalar
    poles = 0
    for c in word.terms.values():
        if isinstance(c, QRational):
            poles = max(poles, c.den.max_exp())
    psi = act(word, BoundaryState.vacuum(word.spec, degree, order + poles))
    comps = {}
    for b, s in psi.components.items():
        if s.order < order:
            raise BPSError(f"component {b} only known through g_s^{s.order}")
        comps[b] = s.truncate(order)
    return BoundaryState(word.spec, comps, degree, order)


# -- annihilators -------------------------------------------------------------

@dataclass
class AnnihilatorOperator:
    kappa: Charge
    op: TorusElement
    verified: bool = False
    degree: int | None = None
    order: int | None = None

    def is_integral(self) -> bool:
        return all(isinstance(c, QLaurent) and c.is_integral() for c in self.op.terms.values())


def _multi_poly(spec, factors: list[tuple[Charge, dict[int, QLaurent]]]) -> TorusElement:
    out = TorusElement.one(spec)
    for gamma, poly in factors:
        h = TorusElement(spec, {(vscale(k, gamma), spec.Q(vscale(k, gamma))): c for k, c in poly.items()})
        out = torus_mul(out, h)
    return out


def annihilator_for(spec: GeometrySpec, N: BPSData, kappa) -> TorusElement:
    """e_kappa P - Q~ where S e_kappa S^(-1) = e_kappa P / Q and Q~ e_kappa = e_kappa Q."""
    kappa = as_charge(kappa, spec.rank)
    nums, dens = [], []
    for (g, j), n in N.entries:
        m = spec.pairing(g, kappa)
        num, den = s_ratio(j, m)
        if n < 0:
            num, den = den, num
        for _ in range(abs(n)):
            nums.append((g, num))
            dens.append((g, den))
    P = _multi_poly(spec, nums)
    Q = _multi_poly(spec, dens)
    Qt = TorusElement(
        spec, {(g, b): qshift(c, 2 * spec.pairing(kappa, g)) for (g, b), c in Q.terms.items()}
    )
    return torus_mul(TorusElement.generator(spec, kappa), P) - Qt


def annihilators(
    spec: GeometrySpec,
    N: BPSData,
    frame: Frame,
    degree: int = 6,
    order: int = 8,
    psi: BoundaryState | None = None,
    verify: bool = True,
) -> list[AnnihilatorOperator]:
    out = []
    if verify and psi is None:
        psi = build_state(spec, N, frame, degree, order)
    for kappa in spec.kernel:
        op = annihilator_for(spec, N, kappa)
        ann = AnnihilatorOperator(kappa, op, False, degree, order)
        if not ann.is_integral():
            raise IntegralityError(f"annihilator for {kappa} has non-integral coefficients")
        if verify:
            res = act(op, psi)
            if not res.is_zero():
                raise BPSError(f"internal inconsistency: annihilator for {kappa} does not kill Psi: {res!r}")
            ann.verified = True
        out.append(ann)
    return out


def annihilates(op: TorusElement, psi: BoundaryState) -> bool:
    return act(op, psi).is_zero()


def classical_limit(op: TorusElement) -> dict[Charge, Fraction]:
    """q^(1/2) -> 1 and e_gamma -> commuting x_gamma: a map gamma -> coefficient."""
    out: dict[Charge, Fraction] = {}
    for (g, _), c in op.terms.items():
        v = c.at_q_half(1)
        if v:
            out[g] = out.get(g, Fraction(0)) + v
    return {g: v for g, v in out.items() if v}
