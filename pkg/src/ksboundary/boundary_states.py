"""Coherent boundary states and the corrected torus-algebra action on them.

A component at flavor charge beta is stored as a series scalar times the
coherent vector of the base pair (tau(beta) on both legs, A above B, offset 0).
A pair sitting at torsor position base + n carries the extra factor
exp(-n g_s / 2), so folding an offset into the scalar is the map
(n, s) -> (0, s * exp(-n g_s / 2)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .charge_lattice import Charge, Frame, GeometrySpec, as_charge, vadd
from .coefficients import (
    GsSeries,
    QLaurent,
    QRational,
    exp_half_gs,
    parse_series,
    render_series,
    series_mul,
    substitute_q_to_gs,
)
from .collar_curves import frame_lift
from .quantum_torus import TorusElement, check_key


class StateError(ValueError):
    pass


def _series(c, order: int) -> GsSeries:
    if isinstance(c, GsSeries):
        return c.truncate(order) if c.order > order else c
    if isinstance(c, QLaurent):
        return substitute_q_to_gs(c, order)
    if isinstance(c, QRational):
        return c.to_series(order)
    return GsSeries.const(Fraction(c), order)


def smul(a: GsSeries, b: GsSeries) -> GsSeries:
    return series_mul(a, b)


def times(s: GsSeries, c) -> GsSeries:
    """s * c where c is exact (q-Laurent, rational function, number) or a series.

    Exact factors are expanded far enough that a pole in s costs nothing.
    """
    if isinstance(c, GsSeries):
        return series_mul(s, c)
    if isinstance(c, (int, Fraction)):
        return s * Fraction(c)
    need = s.order - min(s.min_exp, 0) if s else s.order
    return series_mul(s, _series(c, need))


def times_exp_half(s: GsSeries, k: int) -> GsSeries:
    """s * exp(k g_s / 2)."""
    need = s.order - min(s.min_exp, 0) if s else s.order
    return series_mul(s, exp_half_gs(k, need))


def sadd(a: GsSeries, b: GsSeries) -> GsSeries:
    m = min(a.order, b.order)
    return a.truncate(m) + b.truncate(m)


@dataclass(frozen=True)
class CoherentState:
    beta: Charge
    offset: int
    scalar: GsSeries

    def normalized(self) -> "CoherentState":
        if self.offset == 0:
            return self
        return CoherentState(self.beta, 0, times_exp_half(self.scalar, -self.offset))


class BoundaryState:
    """Map beta -> scalar (offset 0), truncated at grading degree D and g_s order M."""

    __slots__ = ("spec", "components", "degree", "order")

    def __init__(self, spec: GeometrySpec, components=None, degree: int = 6, order: int = 8):
        self.spec = spec
        self.degree = degree
        self.order = order
        d: dict[Charge, GsSeries] = {}
        for beta, s in (components or {}).items():
            if isinstance(s, CoherentState):
                beta, s = s.beta, s.normalized().scalar
            beta = as_charge(beta, spec.flavor_rank)
            if not spec.is_flavor(beta):
                raise StateError(f"{beta} is not a flavor charge")
            if spec.degree(beta) > degree:
                continue
            # a component may be known to less than ``order`` after dividing by poles
            s = _series(s, order)
            d[beta] = sadd(d[beta], s) if beta in d else s
        self.components = {b: s for b, s in d.items() if s}

    @classmethod
    def vacuum(cls, spec, degree=6, order=8) -> "BoundaryState":
        return cls(spec, {(0,) * spec.flavor_rank: GsSeries.one(order)}, degree, order)

    def coherent(self, beta) -> CoherentState:
        beta = as_charge(beta, self.spec.flavor_rank)
        return CoherentState(beta, 0, self.components.get(beta, GsSeries.zero(self.order)))

    def _like(self, comps) -> "BoundaryState":
        return BoundaryState(self.spec, comps, self.degree, self.order)

    def __add__(self, other: "BoundaryState") -> "BoundaryState":
        d = dict(self.components)
        for b, s in other.components.items():
            d[b] = sadd(d[b], s) if b in d else s
        return BoundaryState(self.spec, d, min(self.degree, other.degree), min(self.order, other.order))

    def __neg__(self):
        return self._like({b: -s for b, s in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BoundaryState":
        return self._like({b: times(s, c) for b, s in self.components.items()})

    def __eq__(self, other):
        if not isinstance(other, BoundaryState):
            return NotImplemented
        return (
            self.order == other.order
            and self.degree == other.degree
            and self.components == other.components
        )

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.components

    def precision(self) -> int:
        """Order through which every component is known."""
        return min((s.order for s in self.components.values()), default=self.order)

    def sorted_betas(self):
        return sorted(self.components, key=lambda b: (self.spec.degree(b), b))

    def __repr__(self):
        return "BoundaryState(\n" + render_state(self) + "\n)"


# -- the action ---------------------------------------------------------------

def adjoin_exponent(spec: GeometrySpec, beta0, gamma) -> int:
    """Torsor position, relative to the base pair of beta0 + Q(gamma), of the base
    pair of beta0 with gamma-strands adjoined below on both legs."""
    t0 = spec.tau(beta0)
    t1 = spec.tau(vadd(tuple(beta0), spec.Q(gamma)))
    B = spec.linking_form
    return B(t0, t0) + 2 * B(t0, gamma) + B(gamma, gamma) - B(t1, t1)


def act_generator(spec: GeometrySpec, key, psi: BoundaryState) -> BoundaryState:
    """Corrected action of e_(gamma, beta): adjoin gamma below, renormalize, sign sigma(gamma)."""
    gamma, beta = check_key(spec, key)
    sign = spec.sigma_sign(gamma)
    out = {}
    for b0, s in psi.components.items():
        b1 = vadd(b0, beta)
        if spec.degree(b1) > psi.degree:
            continue
        d = adjoin_exponent(spec, b0, gamma)
        out[b1] = times_exp_half(s, -d) * sign
    return psi._like(out)


def act(x: TorusElement, psi: BoundaryState) -> BoundaryState:
    """Linear extension of act_generator; q-coefficients are substituted to g_s."""
    out = psi._like({})
    for key, c in x.sorted_items():
        term = act_generator(psi.spec, key, psi)
        if term.is_zero():
            continue
        out = out + term.scale(c)
    return out


def shift(k: int, psi: BoundaryState) -> BoundaryState:
    """s_k: every pair moves k steps along its torsor."""
    return psi._like({b: times_exp_half(s, -k) for b, s in psi.components.items()})


def refinement_twist(spec: GeometrySpec, eps, psi: BoundaryState) -> BoundaryState:
    """The class eps in H^1(Sigma, Z_2) acting by (-1)^(eps . tau(beta)) on each component."""
    out = {}
    for b, s in psi.components.items():
        e = sum(x * y for x, y in zip(eps, spec.tau(b))) % 2
        out[b] = -s if e else s
    return psi._like(out)


# -- quotient presentation ----------------------------------------------------

def check_sigma_trivial_on_kernel(spec: GeometrySpec) -> None:
    for k in spec.kernel:
        if spec.sigma_sign(k) != 1:
            raise StateError(
                f"refinement is nontrivial on K (sigma({k}) = -1); e_kappa - 1 would not annihilate Omega_0"
            )


def module_normal_form(word: TorusElement, degree: int = 6, order: int = 8) -> BoundaryState:
    """word . Omega_0, i.e. the class of the word modulo the right ideal (e_kappa - 1)."""
    check_sigma_trivial_on_kernel(word.spec)
    return act(word, BoundaryState.vacuum(word.spec, degree, order))


def inverse_presentation(psi: BoundaryState, coherent: list[CoherentState] | None = None) -> TorusElement:
    """Coset representative sum_beta s_beta sigma(f) exp(-n g_s/2) e_(f, beta), f = tau(beta)."""
    spec = psi.spec
    items = coherent if coherent is not None else [psi.coherent(b) for b in psi.components]
    terms = {}
    for cs in items:
        f = spec.tau(cs.beta)
        c = times_exp_half(cs.scalar, -cs.offset) * spec.sigma_sign(f)
        key = (f, cs.beta)
        terms[key] = terms[key] + c if key in terms else c
    return TorusElement(spec, terms, psi.degree)


# -- wavefunction -------------------------------------------------------------

def base_link_F(spec: GeometrySpec, beta, frame: Frame) -> int | None:
    """Link_F of the base pair of beta, or None when beta is not in Q(F)."""
    f = frame_lift(spec, frame, beta)
    if f is None:
        return None
    # Link_f of (tau above tau) is <f, tau - f> = <f, tau>
    return spec.pairing(f, spec.tau(beta))


def wavefunction(psi: BoundaryState, frame: Frame) -> dict[Charge, GsSeries]:
    out = {}
    for b in psi.sorted_betas():
        s = psi.components[b]
        n = base_link_F(psi.spec, b, frame)
        out[b] = s if n is None else times_exp_half(s, -n)
    return out


# -- text form ----------------------------------------------------------------

def _beta_str(b) -> str:
    return "(" + ",".join(str(x) for x in b) + ")"


def render_state(psi: BoundaryState) -> str:
    lines = [f"# degree {psi.degree} order {psi.order}"]
    for b in psi.sorted_betas():
        lines.append(f"{_beta_str(b)} | 0 | {render_series(psi.components[b])}")
    return "\n".join(lines)


def parse_state(spec: GeometrySpec, text: str) -> BoundaryState:
    lines = [l for l in text.strip().splitlines() if l.strip()]
    head = lines[0].split()
    if head[:2] != ["#", "degree"]:
        raise StateError("state text must start with '# degree D order M'")
    degree, order = int(head[2]), int(head[4])
    comps = []
    for n, line in enumerate(lines[1:], 2):
        try:
            b, off, ser = (p.strip() for p in line.split("|"))
            beta = tuple(int(x) for x in b.strip("()").split(","))
            comps.append(CoherentState(beta, int(off), parse_series(ser)))
        except ValueError as exc:
            raise StateError(f"line {n}: {exc}") from None
    psi = BoundaryState(spec, {}, degree, order)
    for cs in comps:
        psi = psi + BoundaryState(spec, {cs.beta: cs}, degree, order)
    return psi


def render_wavefunction(w: dict[Charge, GsSeries]) -> str:
    return "\n".join(f"{_beta_str(b)} | {render_series(s)}" for b, s in w.items())
