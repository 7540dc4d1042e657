"""Curve pairs in the cylindrical end, linking numbers and the abelian skein.

A configuration is a stack of strands, each with a height, a class in
H_1(Sigma, Z) and a leg (A for the first curve system, B for the second),
together with an integer twist offset. Isotopies are modelled by moves; a move
that pushes one leg through the other records a signed crossing count which is
folded into the offset, so the pair (layout, offset) names a fixed point of the
Z-torsor throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from . import intlinalg as la
from .charge_lattice import Charge, Frame, GeometrySpec, as_charge, vadd, vsub
from .coefficients import GsSeries, exp_half_gs

LEGS = ("A", "B")


class CollarError(ValueError):
    pass


@dataclass(frozen=True)
class Strand:
    height: Fraction
    cls: Charge
    leg: str

    def __post_init__(self):
        object.__setattr__(self, "height", Fraction(self.height))
        object.__setattr__(self, "cls", as_charge(self.cls))
        if self.leg not in LEGS:
            raise CollarError(f"leg must be A or B, got {self.leg!r}")


@dataclass(frozen=True)
class CollarConfig:
    """Strands listed top to bottom (strictly decreasing height)."""

    strands: tuple[Strand, ...]
    twist_offset: int = 0

    def __post_init__(self):
        st = tuple(s if isinstance(s, Strand) else Strand(*s) for s in self.strands)
        st = tuple(sorted(st, key=lambda s: -s.height))
        hs = [s.height for s in st]
        if len(set(hs)) != len(hs):
            raise CollarError("strand heights must be distinct")
        if st and len({len(s.cls) for s in st}) != 1:
            raise CollarError("strand classes have different lengths")
        object.__setattr__(self, "strands", st)
        object.__setattr__(self, "twist_offset", int(self.twist_offset))

    def leg_sum(self, leg: str, rank: int | None = None) -> Charge:
        n = rank if rank is not None else (len(self.strands[0].cls) if self.strands else 0)
        out = (0,) * n
        for s in self.strands:
            if s.leg == leg:
                out = vadd(out, s.cls)
        return out

    def lowest(self) -> Fraction:
        return min((s.height for s in self.strands), default=Fraction(0))

    def with_offset(self, offset: int) -> "CollarConfig":
        return CollarConfig(self.strands, offset)


def base_pair(cls_a: Sequence[int], cls_b: Sequence[int] | None = None, offset: int = 0) -> CollarConfig:
    """Reference layout: one A strand at height -1 above one B strand at -2."""
    cls_b = cls_a if cls_b is None else cls_b
    return CollarConfig((Strand(-1, cls_a, "A"), Strand(-2, cls_b, "B")), offset)


def check_config(spec: GeometrySpec, c: CollarConfig) -> None:
    for s in c.strands:
        if len(s.cls) != spec.rank:
            raise CollarError(f"strand class {s.cls} has wrong rank")
    if spec.Q(c.leg_sum("A", spec.rank)) != spec.Q(c.leg_sum("B", spec.rank)):
        raise CollarError("the two legs do not lift the same flavor class (sums differ outside K)")


def adjoin_below(c: CollarConfig, cls_a, cls_b, gap: int = 1) -> CollarConfig:
    """Add an A strand and then a B strand below every existing strand."""
    h = c.lowest()
    return CollarConfig(c.strands + (Strand(h - gap, cls_a, "A"), Strand(h - 2 * gap, cls_b, "B")), c.twist_offset)


# -- moves --------------------------------------------------------------------

@dataclass(frozen=True)
class Exchange:
    """Swap the strands at stack positions i and i+1 (heights stay in place)."""

    index: int


@dataclass(frozen=True)
class KernelSlide:
    index: int
    kappa: Charge = field(default=())


@dataclass(frozen=True)
class Twist:
    k: int


Move = Union[Exchange, KernelSlide, Twist]


def apply_move(spec: GeometrySpec, c: CollarConfig, m: Move) -> tuple[CollarConfig, int]:
    st = list(c.strands)
    if isinstance(m, Twist):
        return CollarConfig(st, c.twist_offset + m.k), m.k
    if isinstance(m, Exchange):
        i = m.index
        if not 0 <= i < len(st) - 1:
            raise CollarError(f"exchange index {i} out of range")
        up, lo = st[i], st[i + 1]
        count = spec.pairing(up.cls, lo.cls) if up.leg != lo.leg else 0
        st[i] = Strand(up.height, lo.cls, lo.leg)
        st[i + 1] = Strand(lo.height, up.cls, up.leg)
        return CollarConfig(st, c.twist_offset + count), count
    if isinstance(m, KernelSlide):
        i = m.index
        if not 0 <= i < len(st):
            raise CollarError(f"slide index {i} out of range")
        kappa = as_charge(m.kappa, spec.rank)
        if not spec.in_kernel(kappa):
            raise CollarError(f"{kappa} is not in K")
        s = st[i]
        count = sum(spec.pairing(kappa, v.cls) for v in st[:i] if v.leg != s.leg)
        st[i] = Strand(s.height, vadd(s.cls, kappa), s.leg)
        return CollarConfig(st, c.twist_offset + count), count
    raise CollarError(f"unknown move {m!r}")


def apply_moves(spec, c: CollarConfig, moves) -> tuple[CollarConfig, int]:
    total = 0
    for m in moves:
        c, n = apply_move(spec, c, m)
        total += n
    return c, total


def normal_form_path(spec: GeometrySpec, c: CollarConfig, f: Charge) -> list[Move]:
    """Moves taking c to a layout with every A strand above every B strand and leg sums f."""
    moves: list[Move] = []
    legs = [s.leg for s in c.strands]
    changed = True
    while changed:
        changed = False
        for i in range(len(legs) - 1):
            if legs[i] == "B" and legs[i + 1] == "A":
                moves.append(Exchange(i))
                legs[i], legs[i + 1] = "A", "B"
                changed = True
    a_idx = [i for i, l in enumerate(legs) if l == "A"]
    b_idx = [i for i, l in enumerate(legs) if l == "B"]
    ka = vsub(f, c.leg_sum("A", spec.rank))
    kb = vsub(f, c.leg_sum("B", spec.rank))
    if any(kb):
        moves.append(KernelSlide(b_idx[-1], kb))
    if any(ka):
        moves.append(KernelSlide(a_idx[0], ka))
    return moves


def _check_lift(spec: GeometrySpec, c: CollarConfig, f) -> Charge:
    f = as_charge(f, spec.rank)
    check_config(spec, c)
    if spec.Q(f) != spec.Q(c.leg_sum("A", spec.rank)):
        raise CollarError(f"f = {f} does not lift the class of the pair")
    if not any(s.leg == "A" for s in c.strands) or not any(s.leg == "B" for s in c.strands):
        raise CollarError("both legs need at least one strand")
    return f


def link_f(spec: GeometrySpec, c: CollarConfig, f) -> int:
    """Link_f by walking the normal-form path and reading off the offset."""
    f = _check_lift(spec, c, f)
    end, _ = apply_moves(spec, c, normal_form_path(spec, c, f))
    return end.twist_offset


def link_f_closed(spec: GeometrySpec, c: CollarConfig, f) -> int:
    """Closed form offset + sum_{A/B pairs} B(upper, lower) - B(f, f)."""
    f = _check_lift(spec, c, f)
    st = c.strands
    phi = 0
    for i, u in enumerate(st):
        for v in st[i + 1 :]:
            if u.leg != v.leg:
                phi += spec.linking_form(u.cls, v.cls)
    return c.twist_offset + phi - spec.linking_form(f, f)


def frame_lift(spec: GeometrySpec, frame: Frame, beta) -> Charge | None:
    """Some f in F with Q(f) = beta, or None."""
    cols = [spec.Q(b) for b in frame.basis]
    n = la.solve_integer(la.from_columns(cols, spec.flavor_rank), tuple(beta))
    if n is None:
        return None
    out = (0,) * spec.rank
    for k, b in zip(n, frame.basis):
        out = vadd(out, tuple(k * x for x in b))
    return out


def link_F(spec: GeometrySpec, c: CollarConfig, frame: Frame) -> Fraction:
    check_config(spec, c)
    f = frame_lift(spec, frame, spec.Q(c.leg_sum("A", spec.rank)))
    if f is None:
        return Fraction(0)
    return Fraction(link_f(spec, c, f))


def shift(c: CollarConfig, k: int) -> CollarConfig:
    """The torsor action s_k."""
    return c.with_offset(c.twist_offset + k)


# -- abelian skein ------------------------------------------------------------

@dataclass(frozen=True)
class FramedLinkDiagram:
    """A framed knot of class ``cls`` with extra +1 twists and signed crossing events."""

    cls: Charge
    writhe_twists: int = 0
    crossing_events: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cls", as_charge(self.cls))
        ev = tuple(int(e) for e in self.crossing_events)
        if any(e not in (1, -1) for e in ev):
            raise CollarError("crossing events must be +1 or -1")
        object.__setattr__(self, "crossing_events", ev)


def skein_reduce(spec: GeometrySpec, d: FramedLinkDiagram, frame: Frame, order: int) -> GsSeries:
    """Z = exp(-g_s/2 * (Link_F(K, K') + twists)) * prod exp(+-g_s/2) over crossings."""
    lk = link_F(spec, base_pair(d.cls), frame)
    if lk.denominator != 1:
        raise CollarError("fractional linking number")
    total = int(lk) + d.writhe_twists
    z = exp_half_gs(-total, order)
    for e in d.crossing_events:
        z = z * exp_half_gs(e, order)
    return z


# -- text form ----------------------------------------------------------------

def render_config(c: CollarConfig) -> str:
    lines = [f"twist_offset {c.twist_offset}"]
    for s in c.strands:
        h = s.height
        hs = str(h.numerator) if h.denominator == 1 else f"{h.numerator}/{h.denominator}"
        lines.append(f"{hs} ({','.join(str(x) for x in s.cls)}) {s.leg}")
    return "\n".join(lines)


_LINE = re.compile(r"^\s*(?P<h>-?\d+(?:/\d+)?)\s+\((?P<c>[-\d,\s]+)\)\s+(?P<leg>[AB])\s*$")


def parse_config(text: str) -> CollarConfig:
    offset = 0
    strands = []
    for n, raw in enumerate(text.strip().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("twist_offset"):
            try:
                offset = int(line.split()[1])
            except (IndexError, ValueError):
                raise CollarError(f"line {n}: bad twist_offset header {line!r}") from None
            continue
        m = _LINE.match(line)
        if not m:
            raise CollarError(f"line {n}: expected 'height (class) leg', got {line!r}")
        cls = tuple(int(x) for x in m.group("c").split(","))
        strands.append(Strand(Fraction(m.group("h")), cls, m.group("leg")))
    return CollarConfig(tuple(strands), offset)
