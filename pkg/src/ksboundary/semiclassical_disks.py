"""The g_s -> 0 limit: multi-disk configurations, tree sums and the disk potential.

A multi-disk configuration is a set of vertices, each a disk boundary of class
gamma_v placed at a height in the collar. Two vertices are joined by the edge
weight L(upper, lower) = B(x, y) - B(f_x, f_y), where f_x is the frame lift of
Q(x). L is bilinear, vanishes when its upper slot lies in K, and
L(x, y) - L(y, x) = <x, y> on an isotropic frame.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from . import intlinalg as la
from .boundary_states import BoundaryState, act_generator, base_link_F, times_exp_half, wavefunction
from .charge_lattice import Charge, Frame, GeometrySpec, as_charge, vadd
from .coefficients import GsSeries, frac_str, series_mul
from .collar_curves import frame_lift
from .quantum_torus import check_key


class DiskError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    cls: Charge
    beta: Charge
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "cls", as_charge(self.cls))
        object.__setattr__(self, "beta", as_charge(self.beta))
        object.__setattr__(self, "height", Fraction(self.height))


@dataclass(frozen=True)
class MultiDiskConfig:
    """Vertices listed top to bottom, with an overall rational coefficient."""

    vertices: tuple[Vertex, ...]
    coefficient: Fraction = Fraction(1)

    def __post_init__(self):
        vs = tuple(v if isinstance(v, Vertex) else Vertex(*v) for v in self.vertices)
        vs = tuple(sorted(vs, key=lambda v: -v.height))
        hs = [v.height for v in vs]
        if len(set(hs)) != len(hs):
            raise DiskError("vertex heights must be distinct")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))

    def beta(self, m: int) -> Charge:
        out = (0,) * m
        for v in self.vertices:
            out = vadd(out, v.beta)
        return out

    def lowest(self) -> Fraction:
        return min((v.height for v in self.vertices), default=Fraction(0))

    def is_zero(self) -> bool:
        return self.coefficient == 0


def make_config(spec: GeometrySpec, classes, coefficient=1, heights=None) -> MultiDiskConfig:
    """Vertices with beta_v = Q(gamma_v), stacked at heights -1, -2, ... unless given."""
    heights = heights if heights is not None else [-(i + 1) for i in range(len(classes))]
    vs = tuple(Vertex(as_charge(g, spec.rank), spec.Q(g), h) for g, h in zip(classes, heights))
    c = MultiDiskConfig(vs, coefficient)
    check_config(spec, c)
    return c


def check_config(spec: GeometrySpec, c: MultiDiskConfig) -> None:
    for v in c.vertices:
        check_key(spec, (v.cls, v.beta))


# -- moves --------------------------------------------------------------------

def classical_act(spec: GeometrySpec, key, c: MultiDiskConfig) -> MultiDiskConfig:
    """Adjoin a vertex of class gamma below every existing strand; coefficient times sigma(gamma)."""
    gamma, beta = check_key(spec, key)
    v = Vertex(gamma, beta, c.lowest() - 1)
    return MultiDiskConfig(c.vertices + (v,), c.coefficient * spec.sigma_sign(gamma))


def exchange(c: MultiDiskConfig, i: int) -> MultiDiskConfig:
    """Swap the vertices at stack positions i and i+1, keeping the heights in place."""
    vs = list(c.vertices)
    if not 0 <= i < len(vs) - 1:
        raise DiskError(f"exchange index {i} out of range")
    a, b = vs[i], vs[i + 1]
    vs[i] = Vertex(b.cls, b.beta, a.height)
    vs[i + 1] = Vertex(a.cls, a.beta, b.height)
    return MultiDiskConfig(tuple(vs), c.coefficient)


def merge_move(c: MultiDiskConfig, i: int, j: int, weight) -> MultiDiskConfig:
    """Replace vertices i, j by one carrying the summed class; coefficient times weight."""
    if i == j or not (0 <= i < len(c.vertices) and 0 <= j < len(c.vertices)):
        raise DiskError(f"invalid vertex pair ({i}, {j})")
    a, b = c.vertices[i], c.vertices[j]
    merged = Vertex(vadd(a.cls, b.cls), vadd(a.beta, b.beta), max(a.height, b.height))
    rest = tuple(v for k, v in enumerate(c.vertices) if k not in (i, j))
    return MultiDiskConfig(rest + (merged,), c.coefficient * Fraction(weight))


def crossing_weight(spec: GeometrySpec, c: MultiDiskConfig, i: int) -> int:
    """Merge weight produced when vertices i (upper) and i+1 (lower) pass through each other."""
    up, lo = c.vertices[i], c.vertices[i + 1]
    return spec.pairing(lo.cls, up.cls)


# -- linking and tree sums ----------------------------------------------------

def edge_link(spec: GeometrySpec, frame: Frame, upper, lower) -> int:
    fx = frame_lift(spec, frame, spec.Q(upper))
    fy = frame_lift(spec, frame, spec.Q(lower))
    if fx is None or fy is None:
        return 0
    return spec.linking_form(upper, lower) - spec.linking_form(fx, fy)


def link_matrix(spec: GeometrySpec, c: MultiDiskConfig, frame: Frame) -> list[list[int]]:
    n = len(c.vertices)
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = edge_link(spec, frame, c.vertices[i].cls, c.vertices[j].cls)
            m[i][j] = m[j][i] = w
    return m


def prufer_trees(n: int):
    """All labeled spanning trees of K_n as edge lists."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = next(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [i for i in range(n) if degree[i] == 1]
        edges.append((u, v))
        yield edges


def tree_sum_bruteforce(w, leaf: int | None = None) -> Fraction:
    """Sum over spanning trees of the product of edge weights (optionally with ``leaf`` a leaf)."""
    n = len(w)
    total = Fraction(0)
    for edges in prufer_trees(n):
        if leaf is not None and n > 1 and sum(leaf in e for e in edges) != 1:
            continue
        p = Fraction(1)
        for u, v in edges:
            p *= w[u][v]
            if not p:
                break
        total += p
    return total


def tree_sum_kirchhoff(w) -> Fraction:
    """Weighted matrix-tree theorem: any cofactor of the weighted Laplacian."""
    n = len(w)
    if n == 1:
        return Fraction(1)
    lap = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                lap[i][j] = -Fraction(w[i][j])
                lap[i][i] += Fraction(w[i][j])
    minor = [row[1:] for row in lap[1:]]
    return la.det_fraction(minor)


def tree_sum(w, method: str | None = None) -> Fraction:
    n = len(w)
    if n == 0:
        raise DiskError("tree sum over an empty vertex set")
    method = method or ("brute" if n <= 6 else "kirchhoff")
    return tree_sum_bruteforce(w) if method == "brute" else tree_sum_kirchhoff(w)


def tree_sum_link(spec: GeometrySpec, c: MultiDiskConfig, frame: Frame, method: str | None = None) -> Fraction:
    return tree_sum(link_matrix(spec, c, frame), method)


# -- flavor power series ------------------------------------------------------

class FlavorSeries:
    """Commuting power series sum_beta c_beta x^beta truncated at grading degree D.

    Coefficients are Fractions or GsSeries.
    """

    __slots__ = ("spec", "terms", "degree")

    def __init__(self, spec: GeometrySpec, terms=None, degree: int = 6):
        self.spec = spec
        self.degree = degree
        d = {}
        for b, c in (terms or {}).items():
            b = as_charge(b, spec.flavor_rank)
            if spec.degree(b) > degree:
                continue
            d[b] = _cadd(d[b], c) if b in d else c
        self.terms = {b: c for b, c in d.items() if c}

    def __add__(self, other):
        d = dict(self.terms)
        for b, c in other.terms.items():
            d[b] = _cadd(d[b], c) if b in d else c
        return FlavorSeries(self.spec, d, min(self.degree, other.degree))

    def __mul__(self, other):
        if not isinstance(other, FlavorSeries):
            return FlavorSeries(self.spec, {b: _cmul(c, other) for b, c in self.terms.items()}, self.degree)
        deg = min(self.degree, other.degree)
        d = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                b = vadd(b1, b2)
                if self.spec.degree(b) > deg:
                    continue
                p = _cmul(c1, c2)
                d[b] = _cadd(d[b], p) if b in d else p
        return FlavorSeries(self.spec, d, deg)

    def __neg__(self):
        return FlavorSeries(self.spec, {b: -c for b, c in self.terms.items()}, self.degree)

    def __eq__(self, other):
        return isinstance(other, FlavorSeries) and self.terms == other.terms

    __hash__ = None

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (self.spec.degree(kv[0]), kv[0]))


def _cadd(a, b):
    if isinstance(a, GsSeries) and isinstance(b, GsSeries):
        m = min(a.order, b.order)
        return a.truncate(m) + b.truncate(m)
    return a + b


def _cmul(a, b):
    if isinstance(a, GsSeries) and isinstance(b, GsSeries):
        return series_mul(a, b)
    return a * b


def flavor_exp(a: FlavorSeries, one) -> FlavorSeries:
    """exp(a) for a with no constant term; ``one`` is the unit coefficient."""
    zero = (0,) * a.spec.flavor_rank
    for b in a.terms:
        if a.spec.degree(b) <= 0:
            raise DiskError(f"exp needs positive-degree terms; x^{b} has degree {a.spec.degree(b)}")
    out = FlavorSeries(a.spec, {zero: one}, a.degree)
    power = out
    m = 0
    while True:
        m += 1
        power = power * a
        if not power.terms:
            return out
        out = out + power * Fraction(1, factorial(m))


def render_monomial(beta) -> str:
    parts = []
    for i, e in enumerate(beta, 1):
        if e == 1:
            parts.append(f"x_{i}")
        elif e:
            parts.append(f"x_{i}^{e}" if e > 0 else f"x_{i}^({e})")
    return "·".join(parts) if parts else "1"


def render_flavor(s: FlavorSeries) -> str:
    if not s.terms:
        return "0"
    out = []
    for b, c in s.sorted_items():
        mono = render_monomial(b)
        if isinstance(c, GsSeries):
            out.append(f"({c})·{mono}")
            continue
        body = frac_str(abs(c))
        term = mono if body == "1" and mono != "1" else (body if mono == "1" else f"{body}·{mono}")
        sign = "−" if c < 0 else "+"
        out.append((sign, term))
    text = ""
    for i, item in enumerate(out):
        if isinstance(item, str):
            text += ("" if i == 0 else " + ") + item
        else:
            sign, term = item
            text += (("−" if sign == "−" else "") + term) if i == 0 else f" {sign} {term}"
    return text


# -- disk potential and the semiclassical limit -------------------------------

def disk_potential(spec: GeometrySpec, W: dict, frame: Frame, degree: int) -> FlavorSeries:
    """U(x) = sum_beta Link_F(W_beta) x^beta with Link_F the tree sum (times the coefficient)."""
    if not spec.h2_vanishes:
        raise DiskError("the disk potential needs H_2(L, Q) = 0; set h2_vanishes in the geometry")
    terms = {}
    for beta, configs in W.items():
        beta = as_charge(beta, spec.flavor_rank)
        for c in _as_list(configs):
            check_config(spec, c)
            if c.beta(spec.flavor_rank) != beta:
                raise DiskError(f"configuration filed under {beta} has total charge {c.beta(spec.flavor_rank)}")
            v = c.coefficient * tree_sum_link(spec, c, frame)
            terms[beta] = terms.get(beta, Fraction(0)) + v
    return FlavorSeries(spec, terms, degree)


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class ConnectedExpansion:
    """log Z = sum_beta g_s^(-1) W_(beta,1) + sum_(beta, chi <= 0) g_s^(-chi) w_(beta,chi)."""

    disks: dict = field(default_factory=dict)
    higher: dict = field(default_factory=dict)

    def __post_init__(self):
        for (beta, chi) in self.higher:
            if chi > 0:
                raise DiskError(f"higher sector term at chi = {chi}; only chi <= 0 allowed there")

    def log_wavefunction(self, spec: GeometrySpec, frame: Frame, degree: int, order: int) -> FlavorSeries:
        terms = {}
        for beta, configs in self.disks.items():
            beta = as_charge(beta, spec.flavor_rank)
            v = sum((c.coefficient * tree_sum_link(spec, c, frame) for c in _as_list(configs)), Fraction(0))
            if v:
                terms[beta] = _cadd(terms[beta], GsSeries.monomial(-1, v, order)) if beta in terms else GsSeries.monomial(-1, v, order)
        for (beta, chi), w in self.higher.items():
            beta = as_charge(beta, spec.flavor_rank)
            s = GsSeries.monomial(-chi, Fraction(w), order)
            terms[beta] = _cadd(terms[beta], s) if beta in terms else s
        return FlavorSeries(spec, terms, degree)


@dataclass
class SemiclassicalReport:
    passed: bool
    lhs: FlavorSeries
    rhs: FlavorSeries
    differing: list

    def __str__(self):
        head = "pass" if self.passed else "FAIL"
        return f"{head}: g_s^0 of (e Z) Z^-1 = {render_flavor(self.lhs)}; tree side = {render_flavor(self.rhs)}"


def quantum_side(spec: GeometrySpec, Z: ConnectedExpansion, key, frame: Frame, degree: int) -> FlavorSeries:
    """g_s^0 coefficient of (e_key Z) Z^-1 computed through the coherent-state action."""
    if not spec.is_transverse(frame):
        raise DiskError("semiclassical check needs a frame transverse to K")
    order = 2 * degree + 2
    logz = Z.log_wavefunction(spec, frame, degree, order)
    one = GsSeries.one(order)
    zf = flavor_exp(logz, one)
    zinv = flavor_exp(-logz, one)
    # frame trivialization undone: psi_beta = Z_F(beta) exp(+n_beta g_s / 2)
    comps = {}
    for b, s in zf.terms.items():
        n = base_link_F(spec, b, frame)
        if n is None:
            raise DiskError(f"{b} is not in Q(F)")
        comps[b] = times_exp_half(s, n)
    psi = BoundaryState(spec, comps, degree, order)
    moved = wavefunction(act_generator(spec, key, psi), frame)
    ratio = FlavorSeries(spec, moved, degree) * zinv
    out = {}
    for b, s in ratio.terms.items():
        if s.order < 0:
            raise DiskError(f"lost the g_s^0 coefficient at x^{b}; precision ran out")
        if s.min_exp < 0:
            raise DiskError(f"(e Z) Z^-1 has a pole at x^{b}")
        out[b] = s[0]
    return FlavorSeries(spec, out, degree)


def classical_side(spec: GeometrySpec, Z: ConnectedExpansion, key, frame: Frame, degree: int) -> FlavorSeries:
    """sigma(gamma) x^beta exp(- sum over disks of trees with the special vertex as a leaf)."""
    gamma, beta = check_key(spec, key)
    exponent = {}
    for b0, configs in Z.disks.items():
        b0 = as_charge(b0, spec.flavor_rank)
        for c in _as_list(configs):
            acted = classical_act(spec, (gamma, beta), c)
            w = link_matrix(spec, acted, frame)
            v = c.coefficient * tree_sum_bruteforce(w, leaf=len(w) - 1)
            if v:
                exponent[b0] = exponent.get(b0, Fraction(0)) - v
    e = flavor_exp(FlavorSeries(spec, exponent, degree), Fraction(1))
    return FlavorSeries(spec, {beta: Fraction(spec.sigma_sign(gamma))}, degree) * e


def semiclassical_check(spec: GeometrySpec, Z: ConnectedExpansion, key, frame: Frame, degree: int = 3) -> SemiclassicalReport:
    _, beta = check_key(spec, key)
    if spec.degree(beta) < 0:
        raise DiskError("the generator must have non-negative degree; truncation is not multiplicative otherwise")
    lhs = quantum_side(spec, Z, key, frame, degree)
    rhs = classical_side(spec, Z, key, frame, degree)
    diff = []
    for b in sorted(set(lhs.terms) | set(rhs.terms)):
        a, c = lhs.terms.get(b, Fraction(0)), rhs.terms.get(b, Fraction(0))
        if a != c:
            diff.append((b, a, c))
    return SemiclassicalReport(not diff, lhs, rhs, diff)
