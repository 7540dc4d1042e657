"""Lattice data of the geometry.

H_1(Sigma, Z) with its intersection form, the map Q to H_1(L, Z), the kernel K,
flavor charges, frames and quadratic refinements.

Flavor charges live in H_1(L, Z) = Z^m (the boundary map on charges is the
identity), so a KS charge (gamma, beta) always has beta = Q(gamma).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from . import intlinalg as la

Charge = tuple[int, ...]


class LatticeError(ValueError):
    pass


def as_charge(v: Sequence[int], rank: int | None = None) -> Charge:
    c = tuple(int(x) for x in v)
    if rank is not None and len(c) != rank:
        raise LatticeError(f"charge {c} has length {len(c)}, lattice rank is {rank}")
    return c


def vadd(a: Charge, b: Charge) -> Charge:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Charge, b: Charge) -> Charge:
    return tuple(x - y for x, y in zip(a, b))


def vscale(n: int, a: Charge) -> Charge:
    return tuple(n * x for x in a)


def standard_gram(g: int) -> list[list[int]]:
    """Block diagonal form with <x_i, y_i> = 1 on coordinates (x_1, y_1, x_2, y_2, ...)."""
    m = la.zeros(2 * g, 2 * g)
    for i in range(g):
        m[2 * i][2 * i + 1] = 1
        m[2 * i + 1][2 * i] = -1
    return m


@dataclass(frozen=True)
class PairingLattice:
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        n = len(gram)
        if n == 0 or n % 2:
            raise LatticeError(f"rank must be a positive even integer, got {n}")
        for i in range(n):
            if len(gram[i]) != n:
                raise LatticeError("gram matrix must be square")
            if gram[i][i] != 0:
                raise LatticeError(f"gram diagonal entry {i} is nonzero")
            for j in range(i):
                if gram[i][j] != -gram[j][i]:
                    raise LatticeError(f"gram is not antisymmetric at ({i},{j})")
        if abs(la.det([list(r) for r in gram])) != 1:
            raise LatticeError("gram matrix is not unimodular")

    @classmethod
    def standard(cls, g: int) -> "PairingLattice":
        return cls(tuple(map(tuple, standard_gram(g))))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def genus(self) -> int:
        return len(self.gram) // 2

    def pairing(self, a: Sequence[int], b: Sequence[int]) -> int:
        n = self.rank
        if len(a) != n or len(b) != n:
            raise LatticeError(f"vectors of length {len(a)}, {len(b)} on a rank-{n} lattice")
        g = self.gram
        return sum(a[i] * g[i][j] * b[j] for i in range(n) if a[i] for j in range(n) if g[i][j])

    @cached_property
    def symplectic_basis(self) -> tuple[tuple[Charge, ...], tuple[Charge, ...]]:
        """Deterministic (X_1..X_g, Y_1..Y_g) with <X_i, Y_j> = delta_ij, others 0."""
        n = self.rank
        remaining = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        xs, ys = [], []
        while remaining:
            x = remaining[0]
            rest = remaining[1:]
            pairs = [self.pairing(x, r) for r in rest]
            coeffs = _bezout(pairs)
            if coeffs is None:
                raise LatticeError("lattice is not unimodular on a symplectic block")
            y = tuple(sum(c * r[k] for c, r in zip(coeffs, rest)) for k in range(n))
            xs.append(x)
            ys.append(y)
            projected = []
            for z in rest:
                zy = self.pairing(z, y)
                zx = self.pairing(z, x)
                projected.append(tuple(z[k] - zy * x[k] + zx * y[k] for k in range(n)))
            projected = [p for p in projected if any(p)]
            if not projected:
                remaining = []
                continue
            h, _, piv = la.column_echelon(la.from_columns(projected, n))
            remaining = [tuple(h[r][c] for r in range(n)) for c in range(len(piv))]
        return tuple(xs), tuple(ys)


def _bezout(values: list[int]) -> list[int] | None:
    """Coefficients c with sum c_i v_i = 1, or None if gcd != 1."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        if v == 0:
            continue
        if g == 0:
            g = abs(v)
            coeffs[i] = 1 if v > 0 else -1
            continue
        d, s, t = la._xgcd(g, v)
        coeffs = [s * c for c in coeffs]
        coeffs[i] = t
        g = d
    return coeffs if g == 1 else None


def pairing_eval(lat: PairingLattice, a: Sequence[int], b: Sequence[int]) -> int:
    return lat.pairing(a, b)


def coordinates(basis: Sequence[Charge], v: Sequence[int]) -> Charge:
    """Coordinates of v in a unimodular basis (given as a list of vectors)."""
    n = len(v)
    inv = la.inverse_unimodular(la.from_columns(list(basis), n))
    return la.matvec(inv, v)


@dataclass(frozen=True)
class Frame:
    basis: tuple[Charge, ...]

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(as_charge(b) for b in self.basis))


@dataclass(frozen=True)
class FrameReport:
    valid: bool
    failed: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.valid

    def __str__(self):
        return "valid" if self.valid else f"invalid, {self.failed}: {self.detail}"


def validate_frame(lat: PairingLattice, frame: Frame) -> FrameReport:
    g = lat.genus
    for b in frame.basis:
        if len(b) != lat.rank:
            return FrameReport(False, "dimension", f"vector {b} has wrong length")
    basis = frame.basis
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            p = lat.pairing(basis[i], basis[j])
            if p:
                return FrameReport(
                    False, "not isotropic", f"<{basis[i]}, {basis[j]}> = {p}"
                )
    if len(basis) != g or _rank(basis) != g:
        return FrameReport(False, "not maximal", f"rank {_rank(basis)} != {g}")
    if not la.lattice_saturated(basis, lat.rank):
        return FrameReport(False, "not saturated", "quotient lattice has torsion")
    return FrameReport(True)


def _rank(vectors) -> int:
    if not vectors:
        return 0
    _, _, piv = la.column_echelon([list(v) for v in vectors])
    return len(piv)


def adapted_basis(lat: PairingLattice, frame: Frame) -> tuple[tuple[Charge, ...], tuple[Charge, ...]]:
    """Symplectic basis (f_1..f_g, e_1..e_g) whose first half spans the frame."""
    rep = validate_frame(lat, frame)
    if not rep:
        raise LatticeError(f"frame rejected: {rep}")
    n, g = lat.rank, lat.genus
    fcols = list(frame.basis)
    # complete F to a unimodular basis: F^T U = [H 0], columns of (U^-1)^T past g
    _, u, _ = la.column_echelon([list(f) for f in fcols])
    vt = la.transpose(la.inverse_unimodular(u))
    comp = [tuple(vt[r][c] for r in range(n)) for c in range(g, n)]
    # M_ij = <f_i, c_j>; e = C M^{-1}
    m = [[lat.pairing(f, c) for c in comp] for f in fcols]
    minv = la.inverse_unimodular(m)
    es = [tuple(sum(comp[k][r] * minv[k][j] for k in range(g)) for r in range(n)) for j in range(g)]
    # kill <e_i, e_j> by adding frame vectors to the later e's
    for j in range(g):
        for i in range(j):
            a = lat.pairing(es[i], es[j])
            if a:
                es[j] = tuple(es[j][r] + a * fcols[i][r] for r in range(n))
    return tuple(fcols), tuple(es)


@dataclass(frozen=True)
class QuadraticRefinement:
    lattice: PairingLattice
    epsilon: Charge

    def __post_init__(self):
        eps = tuple(int(x) % 2 for x in self.epsilon)
        if len(eps) != self.lattice.rank:
            raise LatticeError("epsilon length must equal the lattice rank")
        object.__setattr__(self, "epsilon", eps)

    @cached_property
    def _sym_coords(self):
        xs, ys = self.lattice.symplectic_basis
        n = self.lattice.rank
        inv = la.inverse_unimodular(la.from_columns(list(xs) + list(ys), n))
        return inv

    def base_form(self, gamma: Sequence[int]) -> int:
        """Canonical q_0(gamma) = sum a_i b_i mod 2 in the symplectic basis."""
        c = la.matvec(self._sym_coords, gamma)
        g = self.lattice.genus
        return sum(c[i] * c[g + i] for i in range(g)) % 2

    def sign(self, gamma: Sequence[int]) -> int:
        e = sum(x * y for x, y in zip(self.epsilon, gamma))
        return -1 if (self.base_form(gamma) + e) % 2 else 1


def refinement_sign(r: QuadraticRefinement, gamma: Sequence[int]) -> int:
    return r.sign(gamma)


@dataclass(frozen=True)
class GeometrySpec:
    """All lattice data of one geometry.

    ``q_map`` is the m x 2g matrix of Q. ``flavor_lifts`` optionally pins the
    section tau on a basis of Im(Q): pairs (beta_i, lift_i) with Q(lift_i) = beta_i.
    ``grading`` weights the degree of a flavor charge, deg(beta) = grading . beta.
    ``charge_grading``, when given, grades torus generators by gamma instead.
    """

    sigma: PairingLattice
    q_map: tuple[tuple[int, ...], ...]
    epsilon: Charge = ()
    flavor_lifts: tuple[tuple[Charge, Charge], ...] = ()
    grading: Charge = ()
    charge_grading: Charge = ()
    h2_vanishes: bool = False
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        q = tuple(tuple(int(x) for x in row) for row in self.q_map)
        object.__setattr__(self, "q_map", q)
        n = self.sigma.rank
        if not q or any(len(r) != n for r in q):
            raise LatticeError(f"q_map must be an m x {n} integer matrix")
        eps = tuple(self.epsilon) or (0,) * n
        object.__setattr__(self, "epsilon", as_charge(eps, n))
        grading = tuple(self.grading) or (1,) * len(q)
        object.__setattr__(self, "grading", as_charge(grading, len(q)))
        if self.charge_grading:
            object.__setattr__(self, "charge_grading", as_charge(self.charge_grading, n))
        lifts = tuple((as_charge(b, len(q)), as_charge(l, n)) for b, l in self.flavor_lifts)
        object.__setattr__(self, "flavor_lifts", lifts)
        for b, l in lifts:
            if self.Q(l) != b:
                raise LatticeError(f"flavor lift {l} does not map to {b}")
        if lifts:
            betas = [b for b, _ in lifts]
            if _rank(betas) != len(betas):
                raise LatticeError("flavor lift charges are not independent")
            if _rank(betas) != _rank([list(c) for c in la.columns([list(r) for r in q])]):
                raise LatticeError("flavor lifts must cover a basis of Im(Q)")

    # -- basic maps ---------------------------------------------------------
    @property
    def genus(self) -> int:
        return self.sigma.genus

    @property
    def rank(self) -> int:
        return self.sigma.rank

    @property
    def flavor_rank(self) -> int:
        return len(self.q_map)

    def Q(self, gamma: Sequence[int]) -> Charge:
        return la.matvec(self.q_map, as_charge(gamma, self.rank))

    def pairing(self, a, b) -> int:
        return self.sigma.pairing(a, b)

    def degree(self, beta: Sequence[int]) -> int:
        return sum(w * b for w, b in zip(self.grading, beta))

    def key_degree(self, gamma: Sequence[int], beta: Sequence[int]) -> int:
        """Truncation degree of a torus generator: on gamma if a charge grading is set."""
        if self.charge_grading:
            return sum(w * x for w, x in zip(self.charge_grading, gamma))
        return self.degree(beta)

    @cached_property
    def refinement(self) -> QuadraticRefinement:
        return QuadraticRefinement(self.sigma, self.epsilon)

    def sigma_sign(self, gamma) -> int:
        return self.refinement.sign(gamma)

    # -- kernel and flavor --------------------------------------------------
    @cached_property
    def kernel(self) -> tuple[Charge, ...]:
        out = []
        for v in la.kernel_basis([list(r) for r in self.q_map]):
            lead = next(x for x in v if x)
            out.append(v if lead > 0 else vscale(-1, v))
        return tuple(out)

    def in_kernel(self, gamma) -> bool:
        return not any(self.Q(gamma))

    def is_flavor(self, beta: Sequence[int]) -> bool:
        return la.solve_integer([list(r) for r in self.q_map], tuple(beta)) is not None

    def tau(self, beta: Sequence[int]) -> Charge:
        """The chosen lift of a flavor charge to H_1(Sigma, Z)."""
        beta = as_charge(beta, self.flavor_rank)
        key = ("tau", beta)
        if key in self._cache:
            return self._cache[key]
        if self.flavor_lifts:
            betas = [b for b, _ in self.flavor_lifts]
            n = la.solve_integer(la.from_columns(betas, self.flavor_rank), beta)
            if n is None:
                raise LatticeError(f"{beta} is not a flavor charge")
            out = (0,) * self.rank
            for k, (_, lift) in zip(n, self.flavor_lifts):
                out = vadd(out, vscale(k, lift))
        else:
            out = la.solve_integer([list(r) for r in self.q_map], beta)
            if out is None:
                raise LatticeError(f"{beta} is not a flavor charge")
        self._cache[key] = out
        return out

    def check_section_additive(self, b1, b2) -> bool:
        d = vsub(vsub(self.tau(vadd(b1, b2)), self.tau(b1)), self.tau(b2))
        return self.in_kernel(d)

    # -- the linking form ---------------------------------------------------
    @cached_property
    def lagrangian(self) -> tuple[Charge, ...]:
        """A Lagrangian sublattice containing K, extended greedily and deterministically."""
        k = self.kernel
        for i, a in enumerate(k):
            for b in k[i + 1 :]:
                if self.pairing(a, b):
                    raise LatticeError(f"kernel of Q is not isotropic: <{a},{b}> != 0")
        lag = list(k)
        n, g = self.rank, self.genus
        while len(lag) < g:
            # L^perp = {v : <l, v> = 0 for l in L}
            rows = [[sum(l[i] * self.sigma.gram[i][j] for i in range(n)) for j in range(n)] for l in lag]
            perp = la.kernel_basis(rows) if rows else [tuple(int(i == j) for j in range(n)) for i in range(n)]
            v = next(p for p in perp if _rank(lag + [p]) > len(lag))
            # saturate span(L, v): the kernel of its annihilator
            ann = la.kernel_basis([list(x) for x in lag + [v]])
            lag = la.kernel_basis([list(a) for a in ann]) if ann else lag + [v]
        return tuple(tuple(x) for x in lag)

    @cached_property
    def _linking_coords(self):
        lag = Frame(self.lagrangian)
        ks, cs = adapted_basis(self.sigma, lag)
        # <c_i, k_j> = delta_ij with c = -e
        cs = tuple(vscale(-1, c) for c in cs)
        inv = la.inverse_unimodular(la.from_columns(list(cs) + list(ks), self.rank))
        return inv

    def linking_form(self, x, y) -> int:
        """Bilinear B with B(x,y) - B(y,x) = <x,y> and B(kappa, .) = 0 on K.

        B(x, y) = sum_i x^c_i y^k_i in a basis (c, k) with k spanning the
        Lagrangian containing K and <c_i, k_j> = delta_ij.
        """
        inv = self._linking_coords
        g = self.genus
        cx = la.matvec(inv, x)
        cy = la.matvec(inv, y)
        return sum(cx[i] * cy[g + i] for i in range(g))

    def is_transverse(self, frame: Frame) -> bool:
        """F + K = H_1(Sigma, Z) as lattices."""
        vecs = list(frame.basis) + list(self.kernel)
        if len(vecs) != self.rank:
            return False
        return abs(la.det(la.from_columns(vecs, self.rank))) == 1


def kernel_flavor(spec: GeometrySpec):
    """(basis of K, membership test for flavor charges)."""
    return spec.kernel, spec.is_flavor


def solid_torus(epsilon=(0, 0)) -> GeometrySpec:
    return GeometrySpec(PairingLattice.standard(1), ((1, 0),), epsilon=epsilon)
