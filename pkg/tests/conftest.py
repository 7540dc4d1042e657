import random
from fractions import Fraction

import pytest

from ksboundary.charge_lattice import Frame, GeometrySpec, PairingLattice, solid_torus, vadd, vscale, vsub
from ksboundary.collar_curves import CollarConfig, Exchange, KernelSlide, Strand, Twist
from ksboundary.coefficients import QLaurent

ACCEPTANCE_LINES = []


def random_charge(rng, n, lo=-2, hi=2):
    return tuple(rng.randint(lo, hi) for _ in range(n))


def random_qlaurent(rng, terms=3, span=4):
    return QLaurent({rng.randint(-span, span): Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(terms)})


def genus2():
    """Q kills the second and fourth basis vectors; F spans the first and third."""
    spec = GeometrySpec(PairingLattice.standard(2), ((1, 0, 0, 0), (0, 0, 1, 0)))
    return spec, Frame(((1, 0, 0, 0), (0, 0, 1, 0)))


def solid():
    return solid_torus(), Frame(((1, 0),))


def random_config(spec, rng, frame=None):
    """Random interleaved A/B strands whose legs lift the same flavor class."""
    n = spec.rank
    na, nb = rng.randint(1, 3), rng.randint(1, 3)
    a = [random_charge(rng, n) for _ in range(na)]
    b = [random_charge(rng, n) for _ in range(nb - 1)]
    last = vsub(sum_of(a, n), sum_of(b, n))
    for kappa in spec.kernel:
        last = vadd(last, vscale(rng.randint(-2, 2), kappa))
    b.append(last)
    strands = [("A", c) for c in a] + [("B", c) for c in b]
    rng.shuffle(strands)
    hs = sorted(rng.sample(range(-40, 0), len(strands)), reverse=True)
    return CollarConfig(tuple(Strand(h, c, leg) for h, (leg, c) in zip(hs, strands)), rng.randint(-3, 3))


def sum_of(vs, n):
    out = (0,) * n
    for v in vs:
        out = vadd(out, v)
    return out


def random_moves(spec, c, rng, k=8):
    moves = []
    for _ in range(k):
        r = rng.random()
        if r < 0.5 and len(c.strands) > 1:
            moves.append(Exchange(rng.randrange(len(c.strands) - 1)))
        elif r < 0.85 and spec.kernel:
            kappa = vscale(rng.choice([-1, 1]), rng.choice(spec.kernel))
            moves.append(KernelSlide(rng.randrange(len(c.strands)), kappa))
        else:
            moves.append(Twist(rng.randint(-2, 2)))
    return moves


def lift(spec, c, rng):
    f = spec.tau(spec.Q(c.leg_sum("A", spec.rank)))
    for kappa in spec.kernel:
        f = vadd(f, vscale(rng.randint(-2, 2), kappa))
    return f


@pytest.fixture
def rng():
    return random.Random(20261019)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
