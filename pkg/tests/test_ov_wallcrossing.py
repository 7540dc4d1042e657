from fractions import Fraction

import pytest

from ksboundary.boundary_states import BoundaryState, act
from ksboundary.charge_lattice import GeometrySpec, PairingLattice, vscale
from ksboundary.coefficients import QLaurent, QRational
from ksboundary.ov_wallcrossing import (
    BPSData,
    BPSError,
    IntegralityError,
    annihilates,
    annihilator_for,
    annihilators,
    bps_extract,
    build_state,
    build_state_via_s,
    classical_limit,
    ov_coefficient,
    ov_coefficients,
    s_conjugate,
    s_conjugate_bruteforce,
)
from ksboundary.quantum_torus import TorusElement, parse_torus

from conftest import genus2

SOLID = GeometrySpec(PairingLattice.standard(1), ((1, 0),), charge_grading=(1, 1))
SOLID_FRAME_BASIS = ((1, 0),)


def solid():
    from ksboundary.charge_lattice import Frame

    return SOLID, Frame(SOLID_FRAME_BASIS)


def q(half, c=1):
    return QLaurent.qpow(half, c)


def random_table(rng, support, max_j=2):
    entries = {}
    for g in support:
        for _ in range(rng.randint(0, 2)):
            entries[(g, rng.randint(-max_j, max_j))] = rng.choice([-2, -1, 1, 2, 3])
    return BPSData(entries)


def test_ov_coefficient_examples():
    N = BPSData({((1, 0), 0): 1})
    assert ov_coefficient(N, (1, 0)) == QRational(q(0), q(1) - q(-1))
    assert ov_coefficient(BPSData(), (1, 0)).is_zero()
    assert ov_coefficient(N, (2, 0)) == QRational(q(0), (q(2) - q(-2)) * QLaurent.const(2))
    assert ov_coefficient(N, (3, 1)).is_zero()


def test_bps_round_trip(rng):
    support = [(1, 0, 0, 0), (0, 0, 1, 0), (1, 0, 1, 0), (2, 0, 1, 0)]
    for _ in range(25):
        N = random_table(rng, support)
        a = ov_coefficients(N, 4)
        assert bps_extract(a, 4) == N
    assert len(bps_extract({})) == 0


def test_bps_extract_rejects_non_integral():
    N = BPSData({((1, 0), 0): 1, ((1, 0), 1): 2})
    a = ov_coefficients(N, 3)
    a[(1, 0)] = a[(1, 0)] + QRational(QLaurent.const(Fraction(1, 2)))
    with pytest.raises(IntegralityError, match=r"\(1, 0\)"):
        bps_extract(a)
    with pytest.raises(IntegralityError):
        BPSData({((1, 0), 0): Fraction(1, 2)})


def test_s_conjugate_examples():
    spec, _ = solid()
    # m = 1, j = 0: e_0 (1 - q^(1/2) x)^(-1)
    c = s_conjugate(spec, (1, 0), 0, (0, 1), 3)
    e0 = TorusElement.generator(spec, (0, 1))
    geo = sum((TorusElement.generator(spec, (k, 0), q(k)) for k in range(1, 4)), TorusElement.one(spec))
    assert c == e0 * geo
    # commuting case
    assert s_conjugate(spec, (1, 0), 2, (3, 0), 4) == TorusElement.generator(spec, (3, 0))
    # m = -1, j = 0: e_0 (1 - q^(-1/2) x)
    c = s_conjugate(spec, (1, 0), 0, (0, -1), 3)
    assert c == TorusElement.generator(spec, (0, -1)) * (1 - TorusElement.generator(spec, (1, 0), q(-1)))


@pytest.mark.parametrize("m", [-3, -2, -1, 0, 1, 2, 3])
def test_s_conjugate_matches_bruteforce(m):
    spec, _ = solid()
    gamma0 = (0, m)
    for j in (-2, 0, 2):
        assert s_conjugate(spec, (1, 0), j, gamma0, 4) == s_conjugate_bruteforce(spec, (1, 0), j, gamma0, 4)


def test_build_state_low_degree():
    spec, frame = solid()
    N = BPSData({((1, 0), 0): 1})
    psi = build_state(spec, N, frame, 2, 6)
    a1, a2 = ov_coefficient(N, (1, 0)), ov_coefficient(N, (2, 0))
    word = (
        TorusElement.one(spec, 2)
        + TorusElement.generator(spec, (1, 0), a1, 2)
        + TorusElement.generator(spec, (2, 0), a1 * a1 * QRational(QLaurent.const(Fraction(1, 2))) + a2, 2)
    )
    ref = act(word, BoundaryState.vacuum(spec, 2, 10))
    assert psi.components == {b: s.truncate(6) for b, s in ref.components.items()}


def test_build_state_empty_is_vacuum():
    spec, frame = solid()
    assert build_state(spec, BPSData(), frame, 4, 6) == BoundaryState.vacuum(spec, 4, 6)


def test_factor_order_irrelevant_and_s_product_agrees():
    spec, frame = genus2()
    N = BPSData({((1, 0, 0, 0), 0): 1, ((0, 0, 1, 0), 1): -1, ((1, 0, 1, 0), 0): 2})
    psi = build_state(spec, N, frame, 3, 6)
    rev = build_state(spec, N, frame, 3, 6, factor_order=[(1, 0, 1, 0), (0, 0, 1, 0), (1, 0, 0, 0)])
    assert psi == rev
    assert build_state_via_s(spec, N, frame, 3, 6) == psi


def test_support_off_frame_rejected():
    spec, frame = solid()
    with pytest.raises(BPSError):
        build_state(spec, BPSData({((1, 1), 0): 1}), frame)


def test_solid_torus_annihilators():
    spec, frame = solid()
    (a,) = annihilators(spec, BPSData({((1, 0), 0): 1}), frame, 6, 8)
    assert a.verified and a.is_integral()
    assert a.op == parse_torus(spec, "ê_{(0,1)} + q^{-1/2}·ê_{(1,0)} − 1")
    (a,) = annihilators(spec, BPSData({((1, 0), 1): 1}), frame, 6, 8)
    assert a.op == parse_torus(spec, "ê_{(0,1)} + q^{1/2}·ê_{(1,0)} − 1")
    (a,) = annihilators(spec, BPSData(), frame, 6, 8)
    assert a.op == parse_torus(spec, "ê_{(0,1)} − 1")


def test_left_multiples_still_annihilate():
    spec, frame = solid()
    N = BPSData({((1, 0), 0): 1})
    op = annihilator_for(spec, N, (0, 1))
    psi = build_state(spec, N, frame, 6, 8)
    for g in [(1, 0), (0, 1), (2, -1)]:
        x = TorusElement.generator(spec, g, q(1))
        assert annihilates(x * op, psi)


def test_random_genus2_annihilators(rng):
    spec, frame = genus2()
    support = [(1, 0, 0, 0), (0, 0, 1, 0), (1, 0, 1, 0)]
    for _ in range(4):
        N = random_table(rng, support, 1)
        anns = annihilators(spec, N, frame, 3, 6)
        assert len(anns) == len(spec.kernel)
        assert all(a.verified and a.is_integral() for a in anns)


def test_classical_limit():
    spec, frame = solid()
    (a,) = annihilators(spec, BPSData({((1, 0), 0): 1}), frame, 4, 6)
    assert classical_limit(a.op) == {(0, 1): 1, (1, 0): 1, (0, 0): -1}
