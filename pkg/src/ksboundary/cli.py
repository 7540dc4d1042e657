"""Command-line front end: one YAML config, eight commands, deterministic text reports.

Every report has three sections (INPUT ECHO, RESULT, VERIFICATION). The exit
status is 0 exactly when no module raised and every verification passed.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import yaml

from .boundary_states import parse_state, render_state, render_wavefunction, wavefunction
from .charge_lattice import Frame, GeometrySpec, PairingLattice, validate_frame
from .coefficients import QLaurent, QRational, exp_half_gs, frac_str, parse_frac, parse_qlaurent, render_series
from .collar_curves import FramedLinkDiagram, frame_lift, link_F, link_f_closed, parse_config, render_config, skein_reduce
from .ov_wallcrossing import (
    BPSData,
    annihilates,
    annihilators,
    bps_extract,
    build_state,
    build_state_via_s,
    ov_coefficients,
)
from .quantum_torus import parse_torus, render_torus
from .semiclassical_disks import (
    ConnectedExpansion,
    MultiDiskConfig,
    Vertex,
    disk_potential,
    render_flavor,
    semiclassical_check,
)

COMMANDS = (
    "validate",
    "link",
    "skein",
    "wavefunction",
    "annihilator",
    "bps-extract",
    "disk-potential",
    "semiclassical-check",
)
DEFAULT_DEGREE = 6
DEFAULT_ORDER = 8


class ConfigError(ValueError):
    pass


class _EchoDumper(yaml.SafeDumper):
    pass


def _str_block(dumper, text):
    style = "|" if "\n" in text else None
    return dumper.represent_scalar("tag:yaml.org,2002:str", text, style=style)


_EchoDumper.add_representer(str, _str_block)


def _span(vs) -> str:
    return "span{" + ", ".join("(" + ",".join(str(x) for x in v) + ")" for v in vs) + "}"


def _vec(x, where: str, n: int | None = None) -> tuple[int, ...]:
    if not isinstance(x, (list, tuple)) or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        raise ConfigError(f"{where}: expected a list of integers, got {x!r}")
    if n is not None and len(x) != n:
        raise ConfigError(f"{where}: expected length {n}, got {len(x)}")
    return tuple(x)


def _rat(x, where: str) -> Fraction:
    try:
        return parse_frac(str(x))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: expected a rational 'p/q', got {x!r}") from None


def _section(cfg: dict, key: str, where: str | None = None):
    if key not in cfg:
        raise ConfigError(f"{where or key}: missing")
    return cfg[key]


# -- config -------------------------------------------------------------------

def load_geometry(cfg: dict) -> GeometrySpec:
    geo = _section(cfg, "geometry")
    if not isinstance(geo, dict):
        raise ConfigError("geometry: expected a mapping")
    if "gram" in geo:
        gram = [list(_vec(r, f"geometry.gram[{i}]")) for i, r in enumerate(geo["gram"])]
        lat = PairingLattice(gram)
    elif "genus" in geo:
        lat = PairingLattice.standard(int(geo["genus"]))
    else:
        raise ConfigError("geometry: give either genus or gram")
    n = lat.rank
    q = [_vec(r, f"geometry.q_map[{i}]", n) for i, r in enumerate(_section(geo, "q_map", "geometry.q_map"))]
    m = len(q)
    lifts = []
    for i, item in enumerate(geo.get("flavor_section", []) or []):
        if not isinstance(item, dict):
            raise ConfigError(f"geometry.flavor_section[{i}]: expected {{beta, lift}}")
        lifts.append(
            (
                _vec(_section(item, "beta", f"geometry.flavor_section[{i}].beta"), f"geometry.flavor_section[{i}].beta", m),
                _vec(_section(item, "lift", f"geometry.flavor_section[{i}].lift"), f"geometry.flavor_section[{i}].lift", n),
            )
        )
    return GeometrySpec(
        lat,
        tuple(q),
        epsilon=_vec(geo.get("epsilon", [0] * n), "geometry.epsilon", n),
        flavor_lifts=tuple(lifts),
        grading=_vec(geo["grading"], "geometry.grading", m) if "grading" in geo else (),
        charge_grading=_vec(geo["charge_grading"], "geometry.charge_grading", n) if "charge_grading" in geo else (),
        h2_vanishes=bool(geo.get("h2_vanishes", False)),
    )


def load_frame(cfg: dict, spec: GeometrySpec) -> Frame:
    basis = _section(cfg, "frame")
    return Frame(tuple(_vec(b, f"frame[{i}]", spec.rank) for i, b in enumerate(basis)))


def load_bps(cfg: dict, spec: GeometrySpec) -> BPSData:
    entries = {}
    for i, e in enumerate(cfg.get("bps", []) or []):
        where = f"bps[{i}]"
        if not isinstance(e, dict):
            raise ConfigError(f"{where}: expected {{gamma, j, n}}")
        gamma = _vec(_section(e, "gamma", where + ".gamma"), where + ".gamma", spec.rank)
        j = e.get("j", 0)
        n = _rat(_section(e, "n", where + ".n"), where + ".n")
        key = (gamma, int(j))
        entries[key] = entries.get(key, 0) + n
    return BPSData(entries)


def load_disks(cfg: dict, spec: GeometrySpec) -> ConnectedExpansion:
    disks: dict = {}
    higher: dict = {}
    for i, e in enumerate(cfg.get("disks", []) or []):
        where = f"disks[{i}]"
        chi = int(e.get("chi", 1))
        if chi == 1:
            vs = []
            for k, v in enumerate(_section(e, "vertices", where + ".vertices")):
                cls = _vec(_section(v, "class", f"{where}.vertices[{k}].class"), f"{where}.vertices[{k}].class", spec.rank)
                h = _rat(v.get("height", -(k + 1)), f"{where}.vertices[{k}].height")
                vs.append(Vertex(cls, spec.Q(cls), h))
            c = MultiDiskConfig(tuple(vs), _rat(e.get("coefficient", 1), where + ".coefficient"))
            beta = c.beta(spec.flavor_rank)
            if "beta" in e and _vec(e["beta"], where + ".beta", spec.flavor_rank) != beta:
                raise ConfigError(f"{where}.beta: vertex classes sum to {beta}")
            disks.setdefault(beta, []).append(c)
        else:
            beta = _vec(_section(e, "beta", where + ".beta"), where + ".beta", spec.flavor_rank)
            key = (beta, chi)
            higher[key] = higher.get(key, Fraction(0)) + _rat(_section(e, "value", where + ".value"), where + ".value")
    return ConnectedExpansion(disks, higher)


def truncation(cfg: dict, args) -> tuple[int, int]:
    t = cfg.get("truncation", {}) or {}
    degree = args.degree if args.degree is not None else int(t.get("degree", DEFAULT_DEGREE))
    order = args.order if args.order is not None else int(t.get("order", DEFAULT_ORDER))
    return degree, order


# -- commands -----------------------------------------------------------------
# each returns (result lines, verification lines, ok)

def cmd_validate(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    rep = validate_frame(spec.sigma, frame)
    checks = [f"frame: {rep}"]
    ok = bool(rep)
    if ok:
        t = spec.is_transverse(frame)
        checks.append(f"transverse to K: {'yes' if t else 'no'}")
    betas = [spec.Q(e) for e in _unit_vectors(spec.rank)]
    add = all(spec.check_section_additive(a, b) for a in betas for b in betas)
    checks.append(f"section additive on generators: {'yes' if add else 'no'}")
    ok = ok and add
    head = f"valid; K = {_span(spec.kernel)}" if ok else f"invalid; {rep}"
    return [head], checks, ok


def _unit_vectors(n):
    return [tuple(int(i == j) for j in range(n)) for i in range(n)]


def cmd_link(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    c = parse_config(str(_section(cfg, "collar")))
    beta = spec.Q(c.leg_sum("A", spec.rank))
    f = frame_lift(spec, frame, beta)
    value = link_F(spec, c, frame)
    res = [render_config(c), f"Link_F = {frac_str(value)}"]
    checks = []
    ok = True
    if f is not None:
        closed = link_f_closed(spec, c, f)
        good = Fraction(closed) == value
        ok &= good
        checks.append(f"closed form {closed}: {'agrees' if good else 'DISAGREES'}")
        back = parse_config(render_config(c)) == c
        ok &= back
        checks.append(f"render/parse round-trip: {'ok' if back else 'FAILED'}")
    else:
        checks.append(f"class {beta} not in Q(F); Link_F set to 0")
    return res, checks, ok


def cmd_skein(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    sk = _section(cfg, "skein")
    cls = _vec(_section(sk, "class", "skein.class"), "skein.class", spec.rank)
    d = FramedLinkDiagram(cls, int(sk.get("twists", 0)), tuple(sk.get("crossings", []) or []))
    z = skein_reduce(spec, d, frame, order)
    twisted = skein_reduce(spec, FramedLinkDiagram(cls, d.writhe_twists + 1, d.crossing_events), frame, order)
    good = twisted == z * exp_half_gs(-1, order)
    return [f"Z = {render_series(z)}"], [f"framing change multiplies by exp(-g_s/2): {'ok' if good else 'FAILED'}"], good


def cmd_wavefunction(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    N = load_bps(cfg, spec)
    psi = build_state(spec, N, frame, degree, order)
    w = wavefunction(psi, frame)
    res = ["state:", render_state(psi), "wavefunction:", render_wavefunction(w) or "0"]
    via_s = build_state_via_s(spec, N, frame, degree, order) == psi
    back = parse_state(spec, render_state(psi)) == psi
    checks = [
        f"product of S operators gives the same state: {'ok' if via_s else 'FAILED'}",
        f"render/parse round-trip: {'ok' if back else 'FAILED'}",
    ]
    return res, checks, via_s and back


def cmd_annihilator(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    N = load_bps(cfg, spec)
    psi = build_state(spec, N, frame, degree, order)
    anns = annihilators(spec, N, frame, degree, order, psi=psi)
    res, checks, ok = [], [], True
    for a in anns:
        text = render_torus(a.op)
        res.append(f"kappa = ({','.join(str(x) for x in a.kappa)}): {text}")
        back = parse_torus(spec, text) == a.op
        ok &= back and a.verified
        checks.append(f"kappa = ({','.join(str(x) for x in a.kappa)}): verified to degree {degree}, order {order}")
        checks.append(f"render/parse round-trip: {'ok' if back else 'FAILED'}")
    for i, text in enumerate(cfg.get("check_operators", []) or []):
        op = parse_torus(spec, str(text))
        good = annihilates(op, psi)
        ok &= good
        checks.append(f"supplied operator {render_torus(op)}: {'annihilates' if good else 'does NOT annihilate'} Psi")
    return res, checks, ok


def _load_ov(cfg, spec, degree):
    items = cfg.get("ov_coefficients")
    if items is None:
        return ov_coefficients(load_bps(cfg, spec), degree, spec)
    out = {}
    for i, e in enumerate(items):
        where = f"ov_coefficients[{i}]"
        g = _vec(_section(e, "gamma", where + ".gamma"), where + ".gamma", spec.rank)
        try:
            num = parse_qlaurent(str(_section(e, "num", where + ".num")))
            den = parse_qlaurent(str(e.get("den", "1")))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        out[g] = QRational(num, den)
    return out


def cmd_bps_extract(cfg, spec, degree, order):
    a = _load_ov(cfg, spec, degree)
    N = bps_extract(a, degree)
    res = [f"N_{{({','.join(str(x) for x in g)}), {j}}} = {n}" for (g, j), n in N.entries] or ["no BPS states"]
    again = ov_coefficients(N, degree, spec)
    good = all(again.get(g, QRational(QLaurent())) == c for g, c in a.items()) and set(again) <= set(a)
    return res, [f"OV coefficients rebuilt from N: {'agree' if good else 'DISAGREE'}"], good


def cmd_disk_potential(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    Z = load_disks(cfg, spec)
    u = disk_potential(spec, Z.disks, frame, degree)
    sizes = sorted({len(c.vertices) for cs in Z.disks.values() for c in cs})
    return [f"U = {render_flavor(u)}"], [f"tree sums over vertex counts {sizes}"], True


def cmd_semiclassical(cfg, spec, degree, order):
    frame = load_frame(cfg, spec)
    Z = load_disks(cfg, spec)
    gen = _section(cfg, "generator")
    gamma = _vec(_section(gen, "gamma", "generator.gamma"), "generator.gamma", spec.rank)
    beta = _vec(gen["beta"], "generator.beta", spec.flavor_rank) if "beta" in gen else spec.Q(gamma)
    rep = semiclassical_check(spec, Z, (gamma, beta), frame, degree)
    res = [f"g_s^0 of (e Z) Z^-1 = {render_flavor(rep.lhs)}", f"tree side = {render_flavor(rep.rhs)}"]
    checks = [f"agreement through degree {degree}: {'ok' if rep.passed else 'FAILED'}"]
    for b, x, y in rep.differing:
        checks.append(f"  x^{b}: {frac_str(x)} vs {frac_str(y)}")
    return res, checks, rep.passed


DISPATCH = {
    "validate": cmd_validate,
    "link": cmd_link,
    "skein": cmd_skein,
    "wavefunction": cmd_wavefunction,
    "annihilator": cmd_annihilator,
    "bps-extract": cmd_bps_extract,
    "disk-potential": cmd_disk_potential,
    "semiclassical-check": cmd_semiclassical,
}


def run(command: str, cfg: dict, degree: int, order: int) -> tuple[str, bool]:
    """Deterministic report text and the success flag."""
    if command not in DISPATCH:
        raise ConfigError(f"unknown command {command!r}")
    spec = load_geometry(cfg)
    echo = yaml.dump(cfg, Dumper=_EchoDumper, sort_keys=True, allow_unicode=True, default_flow_style=None).rstrip()
    res, checks, ok = DISPATCH[command](cfg, spec, degree, order)
    lines = [
        "== INPUT ECHO ==",
        f"command: {command}",
        f"truncation: degree {degree}, order {order}",
        echo,
        "== RESULT ==",
        *res,
        "== VERIFICATION ==",
        *checks,
        "status: " + ("ok" if ok else "FAILED"),
    ]
    return "\n".join(lines) + "\n", ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ksboundary", description="Exact boundary-state computations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="YAML config file")
    p.add_argument("--degree", type=int, default=None, help=f"charge degree D (default {DEFAULT_DEGREE})")
    p.add_argument("--order", type=int, default=None, help=f"g_s order M (default {DEFAULT_ORDER})")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a mapping at top level")
        degree, order = truncation(cfg, args)
        text, ok = run(args.command, cfg, degree, order)
    except yaml.YAMLError as exc:
        print(f"error: malformed config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
