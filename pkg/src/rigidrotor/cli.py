"""Command-line entry point: ``rigidrotor <group> <action> [options]``.

Exit codes: 0 success, 1 invariant failure or numerical error, 2 usage
error, 3 config validation.  Every artifact carries the config hash.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import coherence as coh
from . import distributions as dist
from . import dynamics as dyn
from . import geometry as geo
from . import su2
from . import verify
from . import wavefunctions as wf
from .config import RunConfig, ordered_map
from .errors import ConfigError, RotorError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers


def _floats(text: str, n: Optional[int] = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _vec3(text: str) -> list[float]:
    return _floats(text, 3)


def _vec4(text: str) -> list[float]:
    return _floats(text, 4)


def _ints3(text: str) -> list[int]:
    return [int(x) for x in _floats(text, 3)]


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps an unset sub-level flag from clobbering a top-level one
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    g.add_argument("--show-config", action="store_true", default=argparse.SUPPRESS,
                   help="print the resolved config and exit")
    g.add_argument("--hbar", type=float, default=argparse.SUPPRESS)
    g.add_argument("--I", "--inertia", dest="inertia", type=_vec3, default=argparse.SUPPRESS,
                   help="moments of inertia I1,I2,I3")
    g.add_argument("--jmax", type=int, default=argparse.SUPPRESS)
    g.add_argument("--gamma-grid", dest="gamma_grid", type=_ints3, default=argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--out", "-o", dest="output", default=argparse.SUPPRESS,
                   help="output path ('-' for stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rigidrotor", parents=[common],
                                     description="Rigid-rotor phase-space toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", metavar="GROUP")

    def leaf(sub, name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    g = groups.add_parser("geometry", help="SO(3) geometry").add_subparsers(dest="action", required=True)
    p = leaf(g, "check", cmd_geometry_check, "structure equations, duality, commutators, curvature")
    p.add_argument("--points", type=int, default=200)

    g = groups.add_parser("dynamics", help="classical motion").add_subparsers(dest="action", required=True)
    p = leaf(g, "simulate", cmd_dynamics_simulate, "RK4 trajectory as CSV")
    p.add_argument("--rho", type=_vec3, required=True)
    p.add_argument("--euler", type=_vec3, default=[0.0, 0.0, 0.0], help="initial phi,theta,psi")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--every", type=int, default=1, help="write every n-th step")
    p.add_argument("--scheme", default="rk4", choices=["rk4", "geodesic"])

    g = groups.add_parser("state", help="wave functions").add_subparsers(dest="action", required=True)
    p = leaf(g, "make", cmd_state_make, "basis or random state as JSON")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--basis", type=_ints3, metavar="J,M,K")
    kind.add_argument("--random", action="store_true")
    p = leaf(g, "evolve", cmd_state_evolve, "exact Schroedinger evolution")
    p.add_argument("--state", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--no-zero-point", action="store_true")
    p = leaf(g, "expect", cmd_state_expect, "operator expectation values")
    p.add_argument("--state", required=True)

    g = groups.add_parser("wigner", help="quasiprobability distribution").add_subparsers(dest="action", required=True)
    p = leaf(g, "eval", cmd_wigner_eval, "f_W at phase-space points")
    p.add_argument("--state", required=True)
    p.add_argument("--euler", type=_vec3, required=True)
    p.add_argument("--rho", type=_vec3, action="append", required=True)
    p = leaf(g, "expect", cmd_wigner_expect, "phase-space vs operator expectations")
    p.add_argument("--state", required=True)
    p = leaf(g, "overlap", cmd_wigner_overlap, "overlap identity for two states")
    p.add_argument("--state", required=True)
    p.add_argument("--state2", required=True)
    p = leaf(g, "limit", cmd_wigner_limit, "classical-limit table as CSV")
    p.add_argument("--hbar-list", type=_floats, default=[1.0, 0.5, 0.25, 0.125])
    p.add_argument("--observable", default="rho3")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--c", type=float, default=2.0, help="jmax = ceil(c / hbar)")
    p.add_argument("--subtract-zero-point", action="store_true")

    g = groups.add_parser("coherence", help="Liouville/Schroedinger residuals").add_subparsers(dest="action", required=True)
    p = leaf(g, "scan", cmd_coherence_scan, "residual against |gamma| as CSV")
    p.add_argument("--state", help="state JSON (default: random at --jmax)")
    p.add_argument("--gammas", type=_floats, default=[0.0125, 0.025, 0.05, 0.1, 0.2, 0.4])
    p.add_argument("--points", type=int, default=4)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--defect", type=float, default=0.0,
                   help="evolve with inertia scaled by (1 + defect)")

    g = groups.add_parser("su2", help="T*R^4 -> T*SU(2) reduction").add_subparsers(dest="action", required=True)
    p = leaf(g, "reduce", cmd_su2_reduce, "theta slice of the reduced distribution as CSV")
    p.add_argument("--sigma", type=float, default=0.4)
    p.add_argument("--x0", type=_vec4, default=[0.2, -0.1, 0.3, 0.0])
    p.add_argument("--p0", type=_vec4, default=[0.5, 0.0, -0.3, 0.2])
    p.add_argument("--n-theta", type=int, default=33)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--p-theta", type=float, default=0.0)
    p.add_argument("--p-nu", type=float, default=0.0)
    p.add_argument("--p-eta", type=float, default=0.0)

    g = groups.add_parser("verify", help="invariant suite").add_subparsers(dest="action", required=True)
    p = leaf(g, "all", cmd_verify, "run every suite")
    for name in verify.SUITES:
        leaf(g, name, cmd_verify, f"run the {name} suite")
    return parser


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _write(text: str, cfg: RunConfig) -> None:
    if cfg.output in ("-", ""):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def emit_json(payload: dict, cfg: RunConfig, command: str) -> None:
    doc = {"command": command, "config_hash": cfg.hash()}
    doc.update(payload)
    _write(json.dumps(_jsonable(doc), indent=2) + "\n", cfg)


def emit_csv(columns: Sequence[str], rows, cfg: RunConfig, command: str, meta: Optional[dict] = None) -> None:
    lines = [f"# rigidrotor {command} config_hash={cfg.hash()}"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}={v}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _write("\n".join(lines) + "\n", cfg)


def _load_state(path: str, cfg: RunConfig) -> wf.WaveFunction:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read state {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"state {path} is not JSON: {exc}") from exc
    return wf.WaveFunction.from_json(data.get("state", data))


def _state_doc(psi: wf.WaveFunction) -> dict:
    return {"state": psi.to_json()}


# ---------------------------------------------------------------- commands


def cmd_geometry_check(args, cfg: RunConfig) -> int:
    checks = verify.geometry_suite(cfg, n_points=args.points)
    ok = not any(c.blocking for c in checks)
    emit_json({"points": args.points, "passed": ok, "checks": [c.as_dict() for c in checks]},
              cfg, "geometry check")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dynamics_simulate(args, cfg: RunConfig) -> int:
    I = geo.InertiaTensor(*cfg.inertia)
    if args.every < 1:
        raise UsageError("--every must be >= 1")
    p0 = dyn.PhaseSpacePoint(geo.euler_to_rotation(geo.EulerAngles(*args.euler)), args.rho)
    if args.scheme == "geodesic":
        tr = dyn.integrate_geodesic(p0, I, args.t, args.dt)
    else:
        tr = dyn.integrate(p0, I, args.t, args.dt)
    E, C = tr.energy(I), tr.casimir()
    idx = np.arange(0, len(tr), args.every)
    if idx[-1] != len(tr) - 1:
        idx = np.append(idx, len(tr) - 1)
    cols = ["t", "rho1", "rho2", "rho3", "H", "rho_sq"] + [f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    rows = (np.concatenate([[tr.t[i]], tr.rho[i], [E[i], C[i]], tr.R[i].ravel()]) for i in idx)
    emit_csv(cols, rows, cfg, "dynamics simulate",
             {"scheme": args.scheme, "dt": _fmt(args.dt), "inertia": ",".join(_fmt(x) for x in cfg.inertia)})
    return EXIT_OK


def cmd_state_make(args, cfg: RunConfig) -> int:
    if args.basis is not None:
        j, m, k = args.basis
        psi = wf.WaveFunction.basis(j, m, k, cfg.hbar, jmax=max(j, 0))
    else:
        psi = wf.WaveFunction.random(np.random.default_rng(cfg.seed), cfg.jmax, cfg.hbar)
    emit_json(_state_doc(psi), cfg, "state make")
    return EXIT_OK


def cmd_state_evolve(args, cfg: RunConfig) -> int:
    psi = _load_state(args.state, cfg)
    out = wf.schrodinger_evolve(psi, geo.InertiaTensor(*cfg.inertia), args.t, not args.no_zero_point)
    emit_json({"t": args.t, **_state_doc(out)}, cfg, "state evolve")
    return EXIT_OK


def cmd_state_expect(args, cfg: RunConfig) -> int:
    psi = _load_state(args.state, cfg)
    I = geo.InertiaTensor(*cfg.inertia)
    payload = {
        "norm2": psi.norm2(),
        "L": [wf.expectation_Lk(psi, k) for k in (1, 2, 3)],
        "L2": [wf.expectation_Lk2(psi, k) for k in (1, 2, 3)],
        "H": wf.hamiltonian(I, psi.hbar, True, psi.jmax).expectation(psi),
        "H_without_zero_point": wf.hamiltonian(I, psi.hbar, False, psi.jmax).expectation(psi),
        "zero_point_energy": wf.zero_point_energy(I, psi.hbar),
    }
    emit_json(payload, cfg, "state expect")
    return EXIT_OK


def cmd_wigner_eval(args, cfg: RunConfig) -> int:
    psi = _load_state(args.state, cfg)
    w = dist.WignerDistribution(psi, geo.ball_grid(*cfg.gamma_grid))
    R = geo.euler_to_rotation(geo.EulerAngles(*args.euler))
    rho = np.array(args.rho, dtype=float)
    re, im = w.evaluate(R, rho)
    points = [{"rho": r, "value": a, "imag_residue": b} for r, a, b in zip(rho, np.atleast_1d(re), np.atleast_1d(im))]
    emit_json({"euler": args.euler, "points": points}, cfg, "wigner eval")
    return EXIT_OK


def cmd_wigner_expect(args, cfg: RunConfig) -> int:
    psi = _load_state(args.state, cfg)
    I = geo.InertiaTensor(*cfg.inertia)
    tol = cfg.tolerances["expectation"]
    mom = dist.phase_space_moments(psi)
    rho = [dist.expect_rho(psi, k, mom) for k in (1, 2, 3)]
    rho2 = [dist.expect_rho2(psi, k, mom) for k in (1, 2, 3)]
    H = dist.expect_H(psi, I, mom)
    # gaps are compared in units of hbar, hbar^2 and relative to H respectively
    worst = max(max(r.gap for r in rho) / psi.hbar, max(r.gap for r in rho2) / psi.hbar**2,
                H.gap / max(1.0, abs(H.operator)))
    payload = {
        "norm": mom.norm,
        "window_sigma": mom.sigma,
        "rho": [r.as_dict() for r in rho],
        "rho2": [r.as_dict() for r in rho2],
        "H": H.as_dict(),
        "zero_point_energy": wf.zero_point_energy(I, psi.hbar),
        "tolerance": tol,
        "worst_scaled_gap": worst,
        "passed": worst <= tol,
    }
    emit_json(payload, cfg, "wigner expect")
    return EXIT_OK if worst <= tol else EXIT_FAIL


def cmd_wigner_overlap(args, cfg: RunConfig) -> int:
    a, b = _load_state(args.state, cfg), _load_state(args.state2, cfg)
    rep = dist.overlap(a, b, resolution=tuple(cfg.gamma_grid))
    tol = cfg.tolerances.get("overlap", 1e-3)
    payload = {**rep.as_dict(), "tolerance": tol, "passed": rep.relative <= tol}
    emit_json(payload, cfg, "wigner overlap")
    return EXIT_OK if rep.relative <= tol else EXIT_FAIL


def cmd_wigner_limit(args, cfg: RunConfig) -> int:
    a = dist.reference_action_wave(args.amplitude)
    I = geo.InertiaTensor(*cfg.inertia)

    def one(hbar):
        return dist.classical_limit_gap(a, [hbar], args.observable, c=args.c, inertia=I,
                                        subtract_zero_point=args.subtract_zero_point)[0]

    rows = ordered_map(one, args.hbar_list)
    emit_csv(["hbar", "jmax", "truncation_loss", "quantum", "classical", "gap"],
             ([r.hbar, r.jmax, r.truncation_loss, r.quantum, r.classical, r.gap] for r in rows),
             cfg, "wigner limit",
             {"observable": args.observable, "amplitude": _fmt(args.amplitude),
              "subtract_zero_point": str(args.subtract_zero_point).lower()})
    return EXIT_OK


def cmd_coherence_scan(args, cfg: RunConfig) -> int:
    if args.state:
        psi = _load_state(args.state, cfg)
    else:
        psi = wf.WaveFunction.random(np.random.default_rng(cfg.seed), cfg.jmax, cfg.hbar)
    I = geo.InertiaTensor(*cfg.inertia)
    I_ev = geo.InertiaTensor(*(np.asarray(cfg.inertia) * (1 + args.defect)))

    def one(gam):
        # same seed per |gamma| so every row samples the same (R, direction) pairs
        return coh.scan(psi, I, [gam], np.random.default_rng(cfg.seed + 1), args.points, args.dt, I_ev)[0]

    rows = ordered_map(one, args.gammas)
    emit_csv(["gamma", "max_abs", "mean_abs", "samples"],
             ([r.gamma, r.max_abs, r.mean_abs, r.samples] for r in rows),
             cfg, "coherence scan", {"defect": _fmt(args.defect), "dt": _fmt(args.dt)})
    return EXIT_OK


def cmd_su2_reduce(args, cfg: RunConfig) -> int:
    st = su2.GaussianState(args.sigma, X0=args.x0, P0=args.p0, hbar=cfg.hbar)
    x, _ = np.polynomial.legendre.leggauss(args.n_theta)
    theta = 0.5 * np.pi * (x + 1)
    chunks = np.array_split(theta, max(1, min(len(theta), 8)))

    def one(th):
        return su2.reduced_density(st, th, args.nu, args.eta, args.p_theta, args.p_nu, args.p_eta)

    vals = np.concatenate(ordered_map(one, chunks))
    rows = ([t, args.nu, args.eta, args.p_theta, args.p_nu, args.p_eta, v] for t, v in zip(theta, vals))
    emit_csv(["theta", "nu", "eta", "p_theta", "p_nu", "p_eta", "f_su2"], rows, cfg, "su2 reduce",
             {"sigma": _fmt(args.sigma), "x0": ",".join(_fmt(v) for v in args.x0),
              "p0": ",".join(_fmt(v) for v in args.p0)})
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    names = list(verify.SUITES) if args.action == "all" else [args.action]
    results = ordered_map(lambda n: verify.SUITES[n](cfg), names)
    suites = {}
    failed = 0
    for name, checks in zip(names, results):
        bad = sum(c.blocking for c in checks)
        failed += bad
        suites[name] = {"passed": sum(c.passed for c in checks), "failed": bad, "total": len(checks),
                        "checks": [c.as_dict() for c in checks]}
    emit_json({"passed": failed == 0, "suites": suites}, cfg, f"verify {args.action}")
    return EXIT_OK if failed == 0 else EXIT_FAIL


# ---------------------------------------------------------------- entry point


_CONFIG_KEYS = ("hbar", "inertia", "jmax", "gamma_grid", "seed", "output")


def resolve_config(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
    return RunConfig.load(getattr(args, "config", None), overrides)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "show_config", False):
        print(json.dumps({"config_hash": cfg.hash(), **cfg.to_dict()}, indent=2))
        return EXIT_OK
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RotorError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
