"""Command-line entry point: ``effdyn wedge|analyze|sweep|leg-study``.

Exit codes: 0 success, 2 bad input (flags or robot file), 3 non-backdrivable
transmission, 4 kinematic singularity, 5 sweep trend regression.
"""
import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from . import svg
from .errors import (
    EffdynError,
    LockedTransmission,
    NonBackdrivable,
    NoSlip,
    ParseError,
    SingularJacobian,
    StiffnessFailure,
)
from .modes import DriveMode
from .oracle import OracleConfig, measured_efficiency, simulate_wedge
from .metrics import directional_inertia
from .robotfile import load_any
from .study import SWEEP_COLUMNS, analyze, efficiency_sweep, sweep_failures, unit_directions
from .wedge import (
    WedgeForces,
    WedgeParams,
    backward_efficiency,
    forward_efficiency,
    impedance_coefficient,
    reduced_acceleration,
)

EXIT_OK, EXIT_INPUT, EXIT_LOCKED, EXIT_SINGULAR, EXIT_TREND = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _num(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else _num(c) for c in row])
    return buf.getvalue()


class _Sink:
    """Writes tables/plots into ``--out`` or echoes CSV to stdout."""

    def __init__(self, out, fmt):
        self.out = out
        self.csv = fmt in ("csv", "both")
        self.svg = fmt in ("svg", "both") and out is not None
        if out is not None:
            os.makedirs(out, exist_ok=True)

    def table(self, name, header, rows):
        if not self.csv:
            return
        text = _csv_text(header, rows)
        if self.out is None:
            print(f"# {name}.csv")
            print(text, end="")
        else:
            with open(os.path.join(self.out, f"{name}.csv"), "w", newline="") as fh:
                fh.write(text)

    def plot(self, name, text):
        if self.svg:
            with open(os.path.join(self.out, f"{name}.svg"), "w") as fh:
                fh.write(text)


# ---------------------------------------------------------------------------
# wedge


def _mode_forces(mode, fx, fu):
    """User forces, defaulting to a unit push on the driving body of ``mode``."""
    if mode is DriveMode.BACKWARD:
        return WedgeForces(f_x=1.0 if fx is None else fx, f_u=0.0 if fu is None else fu)
    return WedgeForces(f_x=0.0 if fx is None else fx, f_u=1.0 if fu is None else fu)


def _verify_wedge(p, mode, fx, fu):
    """Oracle-vs-closed-form residuals for one mode; None if the oracle sticks."""
    f = _mode_forces(mode, fx, fu)
    want_slip = 1 if mode is DriveMode.BACKWARD else -1
    traj = simulate_wedge(p, f, OracleConfig(h=1e-5, duration=0.02))
    if not np.all(traj.slip == want_slip):
        return None
    a_ref = reduced_acceleration(p, f, mode)
    a_res = abs(traj.measured_acceleration() - a_ref) / max(abs(a_ref), 1e-300)
    eta_ref = forward_efficiency(p) if mode is DriveMode.FORWARD else backward_efficiency(p)
    try:
        e_res = abs(measured_efficiency(traj) - eta_ref)
    except NoSlip:
        e_res = math.nan
    return a_res, e_res


def cmd_wedge(args):
    p = WedgeParams(block_mass=args.block_mass, wedge_mass=args.wedge_mass,
                    slope_angle=math.radians(args.alpha), friction_coeff=args.mu)
    modes = [DriveMode.parse(args.mode)] if args.mode else [DriveMode.FORWARD, DriveMode.BACKWARD]
    eta_f = forward_efficiency(p)
    try:
        eta_b = backward_efficiency(p)
    except NonBackdrivable:
        eta_b = None
    if eta_b is None or eta_b == 0.0:
        if DriveMode.BACKWARD in modes and args.mode:
            print(f"non-backdrivable: mu*tan(alpha) = {p.mu_tan:.6g} >= 1", file=sys.stderr)
            return EXIT_LOCKED
    print(f"eta_f = {eta_f:.12g}")
    print(f"eta_b = {eta_b:.12g}" if eta_b is not None else "eta_b = 0 (non-backdrivable)")
    rows = []
    for mode in modes:
        if mode is DriveMode.BACKWARD and not eta_b:
            print("backward: non-backdrivable")
            continue
        f = _mode_forces(mode, args.fx, args.fu)
        acc = reduced_acceleration(p, f, mode)
        imp = impedance_coefficient(p, mode)
        print(f"{mode.value}: f_x = {f.f_x:.6g}, f_u = {f.f_u:.6g}, xdd = {acc:.12g} m/s^2, "
              f"impedance = {imp:.12g} kg")
        line = [mode.value, f.f_x, f.f_u, acc, imp]
        if args.verify and mode is not DriveMode.IDEAL:
            res = _verify_wedge(p, mode, args.fx, args.fu)
            if res is None:
                print(f"{mode.value}: oracle did not slide in this mode")
                line += [math.nan, math.nan]
            else:
                print(f"{mode.value}: oracle residual acceleration = {res[0]:.3e}, "
                      f"efficiency = {res[1]:.3e}")
                line += list(res)
        rows.append(line)
    if args.out:
        header = ["mode", "f_x", "f_u", "xdd", "impedance"] + (["accel_residual", "eta_residual"] if args.verify else [])
        _Sink(args.out, "csv").table("wedge", header, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze / sweep


def _emit_analysis(desc, a, sink):
    e = a.ellipsoids
    rows = [[name] + list(np.ravel(ell.matrix)) for name, ell in
            (("GIE", e.gie), ("FGIE", e.fgie), ("BGIE", e.bgie))]
    sink.table("inertia_matrices", ["ellipsoid", "a11", "a12", "a21", "a22"], rows)
    dirs = unit_directions(72)
    rows = []
    for n in dirs:
        ang = math.degrees(math.atan2(n[1], n[0]))
        rows.append([ang, e.gie.apparent_mass(n), directional_inertia(e.fgie.symmetric_part, n),
                     e.bgie.apparent_mass(n)])
    sink.table("inertia_directional", ["angle_deg", "gie", "fgie_sym", "bgie"], rows)
    rows = []
    for name, poly in a.polytopes.items():
        for i, v in enumerate(poly.hull_vertices()):
            rows.append([name, i, v[0], v[1]])
    sink.table("force_polytopes", ["polytope", "vertex", "f_x", "f_z"], rows)
    rows = [[math.degrees(math.atan2(r.direction[1], r.direction[0])), r.direction[0],
             r.direction[1], r.xi, r.locked_inertia, r.backdriven_inertia] for r in a.imf]
    sink.table("imf", ["angle_deg", "n_x", "n_z", "xi", "locked_inertia", "backdriven_inertia"], rows)
    sink.plot("ellipses", svg.ellipses_svg(
        [("GIE", e.gie.matrix), ("FGIE (sym)", e.fgie.symmetric_part), ("BGIE", e.bgie.matrix)],
        title=f"{desc.name}: inertia ellipses"))
    sink.plot("force_polytopes", svg.polygons_svg(
        [(n, p.hull_vertices()) for n, p in a.polytopes.items()],
        title=f"{desc.name}: force capability"))
    ideal = "ideal" if a.assignment.modes[0] is DriveMode.IDEAL else "lossy"
    print(f"{desc.name}: analysed ({ideal} transmissions)")
    for r in a.imf:
        print(f"  IMF along ({r.direction[0]:.3g}, {r.direction[1]:.3g}) = {r.xi:.6g}")


def _parse_direction(text):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"direction must be 'x,z', got {text!r}") from None
    if len(parts) != 2 or not all(math.isfinite(v) for v in parts) or parts == [0.0, 0.0]:
        raise argparse.ArgumentTypeError(f"direction must be a non-zero 'x,z' pair, got {text!r}")
    return np.array(parts)


def cmd_analyze(args):
    desc = load_any(args.file)
    dirs = np.array(args.direction) if args.direction else None
    a = analyze(desc.model, desc.state, args.mode, dirs)
    _emit_analysis(desc, a, _Sink(args.out, args.format))
    return EXIT_OK


def _emit_sweep(desc, rows, sink):
    sink.table("sweep", list(SWEEP_COLUMNS), [[r[c] for c in SWEEP_COLUMNS] for r in rows])
    eta = [r["eta_f"] for r in rows]
    sink.plot("sweep_capability", svg.lines_svg(
        eta, [("FFC/FC", [r["ffc_ratio"] for r in rows]), ("BFC/FC", [r["bfc_ratio"] for r in rows])],
        title=f"{desc.name}: force capability ratio vs eta_f", log_y=True))
    sink.plot("sweep_imf", svg.lines_svg(eta, [("IMF", [r["xi"] for r in rows])],
                                         title=f"{desc.name}: IMF vs eta_f"))


def cmd_sweep(args):
    desc = load_any(args.file)
    rows = efficiency_sweep(desc.model, desc.state, args.eta_min, args.eta_max, args.steps,
                            args.sweep_direction)
    _emit_sweep(desc, rows, _Sink(args.out, args.format))
    fails = sweep_failures(rows)
    for msg in fails:
        print(f"trend check failed: {msg}", file=sys.stderr)
    return EXIT_TREND if fails else EXIT_OK


def cmd_leg_study(args):
    desc = load_any("leg2dof")
    sink = _Sink(args.out, args.format)
    _emit_analysis(desc, analyze(desc.model, desc.state, args.mode), sink)
    rows = efficiency_sweep(desc.model, desc.state, args.eta_min, args.eta_max, args.steps,
                            args.sweep_direction)
    _emit_sweep(desc, rows, sink)
    fails = sweep_failures(rows)
    for msg in fails:
        print(f"trend check failed: {msg}", file=sys.stderr)
    return EXIT_TREND if fails else EXIT_OK


# ---------------------------------------------------------------------------


def _output_flags(p):
    p.add_argument("--out", help="output directory (CSV goes to stdout when omitted)")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="both")


def _sweep_flags(p):
    p.add_argument("--eta-min", type=float, default=0.55)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--sweep-direction", type=_parse_direction, default=np.array([0.0, 1.0]),
                   metavar="X,Z", help="task direction for ratios and IMF (default 0,1)")


def build_parser():
    parser = _Parser(prog="effdyn", description="Efficiency-aware dynamics design studies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("wedge", help="wedge-block transmission report")
    w.add_argument("--mu", type=float, required=True, help="friction coefficient")
    w.add_argument("--alpha", type=float, required=True, help="slope angle in degrees")
    w.add_argument("--block-mass", type=float, default=1.0)
    w.add_argument("--wedge-mass", type=float, default=1.0)
    w.add_argument("--fx", type=float, help="force on the block")
    w.add_argument("--fu", type=float, help="force pushing the wedge")
    w.add_argument("--mode", choices=[m.value for m in DriveMode])
    w.add_argument("--verify", action="store_true", help="cross-check with the time-stepping oracle")
    w.add_argument("--out")
    w.set_defaults(func=cmd_wedge)

    a = sub.add_parser("analyze", help="metrics at the configuration in a robot file")
    a.add_argument("file", help="robot JSON file or preset name")
    a.add_argument("--mode", choices=[m.value for m in DriveMode])
    a.add_argument("--direction", type=_parse_direction, action="append", metavar="X,Z",
                   help="IMF direction (repeatable; default 1,0 and 0,1)")
    _output_flags(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="forward-efficiency sweep")
    s.add_argument("file", help="robot JSON file or preset name")
    _sweep_flags(s)
    _output_flags(s)
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("leg-study", help="analysis plus sweep of the bundled two-joint leg")
    g.add_argument("--mode", choices=[m.value for m in DriveMode])
    _sweep_flags(g)
    _output_flags(g)
    g.set_defaults(func=cmd_leg_study)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NonBackdrivable, LockedTransmission) as exc:
        print(f"non-backdrivable: {exc}", file=sys.stderr)
        return EXIT_LOCKED
    except SingularJacobian as exc:
        print(f"singular: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ValueError, StiffnessFailure, EffdynError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
