"""Design-study computations behind the command-line tool."""
from dataclasses import dataclass, field

import numpy as np

from .dynamics import RobotModel, RobotState, dissipative_eom, limb_jacobian
from .errors import LockedTransmission
from .metrics import (
    _check_rank,
    _unit,
    directional_inertia,
    gie,
    impact_mitigation_factor,
    inertia_ellipsoids,
    model_force_capabilities,
)
from .modes import DriveMode
from .topology import EfficiencyAssignment, backward_from_forward

SWEEP_COLUMNS = ("eta_f", "eta_b", "ffc_ratio", "bfc_ratio", "xi", "lambda_gie", "lambda_fgie",
                 "lambda_bgie", "locked")


def model_assignment(model: RobotModel, mode=None, eta_f=None):
    """Efficiencies of ``model`` (or a common ``eta_f``), all-ideal for mode 'ideal'."""
    m = model.m
    if mode is not None and DriveMode.parse(mode) is DriveMode.IDEAL:
        return EfficiencyAssignment.ideal(m)
    if eta_f is None:
        eta = np.array([t.forward_efficiency for t in model.transmissions])
    else:
        eta = np.broadcast_to(np.asarray(eta_f, dtype=float), (m,)).copy()
    reductions = [t.reduction for t in model.transmissions]
    eta_b = np.array([backward_from_forward(e, g) for e, g in zip(eta, reductions)])
    return EfficiencyAssignment(modes=(DriveMode.BACKWARD,) * m, eta_f=eta, eta_b=eta_b)


def unit_directions(count=360):
    return directions_from_degrees(360.0 * np.arange(count) / count)


def directions_from_degrees(angles):
    t = np.radians(np.asarray(angles, dtype=float))
    d = np.column_stack([np.cos(t), np.sin(t)])
    d[np.abs(d) < 1e-15] = 0.0
    return d


@dataclass
class Analysis:
    ellipsoids: object
    polytopes: dict
    imf: list
    assignment: EfficiencyAssignment
    directions: np.ndarray = field(default=None)


def analyze(model: RobotModel, state: RobotState, mode=None, directions=None) -> Analysis:
    """Inertia ellipsoids, force polytopes and IMF at one configuration.

    Raises SingularJacobian at a kinematic singularity of the limb.
    """
    _check_rank(limb_jacobian(model, state), "limb Jacobian")
    assign = model_assignment(model, mode)
    ell = inertia_ellipsoids(model, state, assign)
    fc, ffc, bfc = model_force_capabilities(model, state, assign, sweep=True)
    polys = {"FC": fc, "FFC": ffc, "BFC": bfc}
    if mode is not None and DriveMode.parse(mode) is DriveMode.FORWARD:
        polys.pop("BFC")
    elif mode is not None and DriveMode.parse(mode) is DriveMode.BACKWARD:
        polys.pop("FFC")
    dirs = directions_from_degrees([0.0, 90.0]) if directions is None else np.atleast_2d(directions)
    imf = []
    if model.nb:
        try:
            imf = [impact_mitigation_factor(model, state, assign, n) for n in dirs]
        except LockedTransmission:
            imf = []
    return Analysis(ellipsoids=ell, polytopes=polys, imf=imf, assignment=assign, directions=dirs)


def sweep_row(model: RobotModel, state: RobotState, eta_f, direction=(0.0, 1.0)):
    """One sample of the efficiency sweep with both joints at ``eta_f``."""
    n = _unit(direction)
    assign = model_assignment(model, eta_f=eta_f)
    eta_b = float(assign.eta_b[0])
    fc, ffc, bfc = model_force_capabilities(model, state, assign, sweep=True)
    ffc_ratio = ffc.normalized_extent(n)
    locked = bool(np.any(assign.eta_b == 0.0))
    ideal = dissipative_eom(model, state, EfficiencyAssignment.ideal(model.m), gravity=False)
    lam_gie = gie(ideal).apparent_mass(n)
    if locked:
        bfc_ratio, xi, lam_f, lam_b = np.inf, np.nan, np.nan, np.inf
    else:
        bfc_ratio = bfc.normalized_extent(n)
        ell = inertia_ellipsoids(model, state, assign)
        lam_f = directional_inertia(ell.fgie.symmetric_part, n)
        lam_b = ell.bgie.apparent_mass(n)
        xi = impact_mitigation_factor(model, state, assign, n).xi if model.nb else np.nan
    return {"eta_f": float(eta_f), "eta_b": eta_b, "ffc_ratio": ffc_ratio, "bfc_ratio": bfc_ratio,
            "xi": xi, "lambda_gie": lam_gie, "lambda_fgie": lam_f, "lambda_bgie": lam_b,
            "locked": int(locked)}


def efficiency_sweep(model: RobotModel, state: RobotState, eta_min=0.55, eta_max=1.0, steps=50,
                     direction=(0.0, 1.0)):
    if not 0 < eta_min < eta_max <= 1:
        raise ValueError("need 0 < eta_min < eta_max <= 1")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    etas = np.linspace(eta_min, eta_max, steps)
    return [sweep_row(model, state, e, direction) for e in etas]


def sweep_failures(rows, tol=1e-9):
    """Regression checks on a sweep sorted by increasing ``eta_f``.

    Returns a list of messages; empty when every trend holds.
    """
    out = []
    live = [r for r in rows if not r["locked"]]
    for r in rows:
        if abs(r["ffc_ratio"] - r["eta_f"]) > tol:
            out.append(f"FFC ratio {r['ffc_ratio']:.12g} differs from eta_f {r['eta_f']:.12g}")
    for a, b in zip(live, live[1:]):
        if not b["bfc_ratio"] < a["bfc_ratio"]:
            out.append(f"BFC ratio not increasing as eta_f drops from {b['eta_f']:.6g} to {a['eta_f']:.6g}")
        if not b["xi"] > a["xi"]:
            out.append(f"IMF not decreasing as eta_f drops from {b['eta_f']:.6g} to {a['eta_f']:.6g}")
    for r in live:
        if not 0.0 <= r["xi"] <= 1.0:
            out.append(f"IMF {r['xi']:.6g} outside [0, 1] at eta_f = {r['eta_f']:.6g}")
    return out
