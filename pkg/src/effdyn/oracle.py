"""Brute-force time-stepping oracles.

These simulations never use the efficiency-weighted projection. They solve
the constrained equations of motion directly, with the contact multiplier as
an unknown and Coulomb friction acting on the meshing surface, so they can
certify the closed forms in :mod:`effdyn.wedge` and :mod:`effdyn.dynamics`.
"""
import csv
from dataclasses import dataclass
from itertools import product
import math
from typing import Callable, Optional
import warnings

import numpy as np

from .dynamics import (
    RobotModel,
    RobotState,
    bias_forces,
    dissipative_eom,
    kinetic_energy,
    potential_energy,
    redundant_mass_matrix,
    rotor_mesh_power,
)
from .errors import ModeViolation, NoSlip, StiffnessFailure
from .modes import DriveMode
from .topology import (
    EfficiencyAssignment,
    constraint_jacobian,
    constraint_nullspace,
    constraint_residual,
)
from .wedge import WedgeForces, WedgeParams, forward_efficiency

SEMI_IMPLICIT_EULER = "semi-implicit-euler"
RK4 = "rk4"

STICK, SLIDE_NEG, SLIDE_POS = 0, -1, 1


@dataclass(frozen=True)
class OracleConfig:
    h: float = 1e-5
    duration: float = 1.0
    stick_threshold: float = 1e-7
    integrator: str = SEMI_IMPLICIT_EULER

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("time step must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.stick_threshold > 0:
            raise ValueError("stick threshold must be positive")
        if self.integrator not in (SEMI_IMPLICIT_EULER, RK4):
            raise ValueError(f"unknown integrator {self.integrator!r}")

    @property
    def steps(self):
        return int(round(self.duration / self.h))


def _write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# wedge-block


@dataclass
class WedgeTrajectory:
    """Per-step record; forces and rates are sampled at the start of each step."""

    params: WedgeParams
    forces: WedgeForces
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    xd: np.ndarray
    ud: np.ndarray
    xdd: np.ndarray
    udd: np.ndarray
    lam: np.ndarray
    friction: np.ndarray       # tangential friction force on the wedge face
    r_x: np.ndarray            # generalized meshing force, block row
    r_u: np.ndarray            # generalized meshing force, wedge row
    slip: np.ndarray           # -1 / +1 sliding direction of u, 0 stuck
    dW: np.ndarray             # meshing work along the unscaled tangent motion
    dZ: np.ndarray             # relative efficiency-null residual
    residual: np.ndarray       # constraint residual after projection

    def final_velocity(self):
        return self.xd[-1] + self.h * self.xdd[-1]

    @property
    def h(self):
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def measured_acceleration(self):
        """Mean block acceleration from the velocity change over the run."""
        T = self.t[-1] + self.h - self.t[0]
        return (self.final_velocity() - self.xd[0]) / T

    def displacement(self):
        return self.x[-1] - self.x[0]

    def to_csv(self, path):
        names = ["t", "x", "u", "xd", "ud", "xdd", "udd", "lam", "friction", "r_x", "r_u",
                 "slip", "dW", "dZ", "residual"]
        _write_csv(path, names, [getattr(self, n) for n in names])


def _wedge_accel(p: WedgeParams, f: WedgeForces, sigma):
    """Solve the sliding DAE for (xdd, udd, lam) with friction opposing slip ``sigma``."""
    c, s = math.cos(p.slope_angle), math.sin(p.slope_angle)
    mu = p.friction_coeff
    # M xdd + lam = f_x ; m udd - (c - sigma mu s) lam = -f_u ; -xdd + c udd = 0
    A = np.array([
        [p.block_mass, 0.0, 1.0],
        [0.0, p.wedge_mass, -(c - sigma * mu * s)],
        [-1.0, c, 0.0],
    ])
    b = np.array([f.f_x, -f.f_u, 0.0])
    xdd, udd, lam = np.linalg.solve(A, b)
    return xdd, udd, lam


def _wedge_static(p: WedgeParams, f: WedgeForces):
    """Contact force and required tangential friction for the system at rest."""
    c, s = math.cos(p.slope_angle), math.sin(p.slope_angle)
    lam = f.f_x
    friction = (f.f_u - c * lam) / s
    return lam, friction


def _wedge_contact(p, f, ud, eps):
    """Return (xdd, udd, lam, friction, slip)."""
    mu = p.friction_coeff
    if abs(ud) >= eps:
        sigma = 1.0 if ud > 0 else -1.0
        xdd, udd, lam = _wedge_accel(p, f, sigma)
        return xdd, udd, lam, -sigma * mu * abs(lam), int(sigma)
    lam, need = _wedge_static(p, f)
    if lam >= 0 and abs(need) <= mu * lam * (1 + 1e-12):
        return 0.0, 0.0, lam, need, STICK
    for sigma in (1.0, -1.0):
        xdd, udd, lam = _wedge_accel(p, f, sigma)
        if udd * sigma > 0:
            return xdd, udd, lam, -sigma * mu * abs(lam), int(sigma)
    # no consistent sliding direction: hold
    return 0.0, 0.0, lam, need, STICK


def _wedge_mode_weight(p, slip):
    if slip == SLIDE_NEG:
        return forward_efficiency(p)
    if slip == SLIDE_POS:
        k = p.mu_tan
        return 1.0 / (1.0 - k) if k < 1.0 else math.nan
    return 1.0


def simulate_wedge(p: WedgeParams, f: WedgeForces, cfg: OracleConfig = OracleConfig(),
                   x0=0.0, xd0=0.0) -> WedgeTrajectory:
    """Integrate the wedge-block DAE with exact Coulomb friction and stick detection.

    The initial state is placed on the constraint (``u = x / cos(alpha)``).
    """
    c = math.cos(p.slope_angle)
    eps = cfg.stick_threshold
    n = cfg.steps
    K = np.array([1.0, 1.0 / c])
    Amat = np.array([-1.0, c])
    AA = Amat @ Amat
    out = {k: np.empty(n) for k in ("t", "x", "u", "xd", "ud", "xdd", "udd", "lam", "friction",
                                     "r_x", "r_u", "slip", "dW", "dZ", "residual")}
    x, xd = float(x0), float(xd0)
    u, ud = x / c, xd / c
    h = cfg.h

    def project(a, b):
        g = -a + c * b
        return a + g / AA, b - c * g / AA

    for k in range(n):
        xdd, udd, lam, fr, slip = _wedge_contact(p, f, ud, eps)
        if lam < -1e-9 * max(1.0, abs(f.f_x), abs(f.f_u)):
            raise StiffnessFailure(f"contact force became tensile (lambda = {lam:.3g}) at t = {k * h:.6g}")
        if slip == STICK:
            xd = ud = 0.0
        r_x = p.block_mass * xdd - f.f_x
        r_u = p.wedge_mass * udd + f.f_u
        out["t"][k] = k * h
        out["x"][k], out["u"][k], out["xd"][k], out["ud"][k] = x, u, xd, ud
        out["xdd"][k], out["udd"][k], out["lam"][k], out["friction"][k] = xdd, udd, lam, fr
        out["r_x"][k], out["r_u"][k], out["slip"][k] = r_x, r_u, slip

        xd_new = xd + h * xdd
        ud_new = ud + h * udd
        if slip != STICK and ud_new * slip < 0:
            # slip reversed inside the step: arrest at zero velocity and stay put
            xd_new = ud_new = 0.0
            x_new, u_new = x, u
        elif cfg.integrator == RK4 and slip != STICK:
            # accelerations are constant while the slip direction is fixed
            x_new = x + h * xd + 0.5 * h * h * xdd
            u_new = u + h * ud + 0.5 * h * h * udd
        else:
            x_new = x + h * xd_new
            u_new = u + h * ud_new
        dx = x_new - x
        x, u = project(x_new, u_new)
        xd, ud = project(xd_new, ud_new)

        # meshing work and efficiency null along the tangent motion K dx
        dW = dx * (K @ [r_x, r_u])
        eta = _wedge_mode_weight(p, slip)
        dZ_abs = dx * (r_x + eta * r_u / c)
        scale = abs(dx) * (abs(r_x) + abs(eta * r_u / c))
        out["dW"][k] = dW
        out["dZ"][k] = dZ_abs / scale if scale > 0 else 0.0
        out["residual"][k] = abs(-x + c * u)

    return WedgeTrajectory(params=p, forces=f, **out)


def measured_efficiency(traj: WedgeTrajectory, window=None) -> float:
    """Output over input power of the meshing contact, averaged over ``window``.

    ``window`` is a slice of step indices (default: the whole run).
    """
    sl = slice(None) if window is None else window
    slip = traj.slip[sl]
    if slip.size == 0 or np.any(slip == STICK):
        raise NoSlip("window contains sticking steps")
    if np.any(slip != slip[0]):
        raise NoSlip("slip direction changes inside the window")
    p_block = traj.r_x[sl] * traj.xd[sl]   # power the mesh delivers to the block
    p_wedge = traj.r_u[sl] * traj.ud[sl]   # power the mesh delivers to the wedge
    both = np.vstack([p_block, p_wedge])
    out_power = np.sum(np.clip(both, 0, None))
    in_power = -np.sum(np.clip(both, None, 0))
    if not in_power > 0:
        raise NoSlip("no power flows through the contact")
    return float(out_power / in_power)


# ---------------------------------------------------------------------------
# robot with lossy meshes (redundant coordinates, explicit multipliers)


@dataclass(frozen=True)
class MeshFriction:
    """Directional Coulomb coefficients of each gear mesh.

    The friction torque on rotor j has magnitude ``kappa * |rho_j|`` where
    ``rho_j`` is the rotor-side mesh torque. ``kappa_f = 1/eta_f - 1`` when the
    rotor drives and ``kappa_b = 1 - eta_b`` when it is back-driven.
    """

    kappa_f: np.ndarray
    kappa_b: np.ndarray

    @classmethod
    def from_efficiencies(cls, eta_f, eta_b):
        eta_f = np.asarray(eta_f, dtype=float)
        eta_b = np.asarray(eta_b, dtype=float)
        return cls(kappa_f=1.0 / eta_f - 1.0, kappa_b=1.0 - eta_b)

    @classmethod
    def from_assignment(cls, assign: EfficiencyAssignment):
        return cls.from_efficiencies(assign.eta_f, assign.eta_b)

    @property
    def eta_f(self):
        return 1.0 / (1.0 + self.kappa_f)

    @property
    def eta_b(self):
        return 1.0 - self.kappa_b


_FWD, _BWD, _STUCK = "F", "B", "S"


@dataclass
class RobotTrajectory:
    t: np.ndarray
    s: np.ndarray
    ds: np.ndarray
    sdd: np.ndarray
    lam: np.ndarray
    mesh_torque: np.ndarray      # rotor-side mesh torque rho
    friction: np.ndarray
    modes: list                  # per-step tuple of 'F' / 'B' / 'S'
    dW: np.ndarray
    dZ: np.ndarray
    residual: np.ndarray
    foot_velocity: np.ndarray
    consistent: np.ndarray       # False where no friction pattern was consistent

    def to_csv(self, path):
        cols = [self.t]
        header = ["t"]
        for name in ("s", "ds", "lam", "friction"):
            arr = getattr(self, name)
            for j in range(arr.shape[1]):
                header.append(f"{name}{j}")
                cols.append(arr[:, j])
        header += ["dW", "dZ", "residual"]
        cols += [self.dW, self.dZ, self.residual]
        _write_csv(path, header, cols)


def _contact_forces_s(model, s, f_ext):
    J = model.kinematics.foot.jacobian(s)
    return J.T @ np.asarray(f_ext, dtype=float)


def _solve_mesh_pattern(M, rhs, A, DG, nb, m, pattern, friction, dphi, eps):
    """Solve the constrained dynamics for one assumed pattern of mesh states.

    Returns (sdd, lam, rho, fd, violation).
    """
    n = M.shape[0]
    stuck = [j for j, p in enumerate(pattern) if p == _STUCK]
    ns = len(stuck)
    nu = np.zeros(m)
    for j, p in enumerate(pattern):
        if p == _FWD:
            nu[j] = -friction.kappa_f[j]
        elif p == _BWD:
            nu[j] = friction.kappa_b[j]
    # friction on rotor rows: nu_j * rho_j, rho = DG^T lam
    P = np.zeros((n, m))
    P[nb + m:, :] = np.eye(m)
    B = A.T + P @ np.diag(nu) @ DG.T
    size = n + m + ns
    KKT = np.zeros((size, size))
    KKT[:n, :n] = M
    KKT[:n, n:n + m] = -B
    KKT[n:n + m, :n] = A
    b = np.zeros(size)
    b[:n] = rhs
    for i, j in enumerate(stuck):
        KKT[nb + m + j, n + m + i] = -1.0       # unknown holding torque
        KKT[n + m + i, nb + m + j] = 1.0        # rotor acceleration vanishes
    try:
        sol = np.linalg.solve(KKT, b)
    except np.linalg.LinAlgError:
        return None
    sdd, lam = sol[:n], sol[n:n + m]
    rho = DG.T @ lam
    fd = nu * rho
    for i, j in enumerate(stuck):
        fd[j] = sol[n + m + i]
    violation = 0.0
    scale = np.max(np.abs(rho)) + 1e-300
    for j, p in enumerate(pattern):
        w = dphi[j] if abs(dphi[j]) >= eps else sdd[nb + m + j]
        if p == _FWD:
            violation = max(violation, -rho[j] * w / scale)
        elif p == _BWD:
            violation = max(violation, rho[j] * w / scale)
        else:
            excess = abs(fd[j]) - friction.kappa_b[j] * abs(rho[j])
            violation = max(violation, excess / scale)
    return sdd, lam, rho, fd, violation


def simulate_robot_oracle(model: RobotModel, state0: RobotState, friction: MeshFriction,
                          cfg: OracleConfig, tau_phi: Optional[Callable] = None,
                          f_ext: Optional[Callable] = None, gravity=True) -> RobotTrajectory:
    """Semi-implicit Euler on the redundant coordinates with Lagrange multipliers.

    Each step enumerates forward / backward / stuck states of every mesh,
    solves the KKT system for each pattern and keeps the first one whose
    friction direction agrees with the realised power flow. ``tau_phi`` and
    ``f_ext`` are callables ``(t, state) -> array``.
    """
    nb, m = model.nb, model.m
    A = constraint_jacobian(model.chain, nb)
    DG = model.chain.DG
    DGinv = model.chain.DG_inverse()
    eps = cfg.stick_threshold
    h = cfg.h
    steps = cfg.steps
    n = model.n_redundant

    state = RobotState.from_reduced(model, state0.y, state0.dy)
    s, ds = state.s, state.ds
    rec = {k: [] for k in ("t", "s", "ds", "sdd", "lam", "rho", "fd", "modes", "dW", "dZ",
                           "residual", "vfoot", "ok")}
    prev = None
    all_patterns = list(product((_FWD, _BWD, _STUCK), repeat=m))

    for k in range(steps):
        t = k * h
        st = RobotState.from_redundant(model, s, ds)
        M = redundant_mass_matrix(model, st)
        rhs = -bias_forces(model, st, gravity=gravity)
        if tau_phi is not None:
            rhs[nb + m:] += np.asarray(tau_phi(t, st), dtype=float)
        if f_ext is not None:
            rhs += _contact_forces_s(model, s, f_ext(t, st))
        dphi = ds[nb + m:]
        candidates = []
        if prev is not None:
            candidates.append(prev)
        candidates += [pt for pt in all_patterns if pt != prev]
        best = None
        for pattern in candidates:
            if any(p == _STUCK and abs(dphi[j]) >= eps for j, p in enumerate(pattern)):
                continue
            res = _solve_mesh_pattern(M, rhs, A, DG, nb, m, pattern, friction, dphi, eps)
            if res is None:
                continue
            if best is None or res[4] < best[1][4]:
                best = (pattern, res)
            if res[4] <= 1e-9:
                best = (pattern, res)
                break
        pattern, (sdd, lam, rho, fd, viol) = best
        prev = pattern

        ds_new = ds + h * sdd
        for j, p in enumerate(pattern):
            if p == _STUCK:
                ds_new[nb + m + j] = 0.0
            elif abs(dphi[j]) >= eps and ds_new[nb + m + j] * dphi[j] < 0:
                ds_new[nb + m + j] = 0.0   # slip reversed inside the step
        # velocity projection: rotors follow joints, unless a mesh was arrested
        arrested = [j for j in range(m) if ds_new[nb + m + j] == 0.0 and pattern[j] != _FWD
                    and (pattern[j] == _STUCK or dphi[j] != 0.0)]
        if arrested:
            ds_new[nb:nb + m] = DG @ ds_new[nb + m:]
        else:
            ds_new[nb + m:] = DGinv @ ds_new[nb:nb + m]
        ds_tan = ds_new
        s = s + h * ds_new
        s[nb + m:] = DGinv @ s[nb:nb + m]
        ds = ds_new

        r = A.T @ lam
        r[nb + m:] += fd
        eff = np.ones(n)
        for j, p in enumerate(pattern):
            if p == _FWD:
                eff[nb + m + j] = friction.eta_f[j]
            elif p == _BWD:
                eb = friction.eta_b[j]
                eff[nb + m + j] = 1.0 / eb if eb > 0 else np.nan
        dW = h * float(ds_tan @ r)
        terms = h * ds_tan * eff * r
        scale = np.sum(np.abs(terms))
        dZ = float(np.sum(terms) / scale) if scale > 0 else 0.0
        resid = np.max(np.abs(constraint_residual(s[nb:nb + m], s[nb + m:], model.chain)))

        rec["t"].append(t)
        rec["s"].append(s.copy())
        rec["ds"].append(ds.copy())
        rec["sdd"].append(sdd)
        rec["lam"].append(lam)
        rec["rho"].append(rho)
        rec["fd"].append(fd)
        rec["modes"].append(pattern)
        rec["dW"].append(dW)
        rec["dZ"].append(dZ)
        rec["residual"].append(resid)
        rec["vfoot"].append(model.kinematics.foot.jacobian(s) @ ds)
        rec["ok"].append(viol <= 1e-9)

    return RobotTrajectory(
        t=np.array(rec["t"]), s=np.array(rec["s"]), ds=np.array(rec["ds"]),
        sdd=np.array(rec["sdd"]), lam=np.array(rec["lam"]), mesh_torque=np.array(rec["rho"]),
        friction=np.array(rec["fd"]), modes=rec["modes"], dW=np.array(rec["dW"]),
        dZ=np.array(rec["dZ"]), residual=np.array(rec["residual"]),
        foot_velocity=np.array(rec["vfoot"]), consistent=np.array(rec["ok"]))


def impulse_apparent_mass(model: RobotModel, state: RobotState, direction, eta_f, eta_b,
                          force=10.0, duration=1e-3, h=1e-5):
    """Apparent mass along ``direction`` from a short foot push on the oracle.

    Starts at rest with gravity off and no motor torque, pushes the foot with
    ``force`` along ``direction`` for ``duration`` and returns
    ``(force * duration / dv_along, trajectory)``.
    """
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    rest = RobotState.from_reduced(model, state.y)
    fr = MeshFriction.from_efficiencies(eta_f, eta_b)
    cfg = OracleConfig(h=h, duration=duration)
    traj = simulate_robot_oracle(model, rest, fr, cfg, f_ext=lambda t, st: force * n, gravity=False)
    dv = float(n @ traj.foot_velocity[-1])
    return force * duration / dv, traj


# ---------------------------------------------------------------------------
# reduced model integration


@dataclass
class ReducedTrajectory:
    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    input_work: np.ndarray
    residual: np.ndarray
    mesh_power: np.ndarray
    mode_violations: int

    @property
    def dissipated(self):
        """Energy removed by the transmissions, ``W_in - dT - dV``."""
        return self.input_work - (self.kinetic - self.kinetic[0]) - (self.potential - self.potential[0])

    def to_csv(self, path):
        header = ["t"] + [f"y{j}" for j in range(self.y.shape[1])] + \
                 [f"dy{j}" for j in range(self.dy.shape[1])] + \
                 ["kinetic", "potential", "input_work", "residual"]
        cols = [self.t] + list(self.y.T) + list(self.dy.T) + \
               [self.kinetic, self.potential, self.input_work, self.residual]
        _write_csv(path, header, cols)


def simulate_reduced_robot(model: RobotModel, state0: RobotState, assign: EfficiencyAssignment,
                           cfg: OracleConfig, tau_phi: Optional[Callable] = None,
                           f_ext: Optional[Callable] = None, gravity=True) -> ReducedTrajectory:
    """Integrate ``H(eta) ydd = -c_eta + Jbar^T f_ext + (Dbar Gbar)^-T Ebar tau_act``.

    Rotor coordinates are re-projected from the joints every step. Input work
    (motor plus external) is integrated alongside the state. A
    :class:`ModeViolation` warning is issued when the realised rotor power
    contradicts the assigned mode on more than 1% of steps.
    """
    assign.effective()  # raises LockedTransmission early
    nb, m = model.nb, model.m
    h = cfg.h
    zero_tau = np.zeros(m)

    def loads(t, st):
        tau = zero_tau if tau_phi is None else np.asarray(tau_phi(t, st), dtype=float)
        fe = None if f_ext is None else np.asarray(f_ext(t, st), dtype=float)
        return tau, fe

    def deriv(t, y, dy):
        st = RobotState.from_reduced(model, y, dy)
        eom = dissipative_eom(model, st, assign, gravity=gravity)
        tau, fe = loads(t, st)
        ydd = eom.accelerations(tau, fe)
        power = tau @ st.dphi
        if fe is not None:
            power += fe @ (eom.contact_jacobian @ dy)
        return ydd, power, st, tau

    y = state0.y.copy()
    dy = state0.dy.copy()
    W = 0.0
    steps = cfg.steps
    rec_t, rec_y, rec_dy, rec_T, rec_V, rec_W, rec_res, rec_p = [], [], [], [], [], [], [], []
    violations = 0
    checked = 0

    for k in range(steps + 1):
        t = k * h
        st = RobotState.from_reduced(model, y, dy)
        rec_t.append(t)
        rec_y.append(y.copy())
        rec_dy.append(dy.copy())
        rec_T.append(kinetic_energy(model, st))
        rec_V.append(potential_energy(model, st) if gravity else 0.0)
        rec_W.append(W)
        rec_res.append(float(np.max(np.abs(constraint_residual(st.q, st.phi, model.chain)))))
        if k == steps:
            break
        ydd, power, _, tau = deriv(t, y, dy)
        sdd = constraint_nullspace(model.chain, nb) @ ydd
        mesh_p = rotor_mesh_power(model, st, sdd, tau, gravity=gravity)
        rec_p.append(mesh_p)
        for j, md in enumerate(assign.modes):
            if md is DriveMode.IDEAL or abs(mesh_p[j]) < 1e-12:
                continue
            checked += 1
            if (md is DriveMode.FORWARD) != (mesh_p[j] > 0):
                violations += 1

        if cfg.integrator == RK4:
            k1v, k1p, _, _ = ydd, power, None, None
            y2, dy2 = y + 0.5 * h * dy, dy + 0.5 * h * k1v
            k2v, k2p, _, _ = deriv(t + 0.5 * h, y2, dy2)
            y3, dy3 = y + 0.5 * h * dy2, dy + 0.5 * h * k2v
            k3v, k3p, _, _ = deriv(t + 0.5 * h, y3, dy3)
            y4, dy4 = y + h * dy3, dy + h * k3v
            k4v, k4p, _, _ = deriv(t + h, y4, dy4)
            y = y + h / 6.0 * (dy + 2 * dy2 + 2 * dy3 + dy4)
            dy = dy + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            W += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        else:
            dy = dy + h * ydd
            y = y + h * dy
            W += h * power

    if checked and violations > 0.01 * steps:
        warnings.warn(f"realised power flow contradicts the assigned mode on {violations} of "
                      f"{steps} steps", ModeViolation, stacklevel=2)
    return ReducedTrajectory(
        t=np.array(rec_t), y=np.array(rec_y), dy=np.array(rec_dy), kinetic=np.array(rec_T),
        potential=np.array(rec_V), input_work=np.array(rec_W), residual=np.array(rec_res),
        mesh_power=np.array(rec_p) if rec_p else np.zeros((0, m)), mode_violations=violations)
