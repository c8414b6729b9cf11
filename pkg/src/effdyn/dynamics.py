"""Planar floating-base serial-chain dynamics with lossy transmissions.

Conventions
-----------
* The plane is (x, z); gravity defaults to ``(0, -9.81)``.
* A floating base contributes ``q_b = (x, z, pitch)`` (nb = 3); a fixed base
  contributes nothing (nb = 0).
* Joint angles rotate clockwise: the absolute angle of link i is
  ``pitch - (q_1 + ... + q_i)`` measured counter-clockwise from +x, so with
  all joint angles zero the limb points along the base +x axis.
* Rotor j spins relative to the body it is mounted on (its carrier), with
  the same clockwise sign convention. Rotors carry rotary inertia only;
  their mass is part of the carrier.
* Redundant coordinates ``s = (q_b, q, phi)``; reduced ``y = (q_b, q)``.
"""
from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property
import math
import numpy as np

from .errors import DegenerateEnergy, DimensionMismatch
from .topology import (
    CoordinateChain,
    EfficiencyAssignment,
    constraint_nullspace,
    constraint_residual,
    efficiency_matrix,
)

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class BaseSpec:
    mass: float
    inertia: float
    side: float = 0.0
    hip_offset: tuple = (0.0, 0.0)  # hip position in the base frame

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("base mass must be positive")
        if not self.inertia >= 0:
            raise ValueError("base inertia must be non-negative")
        if not self.side >= 0:
            raise ValueError("base side length must be non-negative")
        object.__setattr__(self, "hip_offset", tuple(float(v) for v in self.hip_offset))

    @classmethod
    def square(cls, mass, side, hip_offset=(0.0, 0.0)):
        """Uniform planar square plate."""
        return cls(mass=mass, inertia=mass * side ** 2 / 6.0, side=side, hip_offset=hip_offset)


@dataclass(frozen=True)
class LinkSpec:
    mass: float
    length: float
    com: float
    inertia: float
    mount: int = -1  # carrier of this joint's rotor: 0 = base, k = link k; -1 = parent

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("link mass must be positive")
        if not self.length > 0:
            raise ValueError("link length must be positive")
        if not 0 <= self.com <= self.length:
            raise ValueError("link com offset must lie in [0, length]")
        if not self.inertia >= 0:
            raise ValueError("link inertia must be non-negative")

    @classmethod
    def rod(cls, mass, length, mount=-1):
        return cls(mass=mass, length=length, com=length / 2,
                   inertia=mass * length ** 2 / 12.0, mount=mount)


@dataclass(frozen=True, eq=False)
class RobotModel:
    base: BaseSpec
    links: tuple
    transmissions: tuple
    D: np.ndarray = None
    gravity: tuple = (0.0, -9.81)
    floating: bool = True

    def __post_init__(self):
        links = tuple(self.links)
        trans = tuple(self.transmissions)
        m = len(links)
        if m < 1:
            raise ValueError("at least one link is required")
        if len(trans) != m:
            raise DimensionMismatch(f"{len(trans)} transmissions for {m} links")
        D = np.eye(m) if self.D is None else np.atleast_2d(np.asarray(self.D, dtype=float))
        if D.shape != (m, m):
            raise DimensionMismatch(f"D must be {m}x{m}, got {D.shape}")
        mounts = []
        for i, link in enumerate(links):
            mount = i if link.mount == -1 else link.mount
            if not 0 <= mount <= m:
                raise ValueError(f"link {i + 1}: mount {link.mount} is not a body index")
            mounts.append(mount)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "transmissions", trans)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        object.__setattr__(self, "_mounts", tuple(mounts))
        self.chain.DG_inverse()

    @property
    def m(self):
        return len(self.links)

    @property
    def nb(self):
        return 3 if self.floating else 0

    @property
    def n_reduced(self):
        return self.nb + self.m

    @property
    def n_redundant(self):
        return self.nb + 2 * self.m

    @property
    def mounts(self):
        """Carrier body index of each rotor (0 = base, k = link k)."""
        return self._mounts

    @cached_property
    def chain(self):
        return CoordinateChain.from_ratios([t.gear_ratio for t in self.transmissions], self.D)

    def assignment(self, mode):
        """Uniform-mode assignment using each transmission's efficiencies."""
        return EfficiencyAssignment(
            modes=(mode,) * self.m,
            eta_f=[t.forward_efficiency for t in self.transmissions],
            eta_b=[t.backward_efficiency for t in self.transmissions],
        )

    @cached_property
    def kinematics(self):
        return _Kinematics(self)


@dataclass
class RobotState:
    q_b: np.ndarray
    q: np.ndarray
    phi: np.ndarray
    dq_b: np.ndarray = None
    dq: np.ndarray = None
    dphi: np.ndarray = None

    def __post_init__(self):
        self.q_b = np.atleast_1d(np.asarray(self.q_b, dtype=float))
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        self.dq_b = np.zeros_like(self.q_b) if self.dq_b is None else np.atleast_1d(np.asarray(self.dq_b, dtype=float))
        self.dq = np.zeros_like(self.q) if self.dq is None else np.atleast_1d(np.asarray(self.dq, dtype=float))
        self.dphi = np.zeros_like(self.phi) if self.dphi is None else np.atleast_1d(np.asarray(self.dphi, dtype=float))
        if self.q.shape != self.phi.shape or self.dq.shape != self.q.shape or self.dphi.shape != self.phi.shape:
            raise DimensionMismatch("joint and rotor vectors must have equal length")
        if self.dq_b.shape != self.q_b.shape:
            raise DimensionMismatch("base position and velocity must have equal length")

    @classmethod
    def from_reduced(cls, model: RobotModel, y, dy=None):
        """Constraint-consistent state from reduced coordinates (rotors follow the joints)."""
        y = np.asarray(y, dtype=float)
        dy = np.zeros_like(y) if dy is None else np.asarray(dy, dtype=float)
        if y.shape != (model.n_reduced,) or dy.shape != y.shape:
            raise DimensionMismatch(f"reduced state must have length {model.n_reduced}")
        nb = model.nb
        inv = model.chain.DG_inverse()
        return cls(q_b=y[:nb], q=y[nb:], phi=inv @ y[nb:],
                   dq_b=dy[:nb], dq=dy[nb:], dphi=inv @ dy[nb:])

    @classmethod
    def from_redundant(cls, model: RobotModel, s, ds=None):
        s = np.asarray(s, dtype=float)
        ds = np.zeros_like(s) if ds is None else np.asarray(ds, dtype=float)
        nb, m = model.nb, model.m
        return cls(q_b=s[:nb], q=s[nb:nb + m], phi=s[nb + m:],
                   dq_b=ds[:nb], dq=ds[nb:nb + m], dphi=ds[nb + m:])

    @property
    def s(self):
        return np.concatenate([self.q_b, self.q, self.phi])

    @property
    def ds(self):
        return np.concatenate([self.dq_b, self.dq, self.dphi])

    @property
    def y(self):
        return np.concatenate([self.q_b, self.q])

    @property
    def dy(self):
        return np.concatenate([self.dq_b, self.dq])

    def constraint_error(self, model: RobotModel):
        """Largest position/velocity constraint violation."""
        g = constraint_residual(self.q, self.phi, model.chain)
        dg = constraint_residual(self.dq, self.dphi, model.chain)
        return max(np.max(np.abs(g)), np.max(np.abs(dg)))

    def check_consistent(self, model: RobotModel, tol=CONSISTENCY_TOL):
        if self.q_b.shape != (model.nb,) or self.q.shape != (model.m,):
            raise DimensionMismatch("state does not match the model dimensions")
        err = self.constraint_error(model)
        if err > tol:
            raise ValueError(f"state violates q = D G phi by {err:.3g}")
        return self


class _Point:
    """Planar point whose position is ``t(s) + sum_k l_k u(a_k . s + th_k)``.

    ``t(s)`` is the base translation (or zero for a fixed base) and
    ``u(th) = (cos th, sin th)``.
    """

    def __init__(self, n, translate, terms):
        self.n = n
        self.translate = translate
        self.lengths = np.array([t[0] for t in terms], dtype=float)
        self.coefs = np.array([t[1] for t in terms], dtype=float).reshape(len(terms), n)
        self.offsets = np.array([t[2] for t in terms], dtype=float)
        self.T = np.zeros((2, n))
        if translate:
            self.T[0, 0] = self.T[1, 1] = 1.0

    def _angles(self, s):
        return self.coefs @ s + self.offsets

    def position(self, s):
        th = self._angles(s)
        p = np.array([self.lengths @ np.cos(th), self.lengths @ np.sin(th)])
        if self.translate:
            p += s[:2]
        return p

    def jacobian(self, s):
        th = self._angles(s)
        du = np.vstack([-np.sin(th), np.cos(th)]) * self.lengths
        return self.T + du @ self.coefs

    def hessian(self, s):
        """Second derivatives, shape (2, n, n)."""
        th = self._angles(s)
        lu = np.vstack([np.cos(th), np.sin(th)]) * self.lengths
        return -np.einsum("dt,ti,tj->dij", lu, self.coefs, self.coefs)


class _Kinematics:
    def __init__(self, model: RobotModel):
        nb, m = model.nb, model.m
        n = nb + 2 * m
        self.n = n
        base_angle = np.zeros(n)
        if nb:
            base_angle[2] = 1.0
        angles = [base_angle]
        for i in range(m):
            a = angles[-1].copy()
            a[nb + i] -= 1.0
            angles.append(a)
        self.body_angles = angles  # index 0 = base, k = link k

        rotor_angles = []
        for j, mount in enumerate(model.mounts):
            a = angles[mount].copy()
            a[nb + m + j] -= 1.0
            rotor_angles.append(a)
        self.rotor_angles = rotor_angles

        hx, hz = model.base.hip_offset
        hip_terms = []
        if hx or hz:
            hip_terms.append((math.hypot(hx, hz), base_angle, math.atan2(hz, hx)))
        translate = bool(nb)
        self.base_com = _Point(n, translate, [])
        self.hip = _Point(n, translate, hip_terms)
        self.link_coms = []
        chain_terms = list(hip_terms)
        for i, link in enumerate(model.links):
            self.link_coms.append(_Point(n, translate, chain_terms + [(link.com, angles[i + 1], 0.0)]))
            chain_terms = chain_terms + [(link.length, angles[i + 1], 0.0)]
        self.foot = _Point(n, translate, chain_terms)
        self.joint_points = [self.hip] + [
            _Point(n, translate, chain_terms[: len(hip_terms) + i + 1]) for i in range(m)]

        masses = [model.base.mass] + [l.mass for l in model.links]
        inertias = [model.base.inertia] + [l.inertia for l in model.links]
        self.bodies = list(zip(masses, inertias, [self.base_com] + self.link_coms, angles))
        self.rotor_inertias = [t.rotor_inertia for t in model.transmissions]
        self.gravity = np.asarray(model.gravity, dtype=float)
        # configuration-independent rotational part of M
        rot = np.zeros((n, n))
        for _, inertia, _, a in self.bodies:
            rot += inertia * np.outer(a, a)
        for inertia, a in zip(self.rotor_inertias, self.rotor_angles):
            rot += inertia * np.outer(a, a)
        self.rotational_mass = rot


def _as_s(model, state_or_s):
    if isinstance(state_or_s, RobotState):
        return state_or_s.s
    s = np.asarray(state_or_s, dtype=float)
    if s.shape != (model.n_redundant,):
        raise DimensionMismatch(f"redundant coordinates must have length {model.n_redundant}")
    return s


def redundant_mass_matrix(model: RobotModel, state) -> np.ndarray:
    """Mass matrix over ``s = (q_b, q, phi)``."""
    s = _as_s(model, state)
    kin = model.kinematics
    M = kin.rotational_mass.copy()
    for mass, _, point, _ in kin.bodies:
        J = point.jacobian(s)
        M += mass * J.T @ J
    return M


def mass_matrix_derivatives(model: RobotModel, state) -> np.ndarray:
    """``dM[k] = dM/ds_k`` from the analytic point Hessians, shape (n, n, n)."""
    s = _as_s(model, state)
    kin = model.kinematics
    n = kin.n
    dM = np.zeros((n, n, n))
    for mass, _, point, _ in kin.bodies:
        J = point.jacobian(s)
        Hs = point.hessian(s)  # (2, i, k)
        X = np.einsum("dik,dj->kij", Hs, J)
        dM += mass * (X + X.transpose(0, 2, 1))
    return dM


def coriolis_matrix(model: RobotModel, state, velocity=None) -> np.ndarray:
    """Christoffel-symbol Coriolis matrix ``C(s, ds)`` with ``dM - 2C`` skew."""
    s = _as_s(model, state)
    if velocity is None:
        if not isinstance(state, RobotState):
            raise ValueError("velocity required when passing raw coordinates")
        velocity = state.ds
    v = np.asarray(velocity, dtype=float)
    dM = mass_matrix_derivatives(model, s)
    # Gamma_ijk = 1/2 (dM_ij/ds_k + dM_ik/ds_j - dM_jk/ds_i)
    gamma = 0.5 * (dM.transpose(1, 2, 0) + dM.transpose(1, 0, 2) - dM)
    return gamma @ v


def gravity_forces(model: RobotModel, state) -> np.ndarray:
    """Generalized gravity load ``dV/ds`` (moves to the left-hand side)."""
    s = _as_s(model, state)
    kin = model.kinematics
    g = np.zeros(kin.n)
    for mass, _, point, _ in kin.bodies:
        g -= mass * point.jacobian(s).T @ kin.gravity
    return g


def potential_energy(model: RobotModel, state) -> float:
    s = _as_s(model, state)
    kin = model.kinematics
    return float(-sum(mass * kin.gravity @ point.position(s) for mass, _, point, _ in kin.bodies))


def kinetic_energy(model: RobotModel, state: RobotState) -> float:
    v = state.ds
    return 0.5 * float(v @ redundant_mass_matrix(model, state) @ v)


def bias_forces(model: RobotModel, state: RobotState, gravity=True) -> np.ndarray:
    """Coriolis, centrifugal and (optionally) gravity forces in redundant coordinates."""
    c = coriolis_matrix(model, state) @ state.ds
    if gravity:
        c = c + gravity_forces(model, state)
    return c


def foot_position(model: RobotModel, state) -> np.ndarray:
    return model.kinematics.foot.position(_as_s(model, state))


def contact_jacobian(model: RobotModel, state) -> np.ndarray:
    """Foot Jacobian with respect to the reduced coordinates ``y``, 2 x (nb+m)."""
    s = _as_s(model, state)
    return model.kinematics.foot.jacobian(s)[:, : model.n_reduced]


def limb_jacobian(model: RobotModel, state) -> np.ndarray:
    """Foot Jacobian with respect to the joint angles only (base held still), 2 x m."""
    nb = model.nb
    return contact_jacobian(model, state)[:, nb:]


@dataclass
class DissipativeEoM:
    """``H(eta) ydd + c_eta = Jbar^T f_ext + (Dbar Gbar)^-T Ebar tau_act``."""

    H: np.ndarray
    c: np.ndarray
    contact_jacobian: np.ndarray     # Jbar
    actuation_map: np.ndarray        # (Dbar Gbar)^-T Ebar
    K: np.ndarray
    E: np.ndarray
    M: np.ndarray
    DG_bar: np.ndarray               # Dbar Gbar
    E_bar: np.ndarray
    assignment: EfficiencyAssignment
    nb: int

    @property
    def contact_map(self):
        return self.contact_jacobian.T

    def rhs(self, tau_phi=None, f_ext=None):
        n = self.H.shape[0]
        m = n - self.nb
        out = -self.c.copy()
        if tau_phi is not None:
            tau_act = np.concatenate([np.zeros(self.nb), np.asarray(tau_phi, dtype=float)])
            if tau_act.shape != (n,):
                raise DimensionMismatch(f"tau_phi must have length {m}")
            out += self.actuation_map @ tau_act
        if f_ext is not None:
            out += self.contact_map @ np.asarray(f_ext, dtype=float)
        return out

    def accelerations(self, tau_phi=None, f_ext=None):
        return np.linalg.solve(self.H, self.rhs(tau_phi, f_ext))


def block_diag_identity(nb, B):
    m = B.shape[0]
    out = np.eye(nb + m)
    out[nb:, nb:] = B
    return out


def dissipative_eom(model: RobotModel, state: RobotState, assign: EfficiencyAssignment,
                    gravity=True) -> DissipativeEoM:
    nb, m = model.nb, model.m
    K = constraint_nullspace(model.chain, nb)
    E = efficiency_matrix(assign, nb, m)
    M = redundant_mass_matrix(model, state)
    c = bias_forces(model, state, gravity=gravity)
    KtE = K.T @ E
    H = KtE @ M @ K
    DG_bar = block_diag_identity(nb, model.chain.DG)
    E_bar = block_diag_identity(nb, np.diag(assign.effective()))
    act = np.linalg.solve(DG_bar.T, E_bar)
    return DissipativeEoM(H=H, c=KtE @ c, contact_jacobian=contact_jacobian(model, state),
                          actuation_map=act, K=K, E=E, M=M, DG_bar=DG_bar, E_bar=E_bar,
                          assignment=assign, nb=nb)


def symmetrize(M, E):
    """Symmetric surrogate ``sqrt(E) M sqrt(E)`` of the projected inertia ``E M``."""
    E = np.asarray(E, dtype=float)
    r = np.sqrt(np.diag(E))
    return (r[:, None] * np.asarray(M, dtype=float)) * r[None, :]


def kinetic_energy_error_bound(eta_min: float) -> float:
    """Worst-case relative kinetic-energy error of the symmetric surrogate."""
    if not 0 < eta_min <= 1:
        raise ValueError("eta_min must lie in (0, 1]")
    r = math.sqrt(eta_min)
    return (1.0 - r) ** 2 / (1.0 + eta_min)


EnergyError = namedtuple("EnergyError", "e e_c delta_T T_ns T_c")


def measured_energy_error(M, E, v, m) -> EnergyError:
    """Kinetic-energy error of ``sqrt(E) M sqrt(E)`` against ``E M`` at velocity ``v``.

    ``m`` is the number of trailing (rotor) coordinates. ``e`` is relative to
    the full non-symmetric energy and ``e_c`` to its coupled part.
    """
    M = np.asarray(M, dtype=float)
    E = np.asarray(E, dtype=float)
    v = np.asarray(v, dtype=float)
    n = M.shape[0]
    k = n - m
    M_ns = E @ M
    M_s = symmetrize(M, E)
    T_ns = 0.5 * v @ M_ns @ v
    dT = 0.5 * v @ (M_s - M_ns) @ v  # difference first: the energies nearly cancel
    v1, v2 = v[:k], v[k:]
    T_c = 0.5 * (v1 @ M_ns[:k, k:] @ v2 + v2 @ M_ns[k:, :k] @ v1)
    if not T_ns > 0:
        raise DegenerateEnergy(f"non-symmetric kinetic energy is {T_ns:.3g}")
    if T_c == 0:
        raise DegenerateEnergy("coupled kinetic energy is zero")
    return EnergyError(e=dT / T_ns, e_c=dT / T_c, delta_T=dT, T_ns=T_ns, T_c=T_c)


def rotor_mesh_power(model: RobotModel, state: RobotState, sdd, tau_phi=None, gravity=True):
    """Power each rotor delivers into its transmission.

    Positive values mean the rotor drives the load (forward); negative values
    mean the load back-drives the rotor.
    """
    nb, m = model.nb, model.m
    M = redundant_mass_matrix(model, state)
    c = bias_forces(model, state, gravity=gravity)
    rows = slice(nb + m, nb + 2 * m)
    tau = np.zeros(m) if tau_phi is None else np.asarray(tau_phi, dtype=float)
    mesh_torque = tau - (M[rows] @ sdd + c[rows])
    return mesh_torque * state.dphi
