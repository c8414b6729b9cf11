"""Rotor -> motor -> joint coordinate chain and the efficiency-weighted projection.

Rotor angles ``phi`` map to motor (gearbox output) angles through the
reduction ``G = diag(1/N_j)`` and motor angles map to joint angles through
the actuation topology ``D``::

    q = D G phi

The redundant coordinates are ``s = (q_b, q, phi)`` and the reduced ones
``y = (q_b, q)``.
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, LockedTransmission, SingularTopology
from .modes import DriveMode

COND_LIMIT = 1e12


@dataclass(frozen=True)
class TransmissionSpec:
    gear_ratio: float          # N, >1 is a speed reduction
    forward_efficiency: float  # eta_f in (0, 1]
    rotor_inertia: float = 0.0
    torque_limit: float = 1.0  # rotor side, N m

    def __post_init__(self):
        if not self.gear_ratio > 0:
            raise ValueError("gear ratio must be positive")
        if not 0 < self.forward_efficiency <= 1:
            raise ValueError("forward efficiency must lie in (0, 1]")
        if not self.rotor_inertia >= 0:
            raise ValueError("rotor inertia must be non-negative")
        if not self.torque_limit > 0:
            raise ValueError("torque limit must be positive")

    @property
    def reduction(self):
        """Diagonal entry of G, i.e. 1/N."""
        return 1.0 / self.gear_ratio

    @property
    def backward_efficiency(self):
        return backward_from_forward(self.forward_efficiency, self.reduction)


SERIAL = "serial"


def serial_topology(m):
    return np.eye(m)


def parallelogram_topology():
    """Two motors on the base driving a parallelogram: q1 = psi1, q2 = psi2 - psi1."""
    return np.array([[1.0, 0.0], [-1.0, 1.0]])


@dataclass(frozen=True, eq=False)
class CoordinateChain:
    """Reduction ``G`` and actuation topology ``D`` of an m-actuator limb."""

    G: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch(f"G must be square, got shape {G.shape}")
        if D.shape != G.shape:
            raise DimensionMismatch(f"D {D.shape} and G {G.shape} must match")
        if np.any(G - np.diag(np.diag(G))):
            raise ValueError("G must be diagonal")
        if not np.all(np.diag(G) > 0):
            raise ValueError("G must have positive diagonal")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "D", D)

    @classmethod
    def from_ratios(cls, gear_ratios: Sequence[float], D=None):
        ratios = np.asarray(gear_ratios, dtype=float)
        if D is None:
            D = serial_topology(len(ratios))
        return cls(G=np.diag(1.0 / ratios), D=np.asarray(D, dtype=float))

    @property
    def m(self):
        return self.G.shape[0]

    @property
    def DG(self):
        return self.D @ self.G

    def DG_inverse(self):
        DG = self.DG
        if np.linalg.cond(DG) > COND_LIMIT:
            raise SingularTopology("D G is numerically singular")
        return np.linalg.inv(DG)

    # motion maps rotor -> motor -> joint -> task
    def motor_from_rotor(self, dphi):
        return self.G @ dphi

    def joint_from_motor(self, dpsi):
        return self.D @ dpsi

    # dual force maps task -> joint -> motor -> rotor
    def motor_torque_from_joint(self, tau_q):
        return self.D.T @ tau_q

    def rotor_torque_from_motor(self, tau_psi):
        return self.G.T @ tau_psi

    def rotor_from_joint(self, q):
        return self.DG_inverse() @ np.asarray(q, dtype=float)


def _check_len(name, v, m):
    v = np.asarray(v, dtype=float)
    if v.shape != (m,):
        raise DimensionMismatch(f"{name} must have shape ({m},), got {v.shape}")
    return v


def constraint_residual(q, phi, chain: CoordinateChain):
    q = _check_len("q", q, chain.m)
    phi = _check_len("phi", phi, chain.m)
    return q - chain.DG @ phi


def constraint_jacobian(chain: CoordinateChain, nb: int):
    """``A = [0 | I | -DG]`` of shape m x (nb + 2m)."""
    chain.DG_inverse()  # singularity check
    m = chain.m
    return np.hstack([np.zeros((m, nb)), np.eye(m), -chain.DG])


def constraint_nullspace(chain: CoordinateChain, nb: int):
    """Nullspace basis of the constraint Jacobian that keeps ``y = K s`` on top."""
    m = chain.m
    K = np.zeros((nb + 2 * m, nb + m))
    K[: nb + m, : nb + m] = np.eye(nb + m)
    K[nb + m:, nb:] = chain.DG_inverse()
    return K


@dataclass(frozen=True, eq=False)
class EfficiencyAssignment:
    """Per-joint drive mode together with forward/backward efficiencies."""

    modes: tuple
    eta_f: np.ndarray
    eta_b: np.ndarray = field(default=None)

    def __post_init__(self):
        modes = tuple(DriveMode.parse(md) for md in self.modes)
        eta_f = np.atleast_1d(np.asarray(self.eta_f, dtype=float))
        if self.eta_b is None:
            # wedge-like relation with no reduction information
            eta_b = np.array([backward_from_forward(e, 0.0) for e in eta_f])
        else:
            eta_b = np.atleast_1d(np.asarray(self.eta_b, dtype=float))
        if not (len(modes) == eta_f.shape[0] == eta_b.shape[0]):
            raise DimensionMismatch("modes, eta_f and eta_b must have equal length")
        if np.any(eta_f <= 0) or np.any(eta_f > 1):
            raise ValueError("forward efficiencies must lie in (0, 1]")
        if np.any(eta_b < 0) or np.any(eta_b > eta_f + 1e-15):
            raise ValueError("backward efficiencies must lie in [0, eta_f]")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "eta_f", eta_f)
        object.__setattr__(self, "eta_b", eta_b)

    @classmethod
    def uniform(cls, mode, eta_f, reductions):
        """Same mode on every joint; ``eta_b`` from the gear relation with G = ``reductions``."""
        reductions = np.atleast_1d(np.asarray(reductions, dtype=float))
        eta_f = np.broadcast_to(np.asarray(eta_f, dtype=float), reductions.shape).copy()
        eta_b = np.array([backward_from_forward(e, g) for e, g in zip(eta_f, reductions)])
        return cls(modes=(DriveMode.parse(mode),) * len(reductions), eta_f=eta_f, eta_b=eta_b)

    @classmethod
    def ideal(cls, m):
        return cls(modes=(DriveMode.IDEAL,) * m, eta_f=np.ones(m), eta_b=np.ones(m))

    def with_mode(self, mode):
        return EfficiencyAssignment((DriveMode.parse(mode),) * len(self.modes),
                                    self.eta_f, self.eta_b)

    @property
    def m(self):
        return len(self.modes)

    def effective(self):
        """Rotor-row weights: eta_f (forward), 1/eta_b (backward), 1 (ideal)."""
        out = np.ones(self.m)
        for j, md in enumerate(self.modes):
            if md is DriveMode.FORWARD:
                out[j] = self.eta_f[j]
            elif md is DriveMode.BACKWARD:
                if self.eta_b[j] == 0.0:
                    raise LockedTransmission(f"transmission {j} has zero backward efficiency")
                out[j] = 1.0 / self.eta_b[j]
        return out

    def is_uniform(self):
        return len(set(self.modes)) <= 1


def efficiency_matrix(assign: EfficiencyAssignment, nb: int, m: int):
    if assign.m != m:
        raise DimensionMismatch(f"assignment covers {assign.m} joints, expected {m}")
    return np.diag(np.concatenate([np.ones(nb + m), assign.effective()]))


def backward_from_forward(eta_f: float, G_ratio: float) -> float:
    """Backward efficiency of a gear train from its forward efficiency.

    ``G_ratio`` is the speed reduction 1/N. Below ``(1 - G^2)/2`` the train
    cannot be back-driven and 0 is returned.
    """
    if not 0 < eta_f <= 1:
        raise ValueError("eta_f must lie in (0, 1]")
    if not 0 <= G_ratio < 1:
        raise ValueError("G_ratio must lie in [0, 1)")
    g2 = G_ratio * G_ratio
    if eta_f <= (1.0 - g2) / 2.0:
        return 0.0
    return (2.0 * eta_f - 1.0 + g2) / ((1.0 - g2) * eta_f + 2.0 * g2)


def classify_mode(power):
    """Drive mode from the power a rotor delivers into its transmission."""
    if power > 0:
        return DriveMode.FORWARD
    if power < 0:
        return DriveMode.BACKWARD
    return DriveMode.IDEAL
