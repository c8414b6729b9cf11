"""Closed-form wedge-block transmission model.

A block of mass ``M`` slides along x; a wedge of mass ``m`` slides along a
direction u inclined by ``alpha`` from x. The holonomic contact
``-x + u cos(alpha) = 0`` plays the role of a gear mesh with reduction
``1/cos(alpha)``, and Coulomb friction (coefficient ``mu``) on the contact
face makes the transmission lossy and direction dependent.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DivergentInertia, NonBackdrivable
from .modes import DriveMode

MIN_ALPHA = 1e-6
_LOCK_TOL = 1e-12


@dataclass(frozen=True)
class WedgeParams:
    block_mass: float
    wedge_mass: float
    slope_angle: float
    friction_coeff: float

    def __post_init__(self):
        if not self.block_mass > 0 or not self.wedge_mass > 0:
            raise ValueError("masses must be positive")
        if not self.friction_coeff >= 0:
            raise ValueError("friction coefficient must be non-negative")
        if not (MIN_ALPHA <= self.slope_angle < math.pi / 2):
            raise ValueError(f"slope angle must lie in [{MIN_ALPHA}, pi/2), "
                             f"got {self.slope_angle!r}")

    @property
    def reduction(self):
        return 1.0 / math.cos(self.slope_angle)

    @property
    def mu_tan(self):
        return self.friction_coeff * math.tan(self.slope_angle)

    @property
    def reflected_wedge_mass(self):
        """Wedge mass seen along x, ``m / cos^2(alpha)``."""
        return self.wedge_mass / math.cos(self.slope_angle) ** 2


@dataclass(frozen=True)
class WedgeForces:
    f_x: float = 0.0  # on the block, along x
    f_u: float = 0.0  # on the wedge; the wedge is pushed with -f_u along u

    def __post_init__(self):
        if not (math.isfinite(self.f_x) and math.isfinite(self.f_u)):
            raise ValueError("forces must be finite")

    def projected_f_u(self, p: WedgeParams):
        return self.f_u / math.cos(p.slope_angle)


def forward_efficiency(p: WedgeParams) -> float:
    return 1.0 / (1.0 + p.mu_tan)


def backward_efficiency(p: WedgeParams) -> float:
    """Efficiency when the block back-drives the wedge.

    Raises NonBackdrivable beyond the self-locking limit ``mu tan(alpha) = 1``;
    exactly at the limit the efficiency is 0.
    """
    k = p.mu_tan
    if abs(1.0 - k) <= _LOCK_TOL:
        return 0.0
    if k > 1.0:
        raise NonBackdrivable(
            f"mu*tan(alpha) = {k:.6g} > 1: transmission is self-locking")
    return 1.0 - k


def mode_efficiency(p: WedgeParams, mode) -> float:
    """Entry of the efficiency matrix on the wedge row for ``mode``.

    Forward uses eta_f, backward uses 1/eta_b, ideal uses 1. These are the
    weights that cancel the meshing force in ``K^T E r``.
    """
    mode = DriveMode.parse(mode)
    if mode is DriveMode.IDEAL:
        return 1.0
    if mode is DriveMode.FORWARD:
        return forward_efficiency(p)
    eta_b = backward_efficiency(p)
    if eta_b == 0.0:
        raise DivergentInertia("backward efficiency is zero")
    return 1.0 / eta_b


def nullspace(p: WedgeParams):
    return np.array([1.0, 1.0 / math.cos(p.slope_angle)])


def constraint_jacobian(p: WedgeParams):
    return np.array([-1.0, math.cos(p.slope_angle)])


def efficiency_matrix(p: WedgeParams, mode):
    return np.diag([1.0, mode_efficiency(p, mode)])


def reduced_acceleration(p: WedgeParams, f: WedgeForces, mode) -> float:
    """Block acceleration under sustained sliding in the given drive mode."""
    eta = mode_efficiency(p, mode)
    return (f.f_x - eta * f.projected_f_u(p)) / (
        p.block_mass + eta * p.reflected_wedge_mass)


def impedance_coefficient(p: WedgeParams, mode) -> float:
    """Coefficient of ``s`` in the mechanical impedance.

    Forward: ``f_u_hat / xdot`` with only the wedge pushed. Backward:
    ``f_x / xdot`` with only the block pushed.
    """
    mode = DriveMode.parse(mode)
    if mode is DriveMode.FORWARD:
        return p.block_mass / forward_efficiency(p) + p.reflected_wedge_mass
    if mode is DriveMode.BACKWARD:
        return p.block_mass + p.reflected_wedge_mass * mode_efficiency(p, mode)
    return p.block_mass + p.reflected_wedge_mass


def meshing_force_direction(p: WedgeParams, mode):
    """Generalized meshing force per unit multiplier, ``r / lambda``."""
    mode = DriveMode.parse(mode)
    if mode is DriveMode.IDEAL:
        raise ValueError("meshing force direction needs forward or backward mode")
    c, s = math.cos(p.slope_angle), math.sin(p.slope_angle)
    sign = 1.0 if mode is DriveMode.FORWARD else -1.0
    return np.array([-1.0, c + sign * p.friction_coeff * s])


def efficiency_null(p: WedgeParams, mode) -> float:
    """``K^T E r`` per unit multiplier; identically zero."""
    K = nullspace(p)
    return float(K @ efficiency_matrix(p, mode) @ meshing_force_direction(p, mode))


def meshing_work(p: WedgeParams, mode, dx, lam=1.0) -> float:
    """Work of the meshing force along the unscaled tangent motion ``K dx``.

    With a compressive multiplier (``lam > 0``) forward driving moves the block
    towards -x (``dx < 0``) and backward driving towards +x.
    """
    return float(dx * lam * (nullspace(p) @ meshing_force_direction(p, mode)))
