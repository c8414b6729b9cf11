"""Task-space design metrics: inertia ellipsoids, force capability, impact mitigation."""
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .dynamics import (
    DissipativeEoM,
    RobotModel,
    RobotState,
    dissipative_eom,
    contact_jacobian,
    limb_jacobian,
    redundant_mass_matrix,
)
from .errors import LockedTransmission, SingularJacobian
from .modes import DriveMode
from .topology import CoordinateChain, EfficiencyAssignment

JACOBIAN_COND_LIMIT = 1e10


def _check_rank(J, what="contact Jacobian"):
    J = np.atleast_2d(J)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size == 0 or sv[-1] <= sv[0] / JACOBIAN_COND_LIMIT or sv[0] == 0:
        raise SingularJacobian(f"{what} is singular at this configuration")


def _unit(n):
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if not norm > 0:
        raise ValueError("direction must be non-zero")
    return n / norm


def directional_inertia(matrix, n):
    """Apparent mass along ``n``: ``1 / (n^T Lambda^-1 n)``."""
    n = _unit(n)
    return 1.0 / float(n @ np.linalg.solve(matrix, n))


@dataclass
class InertiaEllipsoid:
    matrix: np.ndarray
    mode: DriveMode

    @property
    def symmetric_part(self):
        return 0.5 * (self.matrix + self.matrix.T)

    def along(self, n):
        """Quadratic form ``n^T sym(Lambda) n`` along a unit direction."""
        n = _unit(n)
        return float(n @ self.symmetric_part @ n)

    def apparent_mass(self, n):
        return directional_inertia(self.matrix, n)

    def axes(self):
        """Semi-axis lengths and directions of the symmetric part (for plotting)."""
        w, V = np.linalg.eigh(self.symmetric_part)
        return w, V


def _task_inverse_inertia(eom: DissipativeEoM):
    J = eom.contact_jacobian
    _check_rank(J)
    return J @ np.linalg.solve(eom.H, J.T)


def gie(eom: DissipativeEoM) -> InertiaEllipsoid:
    """Conventional task-space inertia. ``eom`` should be built with all efficiencies at 1."""
    return InertiaEllipsoid(np.linalg.inv(_task_inverse_inertia(eom)), DriveMode.IDEAL)


def bgie(eom: DissipativeEoM) -> InertiaEllipsoid:
    """Inertia felt by an external force back-driving the limb."""
    return InertiaEllipsoid(np.linalg.inv(_task_inverse_inertia(eom)), DriveMode.BACKWARD)


def fgie(eom: DissipativeEoM) -> InertiaEllipsoid:
    """Inertia felt by the actuators when they accelerate the end-effector.

    A virtual task force ``f`` is realised by rotor torques
    ``tau_act = Gbar^T Dbar^T Jbar^T f``. Pushing those through the forward
    dynamics gives ``a = Jbar H^-1 (Dbar Gbar)^-T Ebar (Dbar Gbar)^T Jbar^T f``
    and the returned matrix maps ``a`` back to ``f``. It reduces to the GIE
    when every efficiency is 1.
    """
    J = eom.contact_jacobian
    _check_rank(J)
    DG = eom.DG_bar
    path = np.linalg.solve(DG.T, eom.E_bar @ DG.T @ J.T)
    return InertiaEllipsoid(np.linalg.inv(J @ np.linalg.solve(eom.H, path)), DriveMode.FORWARD)


def fgie_product_form(eom: DissipativeEoM) -> np.ndarray:
    """``Lambda(eta) [((Jbar Dbar Gbar)^+)^T Ebar (Jbar Dbar Gbar)^T]^-1``.

    Kept for comparison only. With a square ``Jbar`` it equals
    ``Lambda F Lambda^-1`` for ``F`` from :func:`fgie`: same eigenvalues, but
    the factors multiply in the other order, so it is not the same matrix.
    """
    J = eom.contact_jacobian
    Lam = np.linalg.inv(_task_inverse_inertia(eom))
    JDG = J @ eom.DG_bar
    _check_rank(JDG, "J D G")
    B = np.linalg.pinv(JDG).T @ eom.E_bar @ JDG.T
    return Lam @ np.linalg.inv(B)


@dataclass
class Ellipsoids:
    gie: InertiaEllipsoid
    fgie: InertiaEllipsoid
    bgie: InertiaEllipsoid


def inertia_ellipsoids(model: RobotModel, state: RobotState, assign: EfficiencyAssignment,
                       gravity=False) -> Ellipsoids:
    """GIE, FGIE and BGIE at one configuration for the efficiencies in ``assign``."""
    m = model.m
    ideal = EfficiencyAssignment.ideal(m)
    fwd = assign.with_mode(DriveMode.FORWARD)
    bwd = assign.with_mode(DriveMode.BACKWARD)
    return Ellipsoids(
        gie=gie(dissipative_eom(model, state, ideal, gravity=gravity)),
        fgie=fgie(dissipative_eom(model, state, fwd, gravity=gravity)),
        bgie=bgie(dissipative_eom(model, state, bwd, gravity=gravity)),
    )


@dataclass
class ForcePolytope:
    """Convex polytope of static end-effector forces."""

    vertices: np.ndarray
    mode: DriveMode
    reference: Optional["ForcePolytope"] = None
    infinite: bool = False

    def hull_vertices(self):
        """Vertices of the convex hull in counter-clockwise order (2-D)."""
        V = self.vertices
        if self.infinite:
            return V
        if V.shape[1] == 1:
            return np.array([[V.min()], [V.max()]])
        try:
            hull = ConvexHull(V)
        except QhullError:
            return V
        return V[hull.vertices]

    def extent(self, direction):
        """Largest ``t`` with ``t * direction`` inside the polytope."""
        if self.infinite:
            return np.inf
        d = _unit(direction)
        V = self.vertices
        if V.shape[1] == 1:
            return float(V.max() / d[0]) if d[0] > 0 else float(V.min() / d[0])
        hull = ConvexHull(V)
        normals = hull.equations[:, :-1]
        offsets = hull.equations[:, -1]  # n.x + b <= 0 inside
        nd = normals @ d
        mask = nd > 1e-15
        return float(np.min(-offsets[mask] / nd[mask]))

    def normalized_extent(self, direction):
        if self.reference is None:
            return 1.0
        return self.extent(direction) / self.reference.extent(direction)


def _box_vertices(limits):
    limits = np.asarray(limits, dtype=float)
    return np.array([np.asarray(signs) * limits for signs in product((-1.0, 1.0), repeat=len(limits))])


def _force_map(chain: CoordinateChain, J):
    """``((J D G)^+)^T``: rotor torques to end-effector force."""
    JDG = np.atleast_2d(J) @ chain.DG
    _check_rank(JDG, "J D G")
    return np.linalg.pinv(JDG).T


def force_capability(chain: CoordinateChain, J, tau_max) -> ForcePolytope:
    W = _force_map(chain, J)
    tau = _box_vertices(np.broadcast_to(tau_max, (chain.m,)))
    return ForcePolytope(tau @ W.T, DriveMode.IDEAL)


def asymmetric_force_capability(chain: CoordinateChain, J, tau_max, assign: EfficiencyAssignment,
                                mode=None, sweep=False) -> ForcePolytope:
    """Torque box scaled by eta_f (forward) or 1/eta_b (backward), mapped to task space.

    With ``sweep=True`` a locked backward transmission yields a polytope
    flagged ``infinite`` instead of raising.
    """
    mode = DriveMode.parse(mode) if mode is not None else assign.modes[0]
    ref = force_capability(chain, J, tau_max)
    a = assign.with_mode(mode)
    try:
        scale = a.effective()
    except LockedTransmission:
        if not sweep:
            raise
        return ForcePolytope(ref.vertices * np.inf, mode, reference=ref, infinite=True)
    W = _force_map(chain, J)
    tau = _box_vertices(np.broadcast_to(tau_max, (chain.m,)) * scale)
    return ForcePolytope(tau @ W.T, mode, reference=ref)


def model_force_capabilities(model: RobotModel, state: RobotState, assign: EfficiencyAssignment,
                             sweep=False):
    """(FC, FFC, BFC) for the limb Jacobian at ``state``."""
    J = limb_jacobian(model, state)
    tau_max = np.array([t.torque_limit for t in model.transmissions])
    fc = force_capability(model.chain, J, tau_max)
    ffc = asymmetric_force_capability(model.chain, J, tau_max, assign, DriveMode.FORWARD, sweep)
    bfc = asymmetric_force_capability(model.chain, J, tau_max, assign, DriveMode.BACKWARD, sweep)
    return fc, ffc, bfc


def locked_inertia(model: RobotModel, state: RobotState):
    """Task-space inertia with every joint and rotor welded to its carrier.

    Returns None for a fixed base (the welded robot is immovable).
    """
    nb = model.nb
    if nb == 0:
        return None
    M = redundant_mass_matrix(model, state)[:nb, :nb]
    J = contact_jacobian(model, state)[:, :nb]
    _check_rank(J)
    return np.linalg.inv(J @ np.linalg.solve(M, J.T))


@dataclass
class ImfReport:
    direction: np.ndarray
    xi: float
    locked_inertia: float
    backdriven_inertia: float


def impact_mitigation_factor(model: RobotModel, state: RobotState, assign: EfficiencyAssignment,
                             direction) -> ImfReport:
    """Directional impact mitigation factor ``1 - lambda / lambda_locked``.

    ``lambda`` is the apparent mass along ``direction`` of the back-driven
    robot and ``lambda_locked`` the same for the welded robot.
    """
    n = _unit(direction)
    eom = dissipative_eom(model, state, assign.with_mode(DriveMode.BACKWARD), gravity=False)
    lam = 1.0 / float(n @ _task_inverse_inertia(eom) @ n)
    locked = locked_inertia(model, state)
    if locked is None:
        return ImfReport(n, 1.0, np.inf, lam)
    lam_r = directional_inertia(locked, n)
    return ImfReport(n, 1.0 - lam / lam_r, lam_r, lam)
