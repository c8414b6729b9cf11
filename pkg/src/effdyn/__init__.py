"""Efficiency-aware dynamics and design metrics for geared legged robots."""
from .errors import (
    DegenerateEnergy,
    DimensionMismatch,
    DivergentInertia,
    EffdynError,
    LockedTransmission,
    ModeViolation,
    NonBackdrivable,
    NoSlip,
    ParseError,
    SingularJacobian,
    SingularTopology,
    StiffnessFailure,
)
from .modes import DriveMode
from .wedge import (
    WedgeForces,
    WedgeParams,
    backward_efficiency,
    forward_efficiency,
    impedance_coefficient,
    reduced_acceleration,
)
from .topology import (
    CoordinateChain,
    EfficiencyAssignment,
    TransmissionSpec,
    backward_from_forward,
)
from .dynamics import (
    BaseSpec,
    LinkSpec,
    RobotModel,
    RobotState,
    dissipative_eom,
    kinetic_energy_error_bound,
    measured_energy_error,
    symmetrize,
)
from .metrics import (
    asymmetric_force_capability,
    bgie,
    fgie,
    force_capability,
    gie,
    impact_mitigation_factor,
    inertia_ellipsoids,
)
from .robotfile import load, load_preset, loads, dumps

__version__ = "0.1.0"
