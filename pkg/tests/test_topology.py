import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effdyn.errors import DimensionMismatch, LockedTransmission, SingularTopology
from effdyn.modes import DriveMode
from effdyn.topology import (
    CoordinateChain,
    EfficiencyAssignment,
    TransmissionSpec,
    backward_from_forward,
    classify_mode,
    constraint_jacobian,
    constraint_nullspace,
    constraint_residual,
    efficiency_matrix,
    parallelogram_topology,
)

G20 = 1 / 20


def test_gear_relation_endpoints():
    for g in (0.0, 0.01, G20, 0.3, 0.9):
        assert backward_from_forward(1.0, g) == 1.0
    # breakpoint (1 - G^2)/2 = 0.49875 at N = 20
    assert backward_from_forward(0.49875, G20) == 0.0
    assert backward_from_forward(0.3, G20) == 0.0
    assert backward_from_forward(0.499, G20) <= 1e-3


def test_gear_relation_hand_value():
    # (2*0.8 - 1 + 0.0025) / (0.9975*0.8 + 0.005)
    assert backward_from_forward(0.8, G20) == pytest.approx(0.6025 / 0.803, rel=1e-15)


def test_gear_relation_continuous_at_breakpoint():
    bp = (1 - G20 ** 2) / 2
    for d in (1e-10, 1e-12):
        assert abs(backward_from_forward(bp + d, G20)) <= 1e-9
        assert backward_from_forward(bp - d, G20) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 0.5))
def test_gear_relation_bounded_by_forward(eta, g):
    eb = backward_from_forward(eta, g)
    assert 0.0 <= eb <= eta + 1e-15


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 0.99), st.floats(1e-4, 0.01))
def test_gear_relation_increasing(eta, d):
    assert backward_from_forward(eta + d, G20) > backward_from_forward(eta, G20)


def test_gear_relation_validates():
    with pytest.raises(ValueError):
        backward_from_forward(0.0, G20)
    with pytest.raises(ValueError):
        backward_from_forward(0.8, 1.0)


def test_transmission_spec():
    t = TransmissionSpec(gear_ratio=20, forward_efficiency=0.7, rotor_inertia=6.4e-5, torque_limit=17)
    assert t.reduction == G20
    assert t.backward_efficiency == pytest.approx(0.5723427, abs=1e-7)
    with pytest.raises(ValueError):
        TransmissionSpec(gear_ratio=20, forward_efficiency=1.2)


def test_chain_maps():
    ch = CoordinateChain.from_ratios([20, 10], parallelogram_topology())
    phi = np.array([2.0, -3.0])
    q = ch.joint_from_motor(ch.motor_from_rotor(phi))
    np.testing.assert_allclose(q, ch.DG @ phi)
    np.testing.assert_allclose(ch.rotor_from_joint(q), phi)
    assert constraint_residual(q, phi, ch) == pytest.approx(0.0, abs=1e-15)
    # power consistency of the dual maps: tau_q . dq = tau_phi . dphi
    tau_q = np.array([0.4, -1.1])
    tau_phi = ch.rotor_torque_from_motor(ch.motor_torque_from_joint(tau_q))
    assert tau_q @ q == pytest.approx(tau_phi @ phi, rel=1e-14)


def test_chain_validation():
    with pytest.raises(DimensionMismatch):
        CoordinateChain(G=np.eye(2), D=np.eye(3))
    with pytest.raises(ValueError):
        CoordinateChain(G=np.array([[1, 0.1], [0, 1]]), D=np.eye(2))
    ch = CoordinateChain.from_ratios([20, 20], np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SingularTopology):
        ch.DG_inverse()
    with pytest.raises(DimensionMismatch):
        constraint_residual([1.0], [1.0, 2.0], ch)


@pytest.mark.parametrize("nb", [0, 3])
def test_constraint_nullspace(nb):
    ch = CoordinateChain.from_ratios([20, 15], parallelogram_topology())
    A = constraint_jacobian(ch, nb)
    K = constraint_nullspace(ch, nb)
    assert A.shape == (2, nb + 4) and K.shape == (nb + 4, nb + 2)
    assert np.abs(A @ K).max() <= 1e-15
    np.testing.assert_array_equal(K[: nb + 2], np.eye(nb + 2))
    assert np.linalg.matrix_rank(K) == nb + 2


def test_assignment_effective_weights():
    a = EfficiencyAssignment(modes=("forward", "backward", "ideal"), eta_f=[0.8, 0.7, 0.9],
                             eta_b=[0.75, 0.5, 0.85])
    np.testing.assert_allclose(a.effective(), [0.8, 2.0, 1.0])
    E = efficiency_matrix(a, 3, 3)
    np.testing.assert_allclose(np.diag(E), [1, 1, 1, 1, 1, 1, 0.8, 2.0, 1.0])
    assert not a.is_uniform()
    assert a.with_mode("backward").is_uniform()


def test_assignment_uniform_uses_gear_relation():
    a = EfficiencyAssignment.uniform("backward", [0.8, 0.7], [G20, G20])
    np.testing.assert_allclose(a.eta_b, [backward_from_forward(0.8, G20), backward_from_forward(0.7, G20)])


def test_assignment_locked():
    a = EfficiencyAssignment.uniform("backward", 0.45, [G20])
    assert a.eta_b[0] == 0.0
    with pytest.raises(LockedTransmission):
        a.effective()
    assert a.with_mode("forward").effective()[0] == 0.45


def test_assignment_validation():
    with pytest.raises(ValueError):
        EfficiencyAssignment(modes=("forward",), eta_f=[0.5], eta_b=[0.6])
    with pytest.raises(DimensionMismatch):
        EfficiencyAssignment(modes=("forward",), eta_f=[0.5, 0.6])
    with pytest.raises(DimensionMismatch):
        efficiency_matrix(EfficiencyAssignment.ideal(2), 3, 3)
    with pytest.raises(ValueError):
        DriveMode.parse("sideways")


def test_classify_mode():
    assert classify_mode(1.0) is DriveMode.FORWARD
    assert classify_mode(-1.0) is DriveMode.BACKWARD
    assert classify_mode(0.0) is DriveMode.IDEAL
