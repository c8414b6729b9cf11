import math

import numpy as np
import pytest

from effdyn.dynamics import (
    RobotState,
    coriolis_matrix,
    dissipative_eom,
    foot_position,
    gravity_forces,
    kinetic_energy,
    kinetic_energy_error_bound,
    limb_jacobian,
    mass_matrix_derivatives,
    measured_energy_error,
    redundant_mass_matrix,
    symmetrize,
)
from effdyn.errors import DegenerateEnergy, DimensionMismatch
from effdyn.modes import DriveMode
from effdyn.oracle import MeshFriction, OracleConfig, simulate_robot_oracle
from effdyn.topology import EfficiencyAssignment, efficiency_matrix


# -- independent planar kinematics ---------------------------------------------

def bodies(model, s):
    """(mass, inertia, com, angle) for base, links and rotors, written out longhand."""
    nb, m = model.nb, model.m
    if nb:
        x, z, pitch = s[:3]
    else:
        x = z = pitch = 0.0
    q, phi = s[nb:nb + m], s[nb + m:]
    out = [(model.base.mass if nb else 0.0, model.base.inertia if nb else 0.0,
            np.array([x, z]), pitch)]
    hx, hz = model.base.hip_offset
    joint = np.array([x + hx * math.cos(pitch) - hz * math.sin(pitch),
                      z + hx * math.sin(pitch) + hz * math.cos(pitch)])
    angle = pitch
    body_angle = [pitch]
    for i, link in enumerate(model.links):
        angle = angle - q[i]
        u = np.array([math.cos(angle), math.sin(angle)])
        out.append((link.mass, link.inertia, joint + link.com * u, angle))
        joint = joint + link.length * u
        body_angle.append(angle)
    for j, t in enumerate(model.transmissions):
        out.append((0.0, t.rotor_inertia, np.zeros(2), body_angle[model.mounts[j]] - phi[j]))
    return out, joint


def fd_jacobian(fun, s, h=1e-6):
    cols = []
    for k in range(len(s)):
        e = np.zeros(len(s))
        e[k] = h
        cols.append((np.asarray(fun(s + e)) - np.asarray(fun(s - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def oracle_mass(model, s):
    n = len(s)
    M = np.zeros((n, n))
    for i in range(len(bodies(model, s)[0])):
        Jp = fd_jacobian(lambda v: bodies(model, v)[0][i][2], s)
        Ja = fd_jacobian(lambda v: bodies(model, v)[0][i][3], s)
        mass, inertia = bodies(model, s)[0][i][:2]
        M += mass * Jp.T @ Jp + inertia * np.outer(Ja, Ja)
    return M


def oracle_potential(model, s):
    g = np.asarray(model.gravity)
    return -sum(mass * g @ p for mass, _, p, _ in bodies(model, s)[0])


def random_s(model, rng):
    y = rng.uniform(-1, 1, model.n_reduced)
    return RobotState.from_reduced(model, y, rng.uniform(-2, 2, model.n_reduced))


# -- tests ----------------------------------------------------------------------

def test_preset_foot_position(leg):
    np.testing.assert_allclose(foot_position(leg.model, leg.state), [0.0, -0.3 * math.sqrt(3)],
                               atol=1e-15)
    assert leg.model.n_redundant == 7
    np.testing.assert_allclose(leg.state.phi, 20 * leg.state.q)


@pytest.mark.parametrize("which", ["leg", "fixed_leg"])
def test_mass_matrix_matches_point_kinematics(which, request, rng):
    model = request.getfixturevalue(which).model
    for _ in range(3):
        st = random_s(model, rng)
        M = redundant_mass_matrix(model, st)
        np.testing.assert_allclose(M, oracle_mass(model, st.s), atol=1e-8)
        assert np.allclose(M, M.T)
        assert np.linalg.eigvalsh(M).min() > 0


def test_foot_matches_point_kinematics(leg, rng):
    st = random_s(leg.model, rng)
    np.testing.assert_allclose(foot_position(leg.model, st), bodies(leg.model, st.s)[1], atol=1e-14)
    J = fd_jacobian(lambda v: bodies(leg.model, v)[1], st.s)
    np.testing.assert_allclose(limb_jacobian(leg.model, st), J[:, 3:5], atol=1e-8)


def test_mass_derivatives_by_differences(leg, rng):
    model = leg.model
    st = random_s(model, rng)
    dM = mass_matrix_derivatives(model, st)
    fd = fd_jacobian(lambda v: redundant_mass_matrix(model, v), st.s)
    np.testing.assert_allclose(dM, fd.transpose(2, 0, 1), atol=1e-8)


def test_coriolis_from_lagrangian(leg, rng):
    """C v equals Mdot v - 1/2 d(v^T M v)/ds, both by differences."""
    model = leg.model
    st = random_s(model, rng)
    s, v = st.s, st.ds
    h = 1e-6
    Mdot = (redundant_mass_matrix(model, s + h * v) - redundant_mass_matrix(model, s - h * v)) / (2 * h)
    grad = fd_jacobian(lambda x: v @ redundant_mass_matrix(model, x) @ v, s)
    expected = Mdot @ v - 0.5 * grad
    C = coriolis_matrix(model, st)
    np.testing.assert_allclose(C @ v, expected, atol=1e-7)
    N = Mdot - 2 * C
    np.testing.assert_allclose(N, -N.T, atol=1e-7)


def test_coriolis_needs_velocity(leg):
    with pytest.raises(ValueError):
        coriolis_matrix(leg.model, leg.state.s)
    with pytest.raises(DimensionMismatch):
        redundant_mass_matrix(leg.model, np.zeros(4))


def test_gravity_is_potential_gradient(leg, rng):
    st = random_s(leg.model, rng)
    grad = fd_jacobian(lambda v: oracle_potential(leg.model, v), st.s)
    np.testing.assert_allclose(gravity_forces(leg.model, st), grad, atol=1e-8)
    total = leg.model.base.mass + sum(l.mass for l in leg.model.links)
    assert gravity_forces(leg.model, st)[1] == pytest.approx(9.81 * total)


def test_state_constructors(leg):
    st = RobotState.from_reduced(leg.model, leg.state.y, np.arange(5.0))
    assert st.constraint_error(leg.model) < 1e-12
    st.check_consistent(leg.model)
    bad = RobotState(q_b=st.q_b, q=st.q, phi=st.phi + 1e-3)
    with pytest.raises(ValueError):
        bad.check_consistent(leg.model)
    with pytest.raises(DimensionMismatch):
        RobotState.from_reduced(leg.model, np.zeros(3))
    with pytest.raises(DimensionMismatch):
        RobotState(q_b=[0, 0, 0], q=[1, 2], phi=[1])


def test_ideal_projection_is_symmetric_reduced_inertia(leg, rng):
    st = random_s(leg.model, rng)
    eom = dissipative_eom(leg.model, st, EfficiencyAssignment.ideal(2))
    M = redundant_mass_matrix(leg.model, st)
    np.testing.assert_allclose(eom.H, eom.K.T @ M @ eom.K, rtol=1e-14)
    np.testing.assert_allclose(eom.H, eom.H.T, atol=1e-15)
    # kinetic energy is the same in reduced and redundant form
    T = 0.5 * st.dy @ eom.H @ st.dy
    assert T == pytest.approx(kinetic_energy(leg.model, st), rel=1e-12)


def test_lossy_projection_is_not_symmetric(leg):
    eom = dissipative_eom(leg.model, leg.state, leg.model.assignment(DriveMode.FORWARD))
    assert np.abs(eom.H - eom.H.T).max() > 1e-6


def test_energy_error_equals_bound_for_uniform_efficiency(leg, rng):
    model = leg.model
    for eta in (0.6, 0.8, 0.95):
        bound = kinetic_energy_error_bound(eta)
        assert bound == pytest.approx((1 - math.sqrt(eta)) ** 2 / (1 + eta), rel=1e-15)
        a = EfficiencyAssignment(modes=("forward",) * 2, eta_f=[eta, eta])
        E = efficiency_matrix(a, model.nb, model.m)
        for _ in range(5):
            st = random_s(model, rng)
            M = redundant_mass_matrix(model, st)
            err = measured_energy_error(M, E, st.ds, model.m)
            assert err.e_c == pytest.approx(-bound, rel=1e-7)  # cancellation near eta = 1
            assert err.T_ns == pytest.approx(0.5 * st.ds @ E @ M @ st.ds)


def test_energy_bound_values():
    assert kinetic_energy_error_bound(1.0) == 0.0
    assert round(100 * kinetic_energy_error_bound(0.6), 1) == 3.2
    assert round(100 * kinetic_energy_error_bound(0.8), 1) == 0.6
    with pytest.raises(ValueError):
        kinetic_energy_error_bound(0.0)


def test_symmetrize():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    S = symmetrize(M, np.diag([1.0, 0.64]))
    np.testing.assert_allclose(S, [[2.0, 0.8], [0.8, 0.64 * 3.0]])


def test_degenerate_energy(leg):
    M = redundant_mass_matrix(leg.model, leg.state)
    E = np.eye(7)
    with pytest.raises(DegenerateEnergy):
        measured_energy_error(M, E, np.zeros(7), 2)
    v = np.zeros(7)
    v[5] = 1.0  # rotor only, no coupling with the rest
    M2 = M.copy()
    M2[:5, 5:] = 0.0
    M2[5:, :5] = 0.0
    with pytest.raises(DegenerateEnergy):
        measured_energy_error(M2, E, v, 2)


@pytest.mark.parametrize("tau, f_ext", [
    ((0.05, 0.05), None),
    ((0.05, -0.03), None),
    ((0.0, 0.0), (3.0, 8.0)),
    ((-0.02, 0.01), (-5.0, 2.0)),
])
def test_reduced_accelerations_match_friction_oracle(fixed_leg, tau, f_ext):
    """One oracle step from rest fixes the mesh modes; the projected model with
    those modes must give the same accelerations."""
    model = fixed_leg.model
    a = model.assignment(DriveMode.FORWARD)
    fr = MeshFriction.from_assignment(a)
    traj = simulate_robot_oracle(
        model, fixed_leg.state, fr, OracleConfig(h=1e-6, duration=1e-6),
        tau_phi=lambda t, st: np.array(tau),
        f_ext=None if f_ext is None else (lambda t, st: np.array(f_ext)), gravity=False)
    assert traj.consistent[0]
    modes = tuple({"F": DriveMode.FORWARD, "B": DriveMode.BACKWARD}[p] for p in traj.modes[0])
    assign = EfficiencyAssignment(modes=modes, eta_f=a.eta_f, eta_b=a.eta_b)
    eom = dissipative_eom(model, fixed_leg.state, assign, gravity=False)
    ydd = eom.accelerations(np.array(tau), None if f_ext is None else np.array(f_ext))
    np.testing.assert_allclose(traj.sdd[0][:2], ydd, rtol=1e-9, atol=1e-9)
