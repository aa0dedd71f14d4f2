"""Rigid-body models, group integration, and Jacobian smoothness checks."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from flatvars.autodiff import concat, jacobian
from flatvars.dynamics import (
    ANGULAR_VELOCITY,
    LINEAR_VELOCITY,
    ORIENTATION,
    POSITION,
    QuadrotorModel,
    QuadrotorParams,
    RigidBodyState,
    SrbdModel,
    SrbdParams,
    integrate_step,
    quadrotor_dynamics,
    quat_step,
    read_params_file,
    rollout,
    srbd_dynamics,
)
from flatvars.errors import DomainError, ValidationError
from flatvars.quat import qmul, quat_exp, quat_log, qrotate

from oracles import axis_angle_quaternion, finite_difference_jacobian

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# Quaternion primitives against scipy


def test_quat_exp_log_match_scipy():
    rng = np.random.default_rng(1)
    for _ in range(50):
        phi = rng.normal(size=3) * rng.uniform(0.0, 2.5)
        q = quat_exp(phi)
        assert np.allclose(q, Rotation.from_rotvec(phi).as_quat(), atol=1e-12)
        assert np.allclose(quat_log(q), Rotation.from_quat(q).as_rotvec(), atol=1e-10)


def test_quat_mul_and_rotate_match_scipy():
    rng = np.random.default_rng(2)
    for _ in range(50):
        qa = Rotation.random(random_state=int(rng.integers(1 << 30))).as_quat()
        qb = Rotation.random(random_state=int(rng.integers(1 << 30))).as_quat()
        composed = (Rotation.from_quat(qa) * Rotation.from_quat(qb)).as_quat()
        ours = qmul(qa, qb)
        assert np.allclose(ours, composed, atol=1e-12) or np.allclose(-ours, composed, atol=1e-12)
        v = rng.normal(size=3)
        assert np.allclose(qrotate(qa, v), Rotation.from_quat(qa).apply(v), atol=1e-12)


def test_quat_log_handles_negative_w_and_small_angles():
    q = -axis_angle_quaternion([0.0, 0.0, 1.0], 0.3)
    assert np.allclose(quat_log(q), [0.0, 0.0, 0.3], atol=1e-12)
    tiny = quat_exp(np.array([1e-9, -2e-9, 0.5e-9]))
    assert np.allclose(quat_log(tiny), [1e-9, -2e-9, 0.5e-9], rtol=1e-6, atol=1e-15)


# ---------------------------------------------------------------------------
# quat_step


def test_quat_step_zero_rate_is_identity():
    assert np.array_equal(quat_step(IDENTITY, np.zeros(3), 0.01), IDENTITY)


def test_quat_step_half_turn_yaw():
    q = quat_step(IDENTITY, np.array([0.0, 0.0, np.pi]), 1.0)
    expected = axis_angle_quaternion([0.0, 0.0, 1.0], np.pi)
    assert np.allclose(q, expected, atol=1e-12) or np.allclose(q, -expected, atol=1e-12)


def test_quat_step_matches_axis_angle_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(30):
        w = rng.normal(size=3)
        dt = rng.uniform(1e-4, 0.5)
        start = Rotation.random(random_state=int(rng.integers(1 << 30))).as_quat()
        stepped = quat_step(start, w, dt)
        oracle = (
            Rotation.from_quat(start) * Rotation.from_rotvec(w * dt)
        ).as_quat()
        assert np.allclose(stepped, oracle, atol=1e-12) or np.allclose(-stepped, oracle, atol=1e-12)


def test_quat_step_norm_conserved_over_many_steps():
    rng = np.random.default_rng(4)
    q = IDENTITY.copy()
    additive = IDENTITY.copy()
    dt = 0.01
    for _ in range(10_000):
        w = rng.normal(size=3) * 3.0
        q = quat_step(q, w, dt)
        # additive (embedding-space Euler) twin for comparison
        additive = additive + 0.5 * qmul(additive, np.concatenate([w, [0.0]])) * dt
    ours = abs(np.linalg.norm(q) - 1.0)
    theirs = abs(np.linalg.norm(additive) - 1.0)
    assert ours < 1e-9
    assert theirs > 1e-3, "additive Euler should drift; otherwise this check is vacuous"
    assert ours < theirs


def test_quat_step_single_step_norm_tolerance():
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = Rotation.random(random_state=int(rng.integers(1 << 30))).as_quat()
        w = rng.normal(size=3) * 10.0
        dt = rng.uniform(1e-5, np.pi / (np.linalg.norm(w) + 1e-12))
        assert abs(np.linalg.norm(quat_step(q, w, dt)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# Quadrotor dynamics


@pytest.fixture(scope="module")
def params():
    return QuadrotorParams()


def test_hover_is_equilibrium(params):
    x = RigidBodyState.at_rest().pack()
    deriv = quadrotor_dynamics(x, params.hover_input(), params)
    assert np.allclose(deriv, np.zeros(9), atol=1e-12)


def test_free_fall_when_rotors_off(params):
    x = RigidBodyState.at_rest((0.0, 0.0, 5.0)).pack()
    deriv = quadrotor_dynamics(x, np.zeros(4), params)
    assert np.allclose(deriv[0:3], np.zeros(3))
    assert np.allclose(deriv[3:6], [0.0, 0.0, -params.gravity])
    assert np.allclose(deriv[6:9], np.zeros(3))


def test_asymmetric_rotors_produce_lever_arm_torque(params):
    x = RigidBodyState.at_rest().pack()
    hover = params.hover_rotor_speed()
    speeds = np.array([1.2 * hover, hover, 0.8 * hover, hover])
    deriv = quadrotor_dynamics(x, speeds, params)
    thrusts = params.thrust_coeff * speeds**2
    # rotors 0 and 2 sit at (+/- arm, 0, 0): thrust imbalance pitches about y
    torque_y = params.arm_length * (thrusts[2] - thrusts[0])
    torque_z = params.drag_coeff * (speeds[0] ** 2 - speeds[1] ** 2 + speeds[2] ** 2 - speeds[3] ** 2)
    inertia = np.asarray(params.inertia)
    assert abs(deriv[6]) < 1e-12
    assert np.isclose(deriv[7], torque_y / inertia[1], rtol=1e-9)
    assert np.isclose(deriv[8], torque_z / inertia[2], rtol=1e-9)


def test_tilted_hover_accelerates_sideways(params):
    q = axis_angle_quaternion([0.0, 1.0, 0.0], 0.3)
    x = np.concatenate([np.zeros(3), q, np.zeros(3), np.zeros(3)])
    deriv = quadrotor_dynamics(x, params.hover_input(), params)
    thrust_dir = Rotation.from_quat(q).apply([0.0, 0.0, 1.0])
    expected = params.gravity * thrust_dir - np.array([0.0, 0.0, params.gravity])
    assert np.allclose(deriv[3:6], expected, atol=1e-12)


def test_negative_rotor_speed_rejected(params):
    x = RigidBodyState.at_rest().pack()
    with pytest.raises(DomainError):
        quadrotor_dynamics(x, np.array([-1.0, 0.0, 0.0, 0.0]), params)


# ---------------------------------------------------------------------------
# Single rigid body dynamics


def test_srbd_free_fall():
    model = SrbdModel(contact_flags=(0, 0, 0, 0))
    x = RigidBodyState.at_rest((0.0, 0.0, 1.0)).pack()
    deriv = model(x, np.zeros(model.n_inputs))
    assert np.allclose(deriv[3:6], [0.0, 0.0, -model.params.gravity])
    assert np.allclose(deriv[6:9], np.zeros(3))


def test_srbd_symmetric_stand_is_equilibrium():
    model = SrbdModel()
    x = RigidBodyState.at_rest((0.0, 0.0, 0.4)).pack()
    deriv = model(x, model.nominal_input())
    assert np.allclose(deriv, np.zeros(9), atol=1e-10)


def test_srbd_single_leg_torque_matches_cross_product():
    params = SrbdParams()
    model = SrbdModel(params, contact_flags=(1, 0, 0, 0))
    x = RigidBodyState.at_rest().pack()
    u = np.zeros(model.n_inputs)
    force = np.array([0.0, 0.0, params.mass * params.gravity])
    lever = np.array([0.2, 0.0, -0.3])
    u[0:3] = force
    u[3:6] = lever
    deriv = model(x, u)
    torque = np.cross(lever, force)  # identity attitude: world == body
    assert np.allclose(deriv[6:9], torque / np.asarray(params.inertia), rtol=1e-12)
    assert np.allclose(deriv[3:6], np.zeros(3), atol=1e-12)


def test_srbd_contact_flags_gate_forces():
    model_on = SrbdModel(contact_flags=(1, 1, 1, 1))
    model_off = SrbdModel(contact_flags=(0, 0, 0, 0))
    x = RigidBodyState.at_rest().pack()
    u = model_on.nominal_input()
    assert np.allclose(model_off(x, u)[3:6], [0.0, 0.0, -model_off.params.gravity])
    assert np.allclose(model_on(x, u)[3:6], np.zeros(3), atol=1e-10)


# ---------------------------------------------------------------------------
# Integration


def test_semi_implicit_kinematics_order(params):
    model = QuadrotorModel(params)
    x = RigidBodyState.at_rest((0.0, 0.0, 2.0)).pack()
    dt = 0.1
    nxt = integrate_step(x, np.zeros(4), dt, model)
    # velocities update first; position uses the updated velocity
    assert np.isclose(nxt[9], -params.gravity * dt)
    assert np.isclose(nxt[2], 2.0 - params.gravity * dt * dt)
    assert abs(np.linalg.norm(nxt[ORIENTATION]) - 1.0) < 1e-12


def test_hover_rollout_preserves_position(params):
    model = QuadrotorModel(params)
    x = RigidBodyState.at_rest((1.0, -2.0, 3.0)).pack()
    inputs = np.tile(params.hover_input(), (100, 1))
    states = rollout(x, inputs, 0.02, model)
    drift = np.linalg.norm(states[-1][POSITION] - x[POSITION])
    assert drift < 1e-6
    assert np.allclose(states[-1][LINEAR_VELOCITY], np.zeros(3), atol=1e-9)


def test_rk4_more_accurate_than_semi_implicit_on_smooth_motion(params):
    model = QuadrotorModel(params)
    x = RigidBodyState.at_rest().pack()
    x[ANGULAR_VELOCITY] = (0.4, -0.2, 0.6)
    u = params.hover_input() * 1.05
    dt = 0.05

    def reference(x0, total):
        steps = 2000
        y = x0
        for _ in range(steps):
            y = integrate_step(y, u, total / steps, model, method="rk4")
        return y

    ref = reference(x, dt)
    semi = integrate_step(x, u, dt, model, method="semi_implicit")
    rk4 = integrate_step(x, u, dt, model, method="rk4")
    assert np.linalg.norm(rk4 - ref) < np.linalg.norm(semi - ref)
    assert abs(np.linalg.norm(rk4[ORIENTATION]) - 1.0) < 1e-12


def test_integrate_step_rejects_bad_arguments(params):
    model = QuadrotorModel(params)
    x = RigidBodyState.at_rest().pack()
    with pytest.raises(DomainError):
        integrate_step(x, np.zeros(4), 0.0, model)
    with pytest.raises(ValidationError):
        integrate_step(x, np.zeros(4), 0.1, model, method="euler")


# ---------------------------------------------------------------------------
# Smoothness: forward-mode Jacobians agree with central differences


def _quad_single_buffer(params):
    model = QuadrotorModel(params)

    def f(buf):
        return model(buf[0:13], buf[13:17])

    return f


def _srbd_single_buffer():
    model = SrbdModel(contact_flags=(1, 1, 0, 1))

    def f(buf):
        return model(buf[0:13], buf[13:37])

    return f


def _random_rigid_state(rng):
    q = Rotation.random(random_state=int(rng.integers(1 << 30))).as_quat()
    return np.concatenate([rng.normal(size=3), q, rng.normal(size=3), rng.normal(size=3)])


def test_quadrotor_jacobian_matches_finite_differences(params):
    f = _quad_single_buffer(params)
    rng = np.random.default_rng(8)
    hover = params.hover_rotor_speed()
    for _ in range(25):
        buf = np.concatenate([_random_rigid_state(rng), hover * rng.uniform(0.5, 1.5, size=4)])
        ours = jacobian(f, buf)
        fd = finite_difference_jacobian(f, buf, step=1e-6)
        assert np.allclose(ours, fd, rtol=1e-5, atol=1e-6)


def test_srbd_jacobian_matches_finite_differences():
    f = _srbd_single_buffer()
    rng = np.random.default_rng(9)
    for _ in range(25):
        buf = np.concatenate([_random_rigid_state(rng), rng.normal(size=24) * 50.0])
        ours = jacobian(f, buf)
        fd = finite_difference_jacobian(f, buf, step=1e-6)
        assert np.allclose(ours, fd, rtol=1e-5, atol=1e-5)


def test_integrate_step_is_dual_compatible(params):
    model = QuadrotorModel(params)

    def f(buf):
        return integrate_step(buf[0:13], buf[13:17], 0.05, model)

    rng = np.random.default_rng(10)
    buf = np.concatenate([_random_rigid_state(rng), params.hover_input()])
    ours = jacobian(f, buf)
    fd = finite_difference_jacobian(f, buf, step=1e-6)
    assert np.allclose(ours, fd, rtol=1e-5, atol=1e-6)


# ---------------------------------------------------------------------------
# Parameter files


def test_params_file_roundtrip(tmp_path):
    text = "\n".join(
        [
            "# demo vehicle",
            "mass=0.75",
            "inertia_x=3e-3",
            "inertia_y = 3e-3",
            "inertia_z=5e-3  # yaw-heavy",
            "thrust_coeff=2.5e-6",
            "arm_length=0.2",
        ]
    )
    path = tmp_path / "vehicle.params"
    path.write_text(text)
    params = QuadrotorParams.from_file(path)
    assert params.mass == 0.75
    assert params.inertia == (3e-3, 3e-3, 5e-3)
    assert params.arm_length == 0.2
    assert params.gravity == 9.81  # default retained


def test_params_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.params"
    path.write_text("mas=0.5\n")
    with pytest.raises(ValidationError):
        QuadrotorParams.from_file(path)
    path.write_text("mass 0.5\n")
    with pytest.raises(ValidationError):
        read_params_file(path)


def test_params_positivity_enforced():
    with pytest.raises(ValidationError):
        QuadrotorParams(mass=-1.0)
    with pytest.raises(ValidationError):
        SrbdParams(inertia=(0.0, 1.0, 1.0))
