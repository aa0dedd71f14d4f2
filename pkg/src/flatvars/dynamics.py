"""Rigid-body models and integrators for the MPC demos.

State layout (13 scalars, shared by every model here):

    position (3, world frame, m)
    orientation (4, unit quaternion x y z w, body-to-world)
    linear velocity (3, world frame, m/s)
    angular velocity (3, body frame, rad/s)

Conventions fixed for the whole package: gravity acts along -z with
magnitude ``gravity``; quadrotor rotors sit on the body x/y axes in a cross
layout; ground-contact forces are expressed in the world frame while the
corresponding torques are taken in the body frame.  Orientation is
integrated on the group (composition with an exponential), which keeps the
quaternion norm at 1 to machine precision without renormalization.

All dynamics functions accept plain arrays or forward-mode duals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import concat, cross, value_of
from .errors import DomainError, ValidationError
from .quat import qmul, qnormalize, qrotate, qrotate_inv, quat_exp

POSITION = slice(0, 3)
ORIENTATION = slice(3, 7)
LINEAR_VELOCITY = slice(7, 10)
ANGULAR_VELOCITY = slice(10, 13)
STATE_SIZE = 13

IDENTITY_QUATERNION = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass
class RigidBodyState:
    """Convenience bundle around the flat 13-scalar state layout."""

    position: np.ndarray
    orientation: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray

    @classmethod
    def at_rest(cls, position=(0.0, 0.0, 0.0)) -> "RigidBodyState":
        return cls(
            np.asarray(position, dtype=float),
            IDENTITY_QUATERNION.copy(),
            np.zeros(3),
            np.zeros(3),
        )

    @classmethod
    def unpack(cls, x) -> "RigidBodyState":
        x = np.asarray(x, dtype=float)
        return cls(
            x[POSITION].copy(),
            x[ORIENTATION].copy(),
            x[LINEAR_VELOCITY].copy(),
            x[ANGULAR_VELOCITY].copy(),
        )

    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.position, self.orientation, self.linear_velocity, self.angular_velocity]
        )


def quat_step(q, w, dt: float):
    """One orientation step: compose with the rotation ``w * dt``.

    Exact on the group: the result stays unit-norm without renormalization.
    """
    return qmul(q, quat_exp(w * dt))


# ---------------------------------------------------------------------------
# Quadrotor


@dataclass(frozen=True)
class QuadrotorParams:
    """Cross-configuration multirotor constants.

    Rotor i sits at angle ``i * 2*pi/n`` from the body x axis at distance
    ``arm_length``; thrust is ``thrust_coeff * speed**2`` along body z, and
    the aerodynamic yaw reaction is ``drag_coeff * speed**2`` with spin
    signs alternating ``+,-,+,-``.  Gravity is a magnitude; the acceleration
    it produces is (0, 0, -gravity).
    """

    mass: float = 0.5
    inertia: tuple = (2.3e-3, 2.3e-3, 4.0e-3)
    thrust_coeff: float = 3.0e-6
    drag_coeff: float = 7.5e-8
    arm_length: float = 0.17
    gravity: float = 9.81
    rotor_count: int = 4

    def __post_init__(self):
        for field_name in ("mass", "thrust_coeff", "drag_coeff", "arm_length", "gravity"):
            if getattr(self, field_name) <= 0.0:
                raise ValidationError(f"{field_name} must be strictly positive")
        if any(i <= 0.0 for i in self.inertia):
            raise ValidationError("inertia entries must be strictly positive")
        if self.rotor_count < 3:
            raise ValidationError("at least three rotors are needed")

    def hover_rotor_speed(self) -> float:
        return float(np.sqrt(self.mass * self.gravity / (self.rotor_count * self.thrust_coeff)))

    def hover_input(self) -> np.ndarray:
        return np.full(self.rotor_count, self.hover_rotor_speed())

    def rotor_positions(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.rotor_count) / self.rotor_count
        return self.arm_length * np.stack(
            [np.cos(angles), np.sin(angles), np.zeros_like(angles)], axis=1
        )

    def spin_signs(self) -> np.ndarray:
        return np.array([1.0 if i % 2 == 0 else -1.0 for i in range(self.rotor_count)])

    @classmethod
    def from_mapping(cls, fields: dict) -> "QuadrotorParams":
        known = {
            "mass",
            "inertia_x",
            "inertia_y",
            "inertia_z",
            "thrust_coeff",
            "drag_coeff",
            "arm_length",
            "gravity",
            "rotor_count",
        }
        unknown = set(fields) - known
        if unknown:
            raise ValidationError(f"unknown parameter keys: {sorted(unknown)}")
        base = cls()
        inertia = (
            float(fields.get("inertia_x", base.inertia[0])),
            float(fields.get("inertia_y", base.inertia[1])),
            float(fields.get("inertia_z", base.inertia[2])),
        )
        return cls(
            mass=float(fields.get("mass", base.mass)),
            inertia=inertia,
            thrust_coeff=float(fields.get("thrust_coeff", base.thrust_coeff)),
            drag_coeff=float(fields.get("drag_coeff", base.drag_coeff)),
            arm_length=float(fields.get("arm_length", base.arm_length)),
            gravity=float(fields.get("gravity", base.gravity)),
            rotor_count=int(fields.get("rotor_count", base.rotor_count)),
        )

    @classmethod
    def from_file(cls, path) -> "QuadrotorParams":
        return cls.from_mapping(read_params_file(path))


def read_params_file(path) -> dict:
    """Parse ``key=value`` lines; '#' starts a comment, blanks are skipped."""
    fields = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"malformed parameter line: {raw!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    return fields


def quadrotor_dynamics(x, rotor_speeds, params: QuadrotorParams):
    """Time derivative (9 scalars: dp, dv, dw) of the multirotor state.

    The orientation rate is left to the integrator's group step; angular
    acceleration is expressed in the body frame.
    """
    speeds_val = value_of(rotor_speeds)
    if np.any(speeds_val < 0.0):
        raise DomainError(f"rotor speeds must be nonnegative, got {speeds_val}")
    q = x[ORIENTATION]
    v = x[LINEAR_VELOCITY]
    w = x[ANGULAR_VELOCITY]

    thrusts = rotor_speeds * rotor_speeds * params.thrust_coeff
    total = thrusts[0:1]
    for i in range(1, params.rotor_count):
        total = total + thrusts[i : i + 1]
    body_force = concat([np.zeros(1), np.zeros(1), total])
    accel = qrotate(q, body_force) / params.mass + np.array([0.0, 0.0, -params.gravity])

    torque = np.zeros(3)
    positions = params.rotor_positions()
    signs = params.spin_signs()
    yaw = params.drag_coeff / params.thrust_coeff  # reaction torque per unit thrust
    for i in range(params.rotor_count):
        f_i = concat([np.zeros(1), np.zeros(1), thrusts[i : i + 1]])
        torque = torque + cross(positions[i], f_i)
        torque = torque + concat([np.zeros(2), thrusts[i : i + 1] * (signs[i] * yaw)])

    inertia = np.asarray(params.inertia, dtype=float)
    ang_accel = (torque - cross(w, inertia * w)) / inertia
    return concat([v, accel, ang_accel])


# ---------------------------------------------------------------------------
# Single rigid body driven by point contacts


@dataclass(frozen=True)
class SrbdParams:
    """Torso constants of a legged robot treated as one rigid body."""

    mass: float = 30.0
    inertia: tuple = (0.35, 1.2, 1.3)
    gravity: float = 9.81
    leg_count: int = 4

    def __post_init__(self):
        if self.mass <= 0.0 or self.gravity <= 0.0:
            raise ValidationError("mass and gravity must be strictly positive")
        if any(i <= 0.0 for i in self.inertia):
            raise ValidationError("inertia entries must be strictly positive")


def srbd_dynamics(x, leg_inputs, contact_flags, params: SrbdParams):
    """Time derivative (9 scalars: dp, dv, dw) of the single-rigid-body state.

    ``leg_inputs`` stacks (force(3), foot position relative to the body(3))
    per leg; forces are world-frame, foot positions body-frame.  A leg
    contributes only while its contact flag is 1.
    """
    q = x[ORIENTATION]
    v = x[LINEAR_VELOCITY]
    w = x[ANGULAR_VELOCITY]
    flags = np.asarray(contact_flags, dtype=float)

    force_sum = np.zeros(3)
    torque = np.zeros(3)
    for i in range(params.leg_count):
        f_i = leg_inputs[6 * i : 6 * i + 3] * flags[i]
        r_i = leg_inputs[6 * i + 3 : 6 * i + 6]
        force_sum = force_sum + f_i
        torque = torque + cross(r_i, qrotate_inv(q, f_i))

    accel = force_sum / params.mass + np.array([0.0, 0.0, -params.gravity])
    inertia = np.asarray(params.inertia, dtype=float)
    ang_accel = (torque - cross(w, inertia * w)) / inertia
    return concat([v, accel, ang_accel])


# ---------------------------------------------------------------------------
# Model handles and integration


class QuadrotorModel:
    """Dynamics handle: callable (state, input) -> 9-scalar derivative."""

    def __init__(self, params: QuadrotorParams | None = None):
        self.params = params or QuadrotorParams()
        self.n_inputs = self.params.rotor_count

    def __call__(self, x, u):
        return quadrotor_dynamics(x, u, self.params)

    def nominal_input(self) -> np.ndarray:
        return self.params.hover_input()


class SrbdModel:
    """Dynamics handle for the single-rigid-body quadruped.

    Contact flags are externally scheduled parameters, fixed per instance.
    """

    def __init__(self, params: SrbdParams | None = None, contact_flags=(1, 1, 1, 1)):
        self.params = params or SrbdParams()
        self.contact_flags = np.asarray(contact_flags, dtype=float)
        self.n_inputs = 6 * self.params.leg_count

    def __call__(self, x, u):
        return srbd_dynamics(x, u, self.contact_flags, self.params)

    def nominal_input(self, foot_positions=None) -> np.ndarray:
        """Symmetric stand: each contact leg carries an equal vertical share."""
        if foot_positions is None:
            foot_positions = [(0.3, 0.2, -0.4), (0.3, -0.2, -0.4), (-0.3, 0.2, -0.4), (-0.3, -0.2, -0.4)]
        active = max(1.0, float(self.contact_flags.sum()))
        share = self.params.mass * self.params.gravity / active
        out = np.zeros(self.n_inputs)
        for i in range(self.params.leg_count):
            out[6 * i + 2] = share if self.contact_flags[i] else 0.0
            out[6 * i + 3 : 6 * i + 6] = foot_positions[i]
        return out


def integrate_step(x, u, dt: float, model, method: str = "semi_implicit"):
    """Advance the 13-scalar state one step.

    ``semi_implicit`` updates velocities first, then positions with the new
    velocities and the orientation with the group step -- so an equilibrium
    of the model is an exact fixed point.  ``rk4`` is a classic fourth-order
    step used for accuracy comparisons; it integrates the quaternion in the
    ambient space and renormalizes once at the end.
    """
    if dt <= 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    if method == "semi_implicit":
        deriv = model(x, u)
        v_next = x[LINEAR_VELOCITY] + deriv[3:6] * dt
        w_next = x[ANGULAR_VELOCITY] + deriv[6:9] * dt
        p_next = x[POSITION] + v_next * dt
        q_next = quat_step(x[ORIENTATION], w_next, dt)
        return concat([p_next, q_next, v_next, w_next])
    if method == "rk4":
        def full_rate(state):
            d = model(state, u)
            q = state[ORIENTATION]
            w = state[ANGULAR_VELOCITY]
            q_rate = qmul(q, concat([w, np.zeros(1)])) * 0.5
            return concat([d[0:3], q_rate, d[3:6], d[6:9]])

        k1 = full_rate(x)
        k2 = full_rate(x + k1 * (dt / 2.0))
        k3 = full_rate(x + k2 * (dt / 2.0))
        k4 = full_rate(x + k3 * dt)
        y = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
        return concat([y[0:3], qnormalize(y[ORIENTATION]), y[7:13]])
    raise ValidationError(f"unknown integration method {method!r}")


def rollout(x0, inputs, dt: float, model, method: str = "semi_implicit"):
    """States visited while applying ``inputs`` row by row (generic over duals)."""
    states = [x0]
    for k in range(len(inputs)):
        states.append(integrate_step(states[-1], inputs[k], dt, model, method))
    return states
