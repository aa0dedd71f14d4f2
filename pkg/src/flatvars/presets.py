"""Ready-made variable hierarchies for the demo systems and benchmarks.

Node names inside the hierarchies are short on purpose (``x``, ``X``, ``u``,
``U``): they are the strings used in queries, and deep trees are easier to
read that way.  The Python-level attributes spell out what each one is.
"""

from __future__ import annotations

from dataclasses import dataclass

from .variables import (
    QUATERNION,
    SCALAR,
    Hierarchy,
    bind,
    build,
    concat,
    leaf,
    replicate,
    vector,
)


def _rigid_body_state_parts():
    return [
        leaf("position", vector(3)),
        leaf("orientation", QUATERNION),
        leaf("linear_velocity", vector(3)),
        leaf("angular_velocity", vector(3)),
    ]


@dataclass(frozen=True)
class QuadrotorVariables:
    """Multirotor OCP decision variables: per-step state/input stacks."""

    horizon: int
    rotor_count: int
    state: Hierarchy              # "x": pose + velocities, size 13
    stacked_states: Hierarchy     # "X": horizon+1 copies of x
    input: Hierarchy              # "u": one rotor speed per rotor
    stacked_inputs: Hierarchy     # "U": horizon copies of u
    decision_variables: Hierarchy


def quadrotor_variables(horizon: int = 30, rotor_count: int = 4) -> QuadrotorVariables:
    x = bind("x", concat(_rigid_body_state_parts()))
    big_x = bind("X", replicate(horizon + 1, x))
    u = bind("u", replicate(rotor_count, leaf("rotor_speed", SCALAR)))
    big_u = bind("U", replicate(horizon, u))
    decision = bind("decision_variables", concat([big_x, big_u]))
    return QuadrotorVariables(
        horizon=horizon,
        rotor_count=rotor_count,
        state=build(x),
        stacked_states=build(big_x),
        input=build(u),
        stacked_inputs=build(big_u),
        decision_variables=build(decision),
    )


@dataclass(frozen=True)
class LocomotionVariables:
    """Quadruped locomotion OCP: per-leg contact force + foothold inputs."""

    horizon: int
    leg_count: int
    leg_input: Hierarchy          # force + relative foot position, size 6
    state: Hierarchy
    stacked_states: Hierarchy
    input: Hierarchy
    stacked_inputs: Hierarchy
    decision_variables: Hierarchy


def locomotion_variables(horizon: int = 30, leg_count: int = 4) -> LocomotionVariables:
    leg_input = bind(
        "leg_input",
        concat([leaf("force", vector(3)), leaf("relative_position", vector(3))]),
    )
    x = bind("x", concat(_rigid_body_state_parts()))
    big_x = bind("X", replicate(horizon + 1, x))
    u = bind("u", replicate(leg_count, leg_input))
    big_u = bind("U", replicate(horizon, u))
    decision = bind("decision_variables", concat([big_x, big_u]))
    return LocomotionVariables(
        horizon=horizon,
        leg_count=leg_count,
        leg_input=build(leg_input),
        state=build(x),
        stacked_states=build(big_x),
        input=build(u),
        stacked_inputs=build(big_u),
        decision_variables=build(decision),
    )


@dataclass(frozen=True)
class ClmVariables:
    """Collaborative loco-manipulation OCP: payload + several one-armed quadrupeds.

    ``position``/``orientation``/... appear under both the payload state and
    each robot state, and ``force`` under both leg and arm inputs, so short
    queries on this tree exercise ambiguity detection.
    """

    horizon: int
    robot_count: int
    leg_count: int
    leg_input: Hierarchy
    arm_input: Hierarchy
    robot_input: Hierarchy
    payload_state: Hierarchy
    robot_state: Hierarchy
    state: Hierarchy
    stacked_states: Hierarchy
    input: Hierarchy
    stacked_inputs: Hierarchy
    decision_variables: Hierarchy


def clm_variables(horizon: int = 10, robot_count: int = 2, leg_count: int = 4) -> ClmVariables:
    leg_input = bind(
        "leg_input",
        concat([leaf("force", vector(3)), leaf("relative_position", vector(3))]),
    )
    arm_input = bind("arm_input", concat([leaf("force", vector(3)), leaf("torque", vector(3))]))
    robot_input = bind("robot_input", concat([replicate(leg_count, leg_input), arm_input]))
    payload_state = bind("payload_state", concat(_rigid_body_state_parts()))
    robot_state = bind("robot_state", concat(_rigid_body_state_parts()))
    x = bind("x", concat([payload_state, replicate(robot_count, robot_state)]))
    big_x = bind("X", replicate(horizon + 1, x))
    u = bind("u", replicate(robot_count, robot_input))
    big_u = bind("U", replicate(horizon, u))
    decision = bind("decision_variables", concat([big_x, big_u]))
    return ClmVariables(
        horizon=horizon,
        robot_count=robot_count,
        leg_count=leg_count,
        leg_input=build(leg_input),
        arm_input=build(arm_input),
        robot_input=build(robot_input),
        payload_state=build(payload_state),
        robot_state=build(robot_state),
        state=build(x),
        stacked_states=build(big_x),
        input=build(u),
        stacked_inputs=build(big_u),
        decision_variables=build(decision),
    )
