"""Multiple-shooting transcription and Gauss-Newton SQP behavior."""

from __future__ import annotations

import numpy as np
import pytest

from flatvars.autodiff import gradient, jacobian
from flatvars.dynamics import (
    ORIENTATION,
    STATE_SIZE,
    QuadrotorModel,
    QuadrotorParams,
    RigidBodyState,
    integrate_step,
    rollout,
)
from flatvars.errors import SolverError, ValidationError
from flatvars.sqp import (
    SqpSettings,
    load_solution,
    quadrotor_hover_instance,
    save_solution,
    shift_guess,
    solve,
    transcribe,
)

from oracles import finite_difference_jacobian, gradient_descent


MILD_TERMINAL = np.array([500.0] * 3 + [200.0] * 3 + [100.0] * 3 + [50.0] * 3)


@pytest.fixture(scope="module")
def hover_instance_small():
    # short horizon cannot reach the full default setpoint aggressiveness;
    # milder terminal weights keep this a well-scaled fixture
    return quadrotor_hover_instance(horizon=10, dt=0.05, terminal_weights=MILD_TERMINAL)


# ---------------------------------------------------------------------------
# Transcription


def test_defects_vanish_on_rollout_consistent_trajectory(hover_instance_small):
    inst = hover_instance_small
    trans = transcribe(inst)
    rng = np.random.default_rng(0)
    hover = inst.model.nominal_input()
    inputs = hover * rng.uniform(0.9, 1.1, size=(inst.horizon, inst.n_inputs))
    states = rollout(inst.initial_state, inputs, inst.dt, inst.model)
    defects = trans.defects_from(states, list(inputs))
    assert defects.shape == (inst.horizon * 12,)
    assert np.array_equal(defects, np.zeros(inst.horizon * 12))


def test_defect_count_is_twelve_per_interval(hover_instance_small):
    trans = transcribe(hover_instance_small)
    assert trans.n_defects == hover_instance_small.horizon * 12
    _, defect_fn = trans.buffer_functions()
    assert defect_fn.n_out == trans.n_defects
    assert defect_fn.n_in == 13 * 11 + 4 * 10


def test_cost_zero_at_reference_with_reference_inputs():
    inst = quadrotor_hover_instance(horizon=5, start_position=(0.0, 0.0, 0.0))
    trans = transcribe(inst)
    states = [inst.state_reference(k).copy() for k in range(inst.horizon + 1)]
    inputs = [inst.input_reference(k).copy() for k in range(inst.horizon)]
    assert trans.cost_from(states, inputs) == 0.0
    cost_fn, _ = trans.buffer_functions()
    z = trans.default_guess()
    for k, offset in enumerate(trans.state_offsets):
        z[offset : offset + STATE_SIZE] = states[k]
    for k, offset in enumerate(trans.input_offsets):
        z[offset : offset + inst.n_inputs] = inputs[k]
    assert float(cost_fn(z)) == 0.0
    assert np.allclose(gradient(cost_fn, z), np.zeros(z.size), atol=1e-12)


def test_buffer_defect_jacobian_matches_finite_differences():
    inst = quadrotor_hover_instance(horizon=2, dt=0.05)
    trans = transcribe(inst)
    _, defect_fn = trans.buffer_functions()
    z = trans.default_guess()
    rng = np.random.default_rng(1)
    z += rng.normal(scale=1e-2, size=z.size)
    for offset in trans.state_offsets:  # keep quaternions unit for a fair check
        q = z[offset + 3 : offset + 7]
        q /= np.linalg.norm(q)
    ours = jacobian(defect_fn, z)
    fd = finite_difference_jacobian(defect_fn, z, step=1e-6)
    assert np.allclose(ours, fd, rtol=1e-5, atol=1e-6)


# ---------------------------------------------------------------------------
# Validation


def test_infeasible_bounds_rejected_before_iterating():
    inst = quadrotor_hover_instance(horizon=3)
    inst.input_lower[:] = 10.0
    inst.input_upper[:] = 1.0
    with pytest.raises(ValidationError):
        solve(inst)


def test_denormalized_guess_quaternion_rejected(hover_instance_small):
    trans = transcribe(hover_instance_small)
    guess = trans.default_guess()
    guess[trans.state_offsets[3] + 3 : trans.state_offsets[3] + 7] = (0.0, 0.0, 0.0, 1.5)
    with pytest.raises(ValidationError):
        solve(hover_instance_small, guess)


def test_wrong_guess_length_rejected(hover_instance_small):
    with pytest.raises(ValidationError):
        solve(hover_instance_small, np.zeros(7))


def test_non_finite_guess_raises_solver_error(hover_instance_small):
    trans = transcribe(hover_instance_small)
    guess = trans.default_guess()
    guess[trans.state_offsets[2] + 7] = 1e200  # absurd velocity overflows the cost
    with pytest.raises(SolverError) as err:
        solve(hover_instance_small, guess)
    assert err.value.iterate is not None


# ---------------------------------------------------------------------------
# Solve behavior


def test_hover_at_hover_converges_immediately():
    inst = quadrotor_hover_instance(horizon=10, start_position=(0.0, 0.0, 0.0))
    solution, report = solve(inst)
    assert report.termination == "converged"
    assert report.iterations <= 2
    assert report.step_norms[-1] < 1e-8
    assert report.defect_history[-1] < 1e-10


def test_hover_offset_small_horizon_converges(hover_instance_small):
    solution, report = solve(hover_instance_small)
    inst = hover_instance_small
    trans = transcribe(inst)
    assert report.termination == "converged"
    assert report.iterations <= 50
    # merit never increases over accepted steps
    merits = np.array(report.merit_history)
    assert np.all(np.diff(merits) <= 1e-9 * np.maximum(1.0, merits[:-1]))
    assert report.defect_history[-1] < 1e-6
    # the 0.5 s horizon cannot fully reach the 1 m setpoint; require clear progress
    final_state = solution[trans.state_offsets[-1] : trans.state_offsets[-1] + STATE_SIZE]
    assert np.linalg.norm(final_state[0:3]) < 0.8 * np.linalg.norm(inst.initial_state[0:3])
    # quaternions stay unit along the whole solution
    for offset in trans.state_offsets:
        q = solution[offset + 3 : offset + 7]
        assert abs(np.linalg.norm(q) - 1.0) < 1e-9
    # inputs respect their box
    for offset in trans.input_offsets:
        u = solution[offset : offset + inst.n_inputs]
        assert np.all(u >= inst.input_lower - 1e-12)
        assert np.all(u <= inst.input_upper + 1e-12)


def test_map_flavors_give_bitwise_identical_solutions(hover_instance_small):
    sol_lazy, rep_lazy = solve(hover_instance_small, map_flavor="lazy")
    sol_eager, rep_eager = solve(hover_instance_small, map_flavor="eager")
    assert np.array_equal(sol_lazy, sol_eager)
    assert rep_lazy.iterations == rep_eager.iterations
    assert rep_lazy.merit_history == rep_eager.merit_history


def test_unknown_map_flavor_rejected(hover_instance_small):
    with pytest.raises(ValidationError):
        solve(hover_instance_small, map_flavor="magic")


def test_iteration_cap_respected():
    inst = quadrotor_hover_instance(horizon=10, start_position=(40.0, 0.0, 0.0))
    settings = SqpSettings(max_iterations=2)
    _, report = solve(inst, settings=settings)
    assert report.iterations == 2
    assert report.termination in ("iteration_limit", "converged")


# ---------------------------------------------------------------------------
# Cross-check against a single-shooting first-order oracle


def test_multiple_shooting_cost_matches_single_shooting_descent():
    inst = quadrotor_hover_instance(
        horizon=10, dt=0.05, input_bound_scale=1e9, terminal_weights=MILD_TERMINAL
    )
    trans = transcribe(inst)
    solution, report = solve(inst)
    assert report.termination == "converged"
    cost_ms = report.final_cost

    n, m = inst.horizon, inst.n_inputs

    def shoot_cost_generic(u_flat):
        states = [inst.initial_state]
        inputs = []
        for k in range(n):
            inputs.append(u_flat[m * k : m * (k + 1)])
            states.append(integrate_step(states[-1], inputs[-1], inst.dt, inst.model))
        return trans.cost_from(states, inputs)

    def oracle_cost(u_flat):
        return float(shoot_cost_generic(u_flat))

    def oracle_grad(u_flat):
        return gradient(shoot_cost_generic, u_flat)

    u0 = np.tile(inst.model.nominal_input(), n)
    u_star, cost_ss, iters = gradient_descent(oracle_cost, oracle_grad, u0, max_iters=800)
    # the solver may do no worse than the first-order oracle, and both
    # should be looking at the same optimum
    assert cost_ms <= cost_ss + 1e-6 * (1.0 + abs(cost_ss))
    assert abs(cost_ms - cost_ss) / max(cost_ss, 1e-12) < 0.05


# ---------------------------------------------------------------------------
# Guess shifting and serialization


def test_shift_guess_moves_trajectory_forward(hover_instance_small):
    inst = hover_instance_small
    trans = transcribe(inst)
    solution, _ = solve(inst)
    shifted = shift_guess(trans, solution)
    s1 = solution[trans.state_offsets[1] : trans.state_offsets[1] + STATE_SIZE]
    assert np.array_equal(shifted[trans.state_offsets[0] : trans.state_offsets[0] + STATE_SIZE], s1)
    # a defect-free solution must shift into a defect-free guess
    states, inputs = trans.split(shifted)
    assert np.abs(trans.defects_from(states, inputs)).max() < 1e-9


def test_solution_serialization_roundtrip(tmp_path, hover_instance_small):
    solution, report = solve(hover_instance_small)
    path = tmp_path / "solution.txt"
    save_solution(path, hover_instance_small, solution, report)
    header, loaded = load_solution(path)
    assert header["termination"] == report.termination
    assert int(header["horizon"]) == hover_instance_small.horizon
    assert np.array_equal(loaded, solution)
