"""Gauss-Newton SQP for multiple-shooting optimal control over flat buffers.

The decision buffer stacks all shooting states and inputs (the ``X``/``U``
hierarchy); consecutive states are tied by per-interval defect constraints
``x_{k+1} - step(x_k, u_k)``.  Orientation defects live in the tangent
space -- the rotation vector of ``q_{k+1}^{-1} (x) step(q_k)`` -- so each
interval contributes 12 equality rows of full rank despite the unit-norm
manifold, and orientation updates are applied by retraction (compose with
an exponential), keeping every iterate's quaternions unit-norm.

The QP step solves a dense KKT system (Gauss-Newton Hessian of the
tracking cost, linearized defects); input box bounds are enforced by
projection inside the line search, which backtracks on an l1 merit
function.  The initial state is handled by pinning: the first state's
tangent coordinates are excluded from the step, so the constraint count
stays at 12 rows per interval.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import DiffFunction, concat, dot, value_and_jacobian
from .dynamics import (
    ORIENTATION,
    STATE_SIZE,
    integrate_step,
)
from .errors import DomainError, SizeMismatchError, SolverError, ValidationError
from .presets import quadrotor_variables
from .quat import qconj, qmul, quat_exp, quat_log
from .variables import Hierarchy, bind, build, concat as vconcat, leaf, replicate, resolve, vector
from .varmap import make_eager_map, make_lazy_map, new_buffer

TANGENT_DIM = 12  # position, orientation tangent, linear and angular velocity


# ---------------------------------------------------------------------------
# Tangent-space helpers (generic over duals)


def lift_state(x, delta):
    """Retract a 12-dim tangent step onto the 13-dim state manifold."""
    return concat(
        [
            x[0:3] + delta[0:3],
            qmul(x[3:7], quat_exp(delta[3:6])),
            x[7:10] + delta[6:9],
            x[10:13] + delta[9:12],
        ]
    )


def state_error(x, reference):
    """12-dim tracking error; orientation measured in the reference's tangent."""
    return concat(
        [
            x[0:3] - reference[0:3],
            quat_log(qmul(qconj(reference[3:7]), x[3:7])),
            x[7:10] - reference[7:10],
            x[10:13] - reference[10:13],
        ]
    )


def defect(x_from, u, x_to, dt, model, method="semi_implicit"):
    """12-dim gap between ``x_to`` and one integration step from ``x_from``."""
    pred = integrate_step(x_from, u, dt, model, method)
    return concat(
        [
            x_to[0:3] - pred[0:3],
            quat_log(qmul(qconj(x_to[3:7]), pred[3:7])),
            x_to[7:10] - pred[7:10],
            x_to[10:13] - pred[10:13],
        ]
    )


# ---------------------------------------------------------------------------
# Problem instances


DEFAULT_STATE_WEIGHTS = np.array([5.0, 5.0, 5.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5])
# terminal weights dominate the stage costs so the endpoint pins to the setpoint
DEFAULT_TERMINAL_WEIGHTS = np.array(
    [5e4, 5e4, 5e4, 5e3, 5e3, 5e3, 5e3, 5e3, 5e3, 500.0, 500.0, 500.0]
)


@dataclass
class OcpInstance:
    """A multiple-shooting tracking problem over hierarchy-backed buffers.

    References, weights, and the measured initial state live in a parameter
    buffer addressed through its own hierarchy, mirroring the decision side.
    """

    model: object
    horizon: int
    dt: float
    decision: Hierarchy
    parameters: Hierarchy
    parameter_buffer: np.ndarray
    input_lower: np.ndarray
    input_upper: np.ndarray

    def __post_init__(self):
        self._pmap = make_lazy_map(self.parameters, self.parameter_buffer)

    @property
    def n_inputs(self) -> int:
        return self.model.n_inputs

    def state_reference(self, k: int) -> np.ndarray:
        return self._pmap.get("state_reference", k).array

    def input_reference(self, k: int) -> np.ndarray:
        return self._pmap.get("input_reference", k).array

    @property
    def initial_state(self) -> np.ndarray:
        return self._pmap.get("initial_state").array

    @property
    def state_weights(self) -> np.ndarray:
        return self._pmap.get("state_weights").array

    @property
    def input_weights(self) -> np.ndarray:
        return self._pmap.get("input_weights").array

    @property
    def terminal_weights(self) -> np.ndarray:
        return self._pmap.get("terminal_weights").array

    def set_initial_state(self, x) -> None:
        self._pmap.get("initial_state").write(np.asarray(x, dtype=float))

    def set_position_setpoint(self, position) -> None:
        """Point every state reference at a rest pose at ``position``."""
        rest = np.zeros(STATE_SIZE)
        rest[0:3] = position
        rest[6] = 1.0  # identity quaternion, (x, y, z, w) storage
        for k in range(self.horizon + 1):
            self._pmap.get("state_reference", k).write(rest)

    def validate(self) -> None:
        m = self.n_inputs
        if self.input_lower.shape != (m,) or self.input_upper.shape != (m,):
            raise ValidationError(f"input bounds must have shape ({m},)")
        if np.any(self.input_lower > self.input_upper):
            raise ValidationError("infeasible input bounds: lower exceeds upper")
        if np.any(self.state_weights < 0) or np.any(self.input_weights < 0) or np.any(
            self.terminal_weights < 0
        ):
            raise ValidationError("weights must be nonnegative")
        q0 = self.initial_state[ORIENTATION]
        if abs(np.linalg.norm(q0) - 1.0) > 1e-6:
            raise ValidationError("initial-state quaternion must be normalized")


def _parameter_hierarchy(horizon: int, n_inputs: int) -> Hierarchy:
    state_ref = bind(
        "state_reference",
        vconcat(
            [
                leaf("position", vector(3)),
                leaf("orientation", vector(4)),
                leaf("linear_velocity", vector(3)),
                leaf("angular_velocity", vector(3)),
            ]
        ),
    )
    return build(
        bind(
            "parameters",
            vconcat(
                [
                    bind("state_references", replicate(horizon + 1, state_ref)),
                    bind(
                        "input_references",
                        replicate(horizon, leaf("input_reference", vector(n_inputs))),
                    ),
                    leaf("initial_state", vector(STATE_SIZE)),
                    leaf("state_weights", vector(TANGENT_DIM)),
                    leaf("input_weights", vector(n_inputs)),
                    leaf("terminal_weights", vector(TANGENT_DIM)),
                ]
            ),
        )
    )


def make_instance(
    model,
    horizon: int,
    dt: float,
    initial_state,
    state_reference,
    input_reference,
    input_lower,
    input_upper,
    state_weights=DEFAULT_STATE_WEIGHTS,
    input_weights=None,
    terminal_weights=DEFAULT_TERMINAL_WEIGHTS,
) -> OcpInstance:
    """Assemble an instance; scalar/vector references are broadcast over time."""
    m = model.n_inputs
    decision = _decision_hierarchy(horizon, m)
    parameters = _parameter_hierarchy(horizon, m)
    buffer = new_buffer(parameters)
    instance = OcpInstance(
        model=model,
        horizon=horizon,
        dt=dt,
        decision=decision,
        parameters=parameters,
        parameter_buffer=buffer,
        input_lower=np.asarray(input_lower, dtype=float),
        input_upper=np.asarray(input_upper, dtype=float),
    )
    pmap = instance._pmap
    state_reference = np.asarray(state_reference, dtype=float)
    if state_reference.ndim == 1:
        state_reference = np.tile(state_reference, (horizon + 1, 1))
    input_reference = np.asarray(input_reference, dtype=float)
    if input_reference.ndim == 1:
        input_reference = np.tile(input_reference, (horizon, 1))
    for k in range(horizon + 1):
        pmap.get("state_reference", k).write(state_reference[k])
    for k in range(horizon):
        pmap.get("input_reference", k).write(input_reference[k])
    pmap.get("initial_state").write(np.asarray(initial_state, dtype=float))
    pmap.get("state_weights").write(state_weights)
    if input_weights is None:
        input_weights = np.full(m, 1e-4)
    pmap.get("input_weights").write(input_weights)
    pmap.get("terminal_weights").write(terminal_weights)
    return instance


def _decision_hierarchy(horizon: int, n_inputs: int) -> Hierarchy:
    return quadrotor_variables(horizon, n_inputs).decision_variables


def quadrotor_hover_instance(
    params=None,
    horizon: int = 30,
    dt: float = 0.05,
    start_position=(1.0, 0.0, 0.0),
    setpoint=(0.0, 0.0, 0.0),
    input_bound_scale: float = 2.0,
    state_weights=DEFAULT_STATE_WEIGHTS,
    terminal_weights=DEFAULT_TERMINAL_WEIGHTS,
) -> OcpInstance:
    """Regulation problem: fly from rest at ``start_position`` to hover at ``setpoint``."""
    from .dynamics import QuadrotorModel, RigidBodyState

    model = QuadrotorModel(params)
    x0 = RigidBodyState.at_rest(start_position).pack()
    ref = RigidBodyState.at_rest(setpoint).pack()
    hover = model.nominal_input()
    return make_instance(
        model,
        horizon,
        dt,
        initial_state=x0,
        state_reference=ref,
        input_reference=hover,
        input_lower=np.zeros(model.n_inputs),
        input_upper=hover * input_bound_scale,
        state_weights=state_weights,
        terminal_weights=terminal_weights,
    )


# ---------------------------------------------------------------------------
# Transcription


class Transcription:
    """Multiple-shooting NLP data for one instance.

    Exposes cost and defect functions over the single decision buffer (for
    checking and differentiation) plus the per-interval pieces the solver
    assembles blockwise.
    """

    def __init__(self, instance: OcpInstance):
        instance.validate()
        self.instance = instance
        self.n_states = instance.horizon + 1
        self.m = instance.n_inputs
        self.decision_size = instance.decision.size
        self.n_defects = instance.horizon * TANGENT_DIM
        self.tangent_size = self.n_states * TANGENT_DIM + instance.horizon * self.m
        self.state_offsets = [
            resolve(instance.decision, ("X", "x", k)).offset for k in range(self.n_states)
        ]
        self.input_offsets = [
            resolve(instance.decision, ("U", "u", k)).offset for k in range(instance.horizon)
        ]

    # -- plain evaluation over state/input lists -----------------------------

    def cost_parts(self, states, inputs):
        inst = self.instance
        stage = 0.0
        for k in range(inst.horizon):
            e = state_error(states[k], inst.state_reference(k))
            du = inputs[k] - inst.input_reference(k)
            stage = stage + 0.5 * dot(inst.state_weights * e, e)
            stage = stage + 0.5 * dot(inst.input_weights * du, du)
        e_n = state_error(states[-1], inst.state_reference(inst.horizon))
        terminal = 0.5 * dot(inst.terminal_weights * e_n, e_n)
        return stage, terminal

    def cost_from(self, states, inputs) -> float:
        stage, terminal = self.cost_parts(states, inputs)
        return stage + terminal

    def defects_from(self, states, inputs):
        inst = self.instance
        parts = [
            defect(states[k], inputs[k], states[k + 1], inst.dt, inst.model)
            for k in range(inst.horizon)
        ]
        return concat(parts)

    # -- single-buffer functions ----------------------------------------------

    def split(self, z):
        states = [z[o : o + STATE_SIZE] for o in self.state_offsets]
        inputs = [z[o : o + self.m] for o in self.input_offsets]
        return states, inputs

    def buffer_functions(self):
        def cost_fn(z):
            states, inputs = self.split(z)
            return self.cost_from(states, inputs)

        def defect_fn(z):
            states, inputs = self.split(z)
            return self.defects_from(states, inputs)

        return (
            DiffFunction(self.decision_size, 1, cost_fn),
            DiffFunction(self.decision_size, self.n_defects, defect_fn),
        )

    def default_guess(self) -> np.ndarray:
        """Measured state repeated across the horizon, nominal inputs."""
        inst = self.instance
        z = new_buffer(inst.decision)
        x0 = inst.initial_state
        nominal = np.clip(inst.model.nominal_input(), inst.input_lower, inst.input_upper)
        for offset in self.state_offsets:
            z[offset : offset + STATE_SIZE] = x0
        for offset in self.input_offsets:
            z[offset : offset + self.m] = nominal
        return z


def transcribe(instance: OcpInstance) -> Transcription:
    return Transcription(instance)


# ---------------------------------------------------------------------------
# Solver


@dataclass
class SqpSettings:
    tol_kkt: float = 1e-6
    tol_defect: float = 1e-8
    tol_stationarity: float = 1e-5
    max_iterations: int = 50
    armijo_slope: float = 1e-4
    max_backtracks: int = 30
    merit_penalty: float = 1.0
    penalty_margin: float = 10.0
    max_damping_rounds: int = 10


@dataclass
class SqpReport:
    iterations: int = 0
    merit_history: list = field(default_factory=list)
    defect_history: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    kkt_residuals: list = field(default_factory=list)
    regularizations: list = field(default_factory=list)
    termination: str = "not_run"
    wall_time: float = 0.0
    final_cost: float = float("nan")
    merit_penalty: float = 0.0

    def summary(self) -> str:
        return (
            f"iterations={self.iterations} termination={self.termination} "
            f"cost={self.final_cost:.6g} max_defect={self.defect_history[-1]:.3e} "
            f"wall_time={self.wall_time:.3f}s"
        )


class _Workspace:
    """Solver-side access to the iterate buffer through a chosen map flavor."""

    def __init__(self, transcription: Transcription, map_flavor: str):
        decision = transcription.instance.decision
        if map_flavor == "eager":
            self.map = make_eager_map(decision)
        elif map_flavor == "lazy":
            self.map = make_lazy_map(decision, new_buffer(decision))
        else:
            raise ValidationError(f"unknown map flavor {map_flavor!r}")
        self.buffer = self.map.buffer
        n = transcription.instance.horizon
        self.state_views = [self.map.get("X", "x", k) for k in range(n + 1)]
        self.input_views = [self.map.get("U", "u", k) for k in range(n)]

    def states(self):
        return [v.array for v in self.state_views]

    def inputs(self):
        return [v.array for v in self.input_views]

    def write(self, states, inputs):
        for view, value in zip(self.state_views, states):
            view.array[:] = value
        for view, value in zip(self.input_views, inputs):
            view.array[:] = value


def _solve_kkt(h_free, a_free, g_free, c, regularizations):
    """Dense KKT solve with escalating Tikhonov regularization on failure."""
    nf = h_free.shape[0]
    nc = a_free.shape[0]
    reg = 0.0
    while True:
        kkt = np.zeros((nf + nc, nf + nc))
        kkt[:nf, :nf] = h_free + reg * np.eye(nf)
        kkt[:nf, nf:] = a_free.T
        kkt[nf:, :nf] = a_free
        rhs = np.concatenate([-g_free, -c])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = None
        if sol is not None and np.all(np.isfinite(sol)):
            if reg:
                regularizations.append(reg)
            return sol[:nf], sol[nf:]
        reg = 1e-8 if reg == 0.0 else reg * 10.0
        if reg > 1e2:
            raise SolverError("KKT system remained singular under regularization")


def solve(instance: OcpInstance, guess=None, map_flavor: str = "lazy", settings=None):
    """Run the Gauss-Newton SQP; returns (solution buffer, report).

    The first shooting state is pinned to ``instance.initial_state``; the
    guess's quaternions must be normalized.
    """
    settings = settings or SqpSettings()
    started = time.perf_counter()
    trans = transcribe(instance)
    inst = instance
    n, m = inst.horizon, trans.m
    nt = trans.tangent_size
    work = _Workspace(trans, map_flavor)

    z0 = trans.default_guess() if guess is None else np.asarray(guess, dtype=float)
    if z0.shape != (trans.decision_size,):
        raise ValidationError(
            f"guess must have {trans.decision_size} scalars, got {z0.shape}"
        )
    work.buffer[:] = z0
    work.state_views[0].array[:] = inst.initial_state  # pinned coordinate
    for view in work.state_views:
        if abs(np.linalg.norm(view.array[ORIENTATION]) - 1.0) > 1e-6:
            raise ValidationError("guess quaternions must be normalized")
    np.clip(
        work.buffer[trans.input_offsets[0] : trans.input_offsets[-1] + m],
        np.tile(inst.input_lower, n),
        np.tile(inst.input_upper, n),
        out=work.buffer[trans.input_offsets[0] : trans.input_offsets[-1] + m],
    )

    report = SqpReport()
    state_cols = [slice(TANGENT_DIM * k, TANGENT_DIM * (k + 1)) for k in range(n + 1)]
    input_cols = [
        slice(TANGENT_DIM * (n + 1) + m * k, TANGENT_DIM * (n + 1) + m * (k + 1))
        for k in range(n)
    ]
    free = np.arange(TANGENT_DIM, nt)  # everything but the pinned first state
    sqrt_sw = np.sqrt(inst.state_weights)
    sqrt_tw = np.sqrt(inst.terminal_weights)
    mu = settings.merit_penalty

    def merit(states, inputs):
        try:
            cost = trans.cost_from(states, inputs)
            defects = trans.defects_from(states, inputs)
        except DomainError:  # inadmissible trial point: reject, do not crash
            return np.inf, np.inf, np.inf
        violation = float(np.abs(defects).sum())
        max_defect = float(np.abs(defects).max()) if len(defects) else 0.0
        return float(cost) + mu * violation, float(cost), max_defect

    states = [s.copy() for s in work.states()]
    inputs = [u.copy() for u in work.inputs()]
    phi, cost, max_defect = merit(states, inputs)
    if not np.isfinite(cost):
        raise SolverError("non-finite cost at the initial guess", iterate=work.buffer.copy())
    report.merit_history.append(phi)
    report.defect_history.append(max_defect)

    termination = "iteration_limit"
    damping = 0.0  # Levenberg damping, grown when the quadratic model misleads
    for iteration in range(1, settings.max_iterations + 1):
        report.iterations = iteration

        hess = np.zeros((nt, nt))
        grad = np.zeros(nt)
        a_mat = np.zeros((trans.n_defects, nt))
        c_vec = np.zeros(trans.n_defects)

        for k in range(n + 1):
            weights = sqrt_sw if k < n else sqrt_tw
            ref = inst.state_reference(k)
            x_k = states[k]

            def residual(delta, x_k=x_k, ref=ref, weights=weights):
                return weights * state_error(lift_state(x_k, delta), ref)

            val, jac = value_and_jacobian(residual, np.zeros(TANGENT_DIM))
            cols = state_cols[k]
            hess[cols, cols] += jac.T @ jac
            grad[cols] += jac.T @ val

        for k in range(n):
            cols = input_cols[k]
            du = inputs[k] - inst.input_reference(k)
            hess[cols, cols] += np.diag(inst.input_weights)
            grad[cols] += inst.input_weights * du

            x_a, u_k, x_b = states[k], inputs[k], states[k + 1]

            def interval(xi, x_a=x_a, u_k=u_k, x_b=x_b):
                return defect(
                    lift_state(x_a, xi[0:TANGENT_DIM]),
                    u_k + xi[TANGENT_DIM : TANGENT_DIM + m],
                    lift_state(x_b, xi[TANGENT_DIM + m :]),
                    inst.dt,
                    inst.model,
                )

            c_k, jac = value_and_jacobian(interval, np.zeros(2 * TANGENT_DIM + m))
            rows = slice(TANGENT_DIM * k, TANGENT_DIM * (k + 1))
            c_vec[rows] = c_k
            a_mat[rows, state_cols[k]] = jac[:, 0:TANGENT_DIM]
            a_mat[rows, input_cols[k]] = jac[:, TANGENT_DIM : TANGENT_DIM + m]
            a_mat[rows, state_cols[k + 1]] = jac[:, TANGENT_DIM + m :]

        hess_free = hess[np.ix_(free, free)]
        a_free = a_mat[:, free]
        grad_free = grad[free]
        converged = False
        accepted = False
        for attempt in range(settings.max_damping_rounds):
            damped = hess_free if damping == 0.0 else hess_free + damping * np.eye(len(free))
            if damping:
                report.regularizations.append(damping)
            step_free, nu = _solve_kkt(damped, a_free, grad_free, c_vec, report.regularizations)
            step = np.zeros(nt)
            step[free] = step_free

            if attempt == 0:
                # projected stationarity: active input bounds absorb one-sided gradients
                stationarity_vec = _project_bound_stationarity(
                    (grad + a_mat.T @ nu)[free], inputs, inst, n, m
                )
                stationarity = float(np.abs(stationarity_vec).max())
                kkt_residual = max(stationarity, float(np.abs(c_vec).max()))
                report.kkt_residuals.append(kkt_residual)
                report.step_norms.append(float(np.abs(step).max()))
                if kkt_residual < settings.tol_kkt or (
                    np.abs(c_vec).max() < settings.tol_defect
                    and stationarity < settings.tol_stationarity
                ):
                    converged = True
                    break

            mu = max(mu, settings.penalty_margin * float(np.abs(nu).max()))
            phi, cost, max_defect = merit(states, inputs)
            descent = float(grad @ step) - mu * float(np.abs(c_vec).sum())
            if descent > 0.0 and np.abs(c_vec).sum() > 0.0:
                mu *= 2.0  # insufficient predicted decrease: strengthen the penalty
                phi, cost, max_defect = merit(states, inputs)
                descent = float(grad @ step) - mu * float(np.abs(c_vec).sum())
            alpha = 1.0
            for _ in range(settings.max_backtracks):
                trial_states = [states[0]] + [
                    lift_state(states[k], alpha * step[state_cols[k]]) for k in range(1, n + 1)
                ]
                trial_inputs = [
                    np.clip(
                        inputs[k] + alpha * step[input_cols[k]],
                        inst.input_lower,
                        inst.input_upper,
                    )
                    for k in range(n)
                ]
                phi_trial, cost_trial, defect_trial = merit(trial_states, trial_inputs)
                if phi_trial <= phi + settings.armijo_slope * alpha * descent:
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                damping = 0.0 if damping < 1e-8 else damping / 10.0
                break
            # the quadratic model is untrustworthy here: damp toward gradient steps
            scale = max(float(np.trace(hess_free)) / len(free), 1.0)
            damping = 1e-4 * scale if damping == 0.0 else damping * 10.0
        if converged:
            termination = "converged"
            break
        if not accepted:
            termination = "line_search_failed"
            break

        states = trial_states
        inputs = trial_inputs
        work.write(states, inputs)
        report.merit_history.append(phi_trial)
        report.defect_history.append(defect_trial)
        cost = cost_trial

    report.termination = termination
    report.final_cost = float(cost)
    report.merit_penalty = mu
    report.wall_time = time.perf_counter() - started
    if not np.all(np.isfinite(work.buffer)):
        raise SolverError("non-finite iterate after solve", iterate=work.buffer.copy())
    return work.buffer.copy(), report


def _project_bound_stationarity(stationarity_vec, inputs, inst, n, m):
    """Zero out one-sided gradients at active input bounds (free ordering)."""
    out = stationarity_vec.copy()
    eps = 1e-12
    input_start_in_free = TANGENT_DIM * n  # states 1..n occupy the head
    for k in range(n):
        for j in range(m):
            idx = input_start_in_free + m * k + j
            at_lower = inputs[k][j] <= inst.input_lower[j] + eps
            at_upper = inputs[k][j] >= inst.input_upper[j] - eps
            if at_lower and out[idx] > 0.0:
                out[idx] = 0.0
            if at_upper and out[idx] < 0.0:
                out[idx] = 0.0
    return out


# ---------------------------------------------------------------------------
# Guess shifting for receding-horizon loops


def shift_guess(transcription: Transcription, solution: np.ndarray) -> np.ndarray:
    """Advance a solved buffer one step: drop the first interval, extend the tail.

    The last input is repeated and the last state is rolled forward through
    the dynamics, so a defect-free solution shifts into a defect-free guess.
    """
    z = solution.copy()
    inst = transcription.instance
    so, io = transcription.state_offsets, transcription.input_offsets
    m = transcription.m
    for k in range(len(so) - 1):
        z[so[k] : so[k] + STATE_SIZE] = solution[so[k + 1] : so[k + 1] + STATE_SIZE]
    for k in range(len(io) - 1):
        z[io[k] : io[k] + m] = solution[io[k + 1] : io[k + 1] + m]
    last_state = z[so[-2] : so[-2] + STATE_SIZE]
    last_input = z[io[-1] : io[-1] + m]
    z[so[-1] : so[-1] + STATE_SIZE] = integrate_step(last_state, last_input, inst.dt, inst.model)
    return z


# ---------------------------------------------------------------------------
# Plain-text serialization (key=value header + one scalar per line)


def save_solution(path, instance: OcpInstance, buffer: np.ndarray, report: SqpReport) -> None:
    lines = [
        f"horizon={instance.horizon}",
        f"dt={instance.dt!r}",
        f"n_inputs={instance.n_inputs}",
        f"buffer_length={buffer.shape[0]}",
        f"iterations={report.iterations}",
        f"termination={report.termination}",
        f"final_cost={report.final_cost!r}",
        f"max_defect={report.defect_history[-1]!r}",
        "buffer=",
    ]
    lines.extend(repr(float(v)) for v in buffer)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_solution(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    split = lines.index("buffer=")
    header = dict(line.split("=", 1) for line in lines[:split])
    buffer = np.array([float(v) for v in lines[split + 1 :]])
    if int(header["buffer_length"]) != buffer.shape[0]:
        raise SizeMismatchError("solution payload does not match its header length")
    return header, buffer
