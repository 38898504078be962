"""Continuous-time projection-free multi-agent dynamics and its integration.

Per agent i the coupled flows are

    dx_i/dt = sum_j a_ij (x_j - x_i) + beta(t) (v_i - x_i)
    dy_i/dt = sum_j a_ij (z_j - z_i)

with z_i = y_i + grad f_i(x_i) and v_i the linear-minimization vertex for
z_i. In stacked form: dx = -L x + beta(t)(v - x), dy = -L z. The pair (x, y)
is the state; z and v are algebraic functions of it, recomputed at every
right-hand-side evaluation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .graphs import Digraph, is_strongly_connected, is_weight_balanced, laplacian
from .metrics import RunRecord, consensus_error, fw_gap, optimality_gap, reference_solution, tracking_error
from .objectives import Objective
from .sets import FeasibleSet


class SimulationError(RuntimeError):
    """Assumption violation or numeric failure detected during a run."""


@dataclass(frozen=True)
class Schedule:
    """Vanishing positive weight beta(t) = (t0 / (t0 + t))**power.

    With power in (0, 1] this is positive, nonincreasing, vanishes as
    t -> infinity, and has a divergent integral.
    """

    t0: float = 1.0
    power: float = 1.0

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 0.0 < self.power <= 1.0:
            raise ValueError("power must lie in (0, 1]")

    @property
    def kind(self) -> str:
        return "inverse_linear" if self.power == 1.0 else "inverse_power"

    def beta(self, t: float) -> float:
        return (self.t0 / (self.t0 + t)) ** self.power

    def integral(self, upper: float) -> float:
        """Closed form of the integral of beta over [0, upper]."""
        if self.power == 1.0:
            return self.t0 * np.log((self.t0 + upper) / self.t0)
        p = self.power
        return (self.t0**p) * ((self.t0 + upper) ** (1 - p) - self.t0 ** (1 - p)) / (1 - p)


def inverse_linear(t0: float = 1.0) -> Schedule:
    return Schedule(t0=t0, power=1.0)


def inverse_power(t0: float, p: float) -> Schedule:
    return Schedule(t0=t0, power=p)


@dataclass(frozen=True)
class NetworkState:
    """Stacked decision rows x (N x n), tracking rows y (N x n), and time t."""

    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.shape != x.shape:
            raise ValueError("x and y must be 2-d arrays of identical shape")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "euler"
    h: float = 0.05
    horizon: float = 100.0
    record_every: float = 1.0
    exact_feasibility: bool = True

    def __post_init__(self):
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.h <= 0 or self.horizon <= 0 or self.record_every <= 0:
            raise ValueError("h, horizon and record_every must be positive")


def euler_step_bound(g: Digraph, sched: Schedule) -> float:
    """Largest Euler step keeping x updates convex combinations of feasible
    points: h <= 1 / (d_max + beta(0))."""
    return 1.0 / (g.max_degree + sched.beta(0.0))


def derived_z(state: NetworkState, obj: Objective) -> np.ndarray:
    """z rows: per-agent tracking variable y_i + grad f_i(x_i)."""
    return state.y + obj.stacked_grad(state.x)


def derived_v(z: np.ndarray, fset: FeasibleSet) -> np.ndarray:
    """Per-row linear-minimization vertices for the stacked z."""
    return np.vstack([fset.lmo(row) for row in z])


def rhs(
    state: NetworkState,
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    sched: Schedule,
    lap: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked time derivatives (dx, dy) at the given state.

    ``lap`` may carry a precomputed Laplacian to avoid rebuilding it in
    tight integration loops; it must equal ``laplacian(g)``.
    """
    lap = laplacian(g) if lap is None else lap
    z = derived_z(state, obj)
    v = derived_v(z, fset)
    beta = sched.beta(state.t)
    dx = -lap @ state.x + beta * (v - state.x)
    dy = -lap @ z
    return dx, dy


def step(
    state: NetworkState,
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    sched: Schedule,
    cfg: IntegratorConfig,
    lap: np.ndarray | None = None,
) -> NetworkState:
    """Advance one explicit Euler or classical RK4 step of size cfg.h."""
    lap = laplacian(g) if lap is None else lap
    h = cfg.h
    if cfg.method == "euler":
        if cfg.exact_feasibility and h > euler_step_bound(g, sched) + 1e-15:
            raise SimulationError(
                f"euler step h={h} exceeds the exact-feasibility bound "
                f"{euler_step_bound(g, sched):.6g}"
            )
        dx, dy = rhs(state, g, obj, fset, sched, lap)
        return NetworkState(state.x + h * dx, state.y + h * dy, state.t + h)
    # classical RK4 with the schedule evaluated at the stage times
    k1x, k1y = rhs(state, g, obj, fset, sched, lap)
    s2 = NetworkState(state.x + 0.5 * h * k1x, state.y + 0.5 * h * k1y, state.t + 0.5 * h)
    k2x, k2y = rhs(s2, g, obj, fset, sched, lap)
    s3 = NetworkState(state.x + 0.5 * h * k2x, state.y + 0.5 * h * k2y, state.t + 0.5 * h)
    k3x, k3y = rhs(s3, g, obj, fset, sched, lap)
    s4 = NetworkState(state.x + h * k3x, state.y + h * k3y, state.t + h)
    k4x, k4y = rhs(s4, g, obj, fset, sched, lap)
    x_next = state.x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
    y_next = state.y + (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
    return NetworkState(x_next, y_next, state.t + h)


def validate_run_inputs(
    g: Digraph, obj: Objective, fset: FeasibleSet, x0: np.ndarray, feas_tol: float = 1e-9
) -> None:
    """Hard assumption checks performed once at the start of a run."""
    if not is_weight_balanced(g):
        raise SimulationError("graph is not weight-balanced")
    if not is_strongly_connected(g):
        raise SimulationError("graph is not strongly connected")
    if obj.n_agents != g.n_agents:
        raise SimulationError(
            f"objective has {obj.n_agents} costs but graph has {g.n_agents} agents"
        )
    if obj.dim != fset.dim:
        raise SimulationError("objective and feasible set dimensions differ")
    if x0.shape != (g.n_agents, fset.dim):
        raise SimulationError(f"x0 must have shape ({g.n_agents}, {fset.dim})")
    for i, row in enumerate(x0):
        if not fset.contains(row, feas_tol):
            raise SimulationError(f"initial x for agent {i} is not feasible")


def initial_rows(g: Digraph, fset: FeasibleSet, seed: int) -> np.ndarray:
    """Seeded feasible initial decision rows, one sample per agent."""
    return np.vstack([fset.sample_point(seed + 1000 * i) for i in range(g.n_agents)])


def simulate(
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    sched: Schedule,
    cfg: IntegratorConfig,
    x0: np.ndarray | None = None,
    init_seed: int = 0,
    fstar: float | None = None,
    config_echo: dict | None = None,
) -> RunRecord:
    """Integrate the flows to the horizon, recording metrics periodically.

    x starts from ``x0`` when given (rows must be feasible) or from seeded
    feasible samples otherwise; y always starts at zero. Returns the metric
    time series plus per-sample conservation/feasibility diagnostics and the
    final state arrays.
    """
    x0 = initial_rows(g, fset, init_seed) if x0 is None else np.asarray(x0, dtype=float)
    validate_run_inputs(g, obj, fset, x0)
    if fstar is None:
        _, fstar = reference_solution(obj, fset, tol=1e-8)

    lap = laplacian(g)
    state = NetworkState(x0.copy(), np.zeros_like(x0), 0.0)
    n_steps = int(round(cfg.horizon / cfg.h))
    sample_stride = max(1, int(round(cfg.record_every / cfg.h)))

    rec = RunRecord(config_echo=dict(config_echo or {}))
    clock_start = time.perf_counter()

    def take_sample(s: NetworkState) -> None:
        z = derived_z(s, obj)
        if not (np.isfinite(s.x).all() and np.isfinite(s.y).all()):
            raise SimulationError(f"non-finite state detected at t={s.t:.6g}")
        xbar = s.x.mean(axis=0)
        rec.times.append(s.t)
        rec.consensus_err.append(consensus_error(s.x))
        rec.tracking_err.append(tracking_error(s.x, s.y, obj))
        rec.optimality_gap.append(optimality_gap(s.x, obj, fstar))
        rec.fw_gap.append(fw_gap(xbar, obj, fset))
        rec.feas_violation.append(
            max(float(np.linalg.norm(row - fset.project(row))) for row in s.x)
        )
        rec.y_sum_norm.append(float(np.linalg.norm(s.y.sum(axis=0))))
        grads_sum = obj.stacked_grad(s.x).sum(axis=0)
        rec.z_sum_residual.append(float(np.linalg.norm(z.sum(axis=0) - grads_sum)))
        rec.wall_clock.append(time.perf_counter() - clock_start)

    take_sample(state)
    for k in range(1, n_steps + 1):
        state = step(state, g, obj, fset, sched, cfg, lap)
        # pin t to the grid to avoid accumulated roundoff in recorded times
        state = NetworkState(state.x, state.y, k * cfg.h)
        if k % sample_stride == 0 or k == n_steps:
            take_sample(state)

    rec.final_x = state.x.copy()
    rec.final_y = state.y.copy()
    return rec
