"""Discrete-time comparison algorithms sharing the simulator's instances.

Three baselines run against the continuous-time flows: the forward-Euler
discretization of those flows expressed with a doubly-stochastic mixing
matrix, a decentralized discrete-time Frank-Wolfe scheme that averages
neighbor gradients of averaged states, and a projected gradient-tracking
step that solves the quadratic projection subproblem instead of the linear
one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dynamics import Schedule, SimulationError
from .graphs import Digraph, laplacian
from .metrics import (
    RunRecord,
    consensus_error,
    fw_gap,
    optimality_gap,
    reference_solution,
    tracking_error,
)
from .objectives import Objective
from .sets import FeasibleSet


@dataclass(frozen=True)
class DiscreteConfig:
    """Mixing step delta in (0, 1), iteration schedule beta^k, and budget.

    ``gossip_rounds`` applies the mixing matrix that many times per
    aggregation in the decentralized FW baseline (one round everywhere
    else); the referenced method relies on repeated gossip to shrink the
    bias of its neighbor-averaged gradient estimate.
    """

    delta: float = 0.5
    schedule: Schedule = Schedule(t0=1.0, power=1.0)
    n_iters: int = 1000
    record_every: int = 10
    gossip_rounds: int = 1

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.n_iters < 1 or self.record_every < 1:
            raise ValueError("n_iters and record_every must be positive")
        if self.gossip_rounds < 1:
            raise ValueError("gossip_rounds must be positive")

    def eta(self, k: int) -> float:
        """Effective step eta^k = delta * beta^k."""
        return self.delta * self.schedule.beta(float(k))


@dataclass(frozen=True)
class ProjectedConfig:
    """Euler step h, gradient gain alpha, and budget for the projected flow."""

    h: float = 0.3
    alpha: float = 0.3
    n_iters: int = 1000
    record_every: int = 10

    def __post_init__(self):
        if self.h <= 0 or self.alpha <= 0:
            raise ValueError("h and alpha must be positive")
        if not self.h <= 1.0:
            raise ValueError("h must be at most 1 to keep x updates feasible")
        if self.n_iters < 1 or self.record_every < 1:
            raise ValueError("n_iters and record_every must be positive")


def mixing_matrix(g: Digraph, delta: float) -> np.ndarray:
    """W = (1 - delta) I + delta A, validated symmetric doubly stochastic.

    Requires the adjacency itself to be symmetric with unit row sums, which
    the uniformly weighted undirected topologies provide with weight 1/degree.
    """
    a = g.adjacency
    if np.abs(a - a.T).max(initial=0.0) > 1e-12:
        raise SimulationError("discrete baselines need a symmetric adjacency")
    if np.abs(a.sum(axis=1) - 1.0).max() > 1e-9:
        raise SimulationError(
            "discrete baselines need unit adjacency row sums so that "
            "(1 - delta) I + delta A is doubly stochastic"
        )
    return (1.0 - delta) * np.eye(g.n_agents) + delta * a


def _stacked_lmo(fset: FeasibleSet, z: np.ndarray) -> np.ndarray:
    return np.vstack([fset.lmo(row) for row in z])


def discretized_cg_step(
    x: np.ndarray,
    z: np.ndarray,
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    k: int,
    cfg: DiscreteConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """One iteration of the discretized projection-free flow.

    x_i <- Avg_i{x} + eta^k (v_i - x_i) with v_i from the LMO at z_i, and
    z_i <- Avg_i{z} + grad f_i(x_i^new) - grad f_i(x_i^old).
    """
    w = mixing_matrix(g, cfg.delta)
    eta = cfg.eta(k)
    v = _stacked_lmo(fset, z)
    x_next = w @ x + eta * (v - x)
    z_next = w @ z + obj.stacked_grad(x_next) - obj.stacked_grad(x)
    return x_next, z_next


def defw_step(
    x: np.ndarray,
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    k: int,
    cfg: DiscreteConfig,
) -> np.ndarray:
    """One iteration of decentralized discrete-time Frank-Wolfe.

    Each agent gossip-averages neighbors' states, evaluates its gradient
    there, gossip-averages those gradients, and steps
    x_i <- Avg_i{x} + eta^k (v_i - Avg_i{x}).
    """
    w = np.linalg.matrix_power(mixing_matrix(g, cfg.delta), cfg.gossip_rounds)
    eta = cfg.eta(k)
    x_avg = w @ x
    z = w @ obj.stacked_grad(x_avg)
    v = _stacked_lmo(fset, z)
    return x_avg + eta * (v - x_avg)


def projected_dynamics_step(
    x: np.ndarray,
    y: np.ndarray,
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    h: float,
    alpha: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Euler step of projected gradient tracking: each agent moves toward the
    projection of x_i - alpha ((L x)_i + z_i) and y integrates -L z."""
    lap = laplacian(g)
    z = y + obj.stacked_grad(x)
    target = x - alpha * (lap @ x + z)
    proj = np.vstack([fset.project(row) for row in target])
    x_next = x + h * (proj - x)
    y_next = y - h * (lap @ z)
    return x_next, y_next


def _record_sample(
    rec: RunRecord,
    k: int,
    x: np.ndarray,
    obj: Objective,
    fset: FeasibleSet,
    fstar: float,
    tracking: float,
    clock_start: float,
) -> None:
    if not np.isfinite(x).all():
        raise SimulationError(f"non-finite iterate at k={k}")
    xbar = x.mean(axis=0)
    rec.times.append(float(k))
    rec.consensus_err.append(consensus_error(x))
    rec.tracking_err.append(tracking)
    rec.optimality_gap.append(optimality_gap(x, obj, fstar))
    rec.fw_gap.append(fw_gap(xbar, obj, fset))
    rec.feas_violation.append(
        max(float(np.linalg.norm(row - fset.project(row))) for row in x)
    )
    rec.wall_clock.append(time.perf_counter() - clock_start)


def run_discretized_cg(
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    cfg: DiscreteConfig,
    x0: np.ndarray,
    fstar: float | None = None,
    config_echo: dict | None = None,
) -> RunRecord:
    """Iterate the discretized flow from feasible x0 with z0 = stacked gradient."""
    if fstar is None:
        _, fstar = reference_solution(obj, fset, tol=1e-8)
    x = np.asarray(x0, dtype=float).copy()
    z = obj.stacked_grad(x)
    rec = RunRecord(config_echo=dict(config_echo or {}))
    clock_start = time.perf_counter()

    def tracking(xc, zc):
        grads = obj.stacked_grad(xc)
        return float(np.linalg.norm(zc - grads.mean(axis=0)))

    _record_sample(rec, 0, x, obj, fset, fstar, tracking(x, z), clock_start)
    for k in range(cfg.n_iters):
        x, z = discretized_cg_step(x, z, g, obj, fset, k, cfg)
        if (k + 1) % cfg.record_every == 0 or k + 1 == cfg.n_iters:
            _record_sample(rec, k + 1, x, obj, fset, fstar, tracking(x, z), clock_start)
    rec.final_x = x
    return rec


def run_defw(
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    cfg: DiscreteConfig,
    x0: np.ndarray,
    fstar: float | None = None,
    config_echo: dict | None = None,
) -> RunRecord:
    if fstar is None:
        _, fstar = reference_solution(obj, fset, tol=1e-8)
    x = np.asarray(x0, dtype=float).copy()
    rec = RunRecord(config_echo=dict(config_echo or {}))
    clock_start = time.perf_counter()
    # this scheme carries no tracking state; report the gradient spread
    grads = obj.stacked_grad(x)
    _record_sample(rec, 0, x, obj, fset, fstar,
                   float(np.linalg.norm(grads - grads.mean(axis=0))), clock_start)
    for k in range(cfg.n_iters):
        x = defw_step(x, g, obj, fset, k, cfg)
        if (k + 1) % cfg.record_every == 0 or k + 1 == cfg.n_iters:
            grads = obj.stacked_grad(x)
            _record_sample(rec, k + 1, x, obj, fset, fstar,
                           float(np.linalg.norm(grads - grads.mean(axis=0))), clock_start)
    rec.final_x = x
    return rec


def run_projected(
    g: Digraph,
    obj: Objective,
    fset: FeasibleSet,
    cfg: ProjectedConfig,
    x0: np.ndarray,
    fstar: float | None = None,
    config_echo: dict | None = None,
) -> RunRecord:
    if fstar is None:
        _, fstar = reference_solution(obj, fset, tol=1e-8)
    x = np.asarray(x0, dtype=float).copy()
    y = np.zeros_like(x)
    rec = RunRecord(config_echo=dict(config_echo or {}))
    clock_start = time.perf_counter()
    _record_sample(rec, 0, x, obj, fset, fstar, tracking_error(x, y, obj), clock_start)
    for k in range(cfg.n_iters):
        x, y = projected_dynamics_step(x, y, g, obj, fset, cfg.h, cfg.alpha)
        if (k + 1) % cfg.record_every == 0 or k + 1 == cfg.n_iters:
            _record_sample(rec, k + 1, x, obj, fset, fstar, tracking_error(x, y, obj), clock_start)
    rec.final_x = x
    return rec
