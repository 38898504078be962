"""Convergence diagnostics, reference solutions, and subproblem timing."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .objectives import Objective
from .sets import FeasibleSet

CSV_COLUMNS = ("t", "consensus_err", "tracking_err", "optimality_gap", "fw_gap")


class ReferenceSolveError(RuntimeError):
    """Reference minimizer did not reach the requested certificate."""


@dataclass
class RunRecord:
    """Metric time series of one run, aligned on ``times``.

    ``feas_violation``, ``y_sum_norm`` and ``z_sum_residual`` are per-sample
    conservation/feasibility diagnostics kept in memory for verification;
    only the five canonical columns are serialized to CSV. ``final_x`` /
    ``final_y`` hold the terminal state arrays when the producer supplies
    them.
    """

    times: list[float] = field(default_factory=list)
    consensus_err: list[float] = field(default_factory=list)
    tracking_err: list[float] = field(default_factory=list)
    optimality_gap: list[float] = field(default_factory=list)
    fw_gap: list[float] = field(default_factory=list)
    feas_violation: list[float] = field(default_factory=list)
    y_sum_norm: list[float] = field(default_factory=list)
    z_sum_residual: list[float] = field(default_factory=list)
    wall_clock: list[float] = field(default_factory=list)
    subproblem_timings: list[tuple[str, float]] = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    final_x: np.ndarray | None = None
    final_y: np.ndarray | None = None

    def metric_rows(self) -> list[tuple[float, float, float, float, float]]:
        return list(
            zip(self.times, self.consensus_err, self.tracking_err,
                self.optimality_gap, self.fw_gap)
        )

    def write_csv(self, path) -> None:
        """Write the canonical columns; floats use shortest round-trip form."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.metric_rows():
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def read_csv(cls, path) -> "RunRecord":
        rec = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {header}")
            for row in reader:
                t, ce, te, og, fg = (float(v) for v in row)
                rec.times.append(t)
                rec.consensus_err.append(ce)
                rec.tracking_err.append(te)
                rec.optimality_gap.append(og)
                rec.fw_gap.append(fg)
        return rec


def consensus_error(x: np.ndarray) -> float:
    """Frobenius norm of the stacked deviation from the row mean."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean(axis=0)))


def tracking_error(x: np.ndarray, y: np.ndarray, obj: Objective) -> float:
    """Stacked norm of z_i - gbar with z_i = y_i + grad f_i(x_i) and gbar the
    network-average gradient at the current rows."""
    grads = obj.stacked_grad(x)
    z = np.asarray(y, dtype=float) + grads
    return float(np.linalg.norm(z - grads.mean(axis=0)))


def fw_gap(xbar: np.ndarray, obj: Objective, fset: FeasibleSet) -> float:
    """Linearized stationarity certificate grad F(xbar) . (xbar - v) with v
    the linear-minimization vertex; nonnegative up to roundoff."""
    g = obj.global_grad(xbar)
    value = float(g @ (xbar - fset.lmo(g)))
    return 0.0 if -1e-12 <= value < 0.0 else value


def optimality_gap(x: np.ndarray, obj: Objective, fstar: float) -> float:
    """F at the row mean minus the reference optimal value."""
    x = np.asarray(x, dtype=float)
    xbar = x.mean(axis=0) if x.ndim == 2 else x
    gap = obj.global_eval(xbar) - fstar
    if gap < -1e-6:
        raise ReferenceSolveError(
            f"optimality gap {gap:.3e} is negative beyond tolerance; "
            "reference value is wrong"
        )
    return max(gap, 0.0) if gap < 0.0 else gap


def reference_solution(
    obj: Objective, fset: FeasibleSet, tol: float = 1e-8, max_iter: int = 10_000_000
) -> tuple[np.ndarray, float]:
    """Minimize F over the set by centralized conditional gradient with exact
    line search on the quadratic, until the linearized gap is at most tol.

    Deterministic: starts from the vertex selected by the gradient at zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    avg = obj.average_cost()
    x = fset.lmo(avg.b)  # b is grad F at the origin
    for _ in range(max_iter):
        g = avg.grad(x)
        v = fset.lmo(g)
        d = v - x
        gap = float(-g @ d)
        if gap <= tol:
            return x, avg.eval(x)
        curvature = float(d @ avg.Q @ d)
        if curvature <= 0.0:
            gamma = 1.0
        else:
            gamma = min(1.0, gap / curvature)
        x = x + gamma * d
    raise ReferenceSolveError(
        f"conditional gradient did not certify gap <= {tol} in {max_iter} iterations"
    )


@dataclass(frozen=True)
class TimingResult:
    kind: str
    set_name: str
    dim: int
    mean_ns: float
    median_ns: float


def time_subproblem(
    kind: str, fset: FeasibleSet, probe: np.ndarray, repeats: int
) -> TimingResult:
    """Monotonic-clock timing of one subproblem solve, mean over repeats with
    the first 10% discarded as warm-up."""
    if repeats < 10:
        raise ValueError("repeats must be at least 10")
    if kind == "lmo":
        fn = fset.lmo
    elif kind == "projection":
        fn = fset.project
    else:
        raise ValueError(f"unknown subproblem kind {kind!r}")
    probe = np.asarray(probe, dtype=float)
    samples = np.empty(repeats)
    for r in range(repeats):
        start = time.perf_counter_ns()
        fn(probe)
        samples[r] = time.perf_counter_ns() - start
    kept = samples[max(1, repeats // 10):]
    return TimingResult(
        kind=kind,
        set_name=type(fset).__name__,
        dim=fset.dim,
        mean_ns=float(kept.mean()),
        median_ns=float(np.median(kept)),
    )


def write_timings_csv(path, results: list[TimingResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "set", "dim", "mean_ns", "median_ns"])
        for r in results:
            writer.writerow([r.kind, r.set_name, r.dim, repr(r.mean_ns), repr(r.median_ns)])


_SCALAR_FUNCS = {
    "constant": lambda t: np.ones_like(t),
    "inv_linear": lambda t: 1.0 / (1.0 + t),
    "exp_decay": lambda t: np.exp(-t),
}


def lemma2_numeric_check(
    gamma: str, epsilon: str, s0: float, horizon: float, h: float = 1e-3
) -> float:
    """Integrate ds/dt = -gamma(t) s + gamma(t) eps(t) by explicit Euler and
    return s(horizon).

    ``gamma`` and ``epsilon`` name entries of a small fixed catalogue
    ({constant, inv_linear, exp_decay}); with a divergent gamma integral and
    vanishing eps the solution must vanish, which tests assert at finite
    horizons.
    """
    for name in (gamma, epsilon):
        if name not in _SCALAR_FUNCS:
            raise ValueError(
                f"unknown catalogue entry {name!r}; choose from {sorted(_SCALAR_FUNCS)}"
            )
    gfun = _SCALAR_FUNCS[gamma]
    efun = _SCALAR_FUNCS[epsilon]
    n_steps = int(round(horizon / h))
    s = float(s0)
    chunk = 500_000
    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        t = (done + np.arange(m)) * h
        g = gfun(t)
        e = efun(t)
        # one Euler pass over the chunk via cumulative products:
        # s_{k+1} = s_k (1 - h g_k) + h g_k e_k
        factors = 1.0 - h * g
        cp = np.cumprod(factors)
        total = cp[-1]
        s = total * s + total * np.sum(h * g * e / cp)
        done += m
    return s
