"""Quadratic agent costs, network objectives, and instance generators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sets import Box, FeasibleSet, cube


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticCost:
    """f(x) = 0.5 x^T Q x + b^T x + c with Q symmetric positive semidefinite."""

    Q: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"Q must be square, got shape {q.shape}")
        if b.shape != (q.shape[0],):
            raise ValueError("b must match Q's dimension")
        if np.abs(q - q.T).max(initial=0.0) > 1e-12:
            raise ValueError("Q must be symmetric to 1e-12")
        if np.linalg.eigvalsh(q).min() < -1e-10:
            raise ValueError("Q must be positive semidefinite (eigenvalues >= -1e-10)")
        q, b = q.copy(), b.copy()
        q.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    def eval(self, x: np.ndarray) -> float:
        x = self._check(x)
        return float(0.5 * x @ self.Q @ x + self.b @ x + self.c)

    def grad(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        return self.Q @ x + self.b

    def lipschitz(self) -> float:
        """Gradient Lipschitz constant, the largest eigenvalue of Q."""
        return float(np.linalg.eigvalsh(self.Q).max())

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatchError(f"expected shape ({self.dim},), got {x.shape}")
        return x


def quadratic_from_center(weight: float, center: np.ndarray) -> QuadraticCost:
    """The cost weight * ||x - center||^2 in (Q, b, c) form."""
    center = np.asarray(center, dtype=float)
    n = center.shape[0]
    return QuadraticCost(
        Q=2.0 * weight * np.eye(n),
        b=-2.0 * weight * center,
        c=float(weight * center @ center),
    )


@dataclass(frozen=True)
class Objective:
    """The per-agent costs f_i and their average F(x) = (1/N) sum_i f_i(x)."""

    costs: tuple[QuadraticCost, ...] = field()

    def __post_init__(self):
        costs = tuple(self.costs)
        if not costs:
            raise ValueError("objective needs at least one cost")
        dims = {c.dim for c in costs}
        if len(dims) != 1:
            raise ValueError(f"all costs must share one dimension, got {sorted(dims)}")
        object.__setattr__(self, "costs", costs)

    @property
    def n_agents(self) -> int:
        return len(self.costs)

    @property
    def dim(self) -> int:
        return self.costs[0].dim

    def global_eval(self, x: np.ndarray) -> float:
        return sum(c.eval(x) for c in self.costs) / self.n_agents

    def global_grad(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros(self.dim)
        for c in self.costs:
            g += c.grad(x)
        return g / self.n_agents

    def stacked_grad(self, x_rows: np.ndarray) -> np.ndarray:
        """Row i is grad f_i evaluated at row i of ``x_rows`` (shape N x n)."""
        x_rows = np.asarray(x_rows, dtype=float)
        if x_rows.shape != (self.n_agents, self.dim):
            raise DimensionMismatchError(
                f"expected shape ({self.n_agents}, {self.dim}), got {x_rows.shape}"
            )
        return np.vstack([c.grad(row) for c, row in zip(self.costs, x_rows)])

    def average_cost(self) -> QuadraticCost:
        """F itself as a single quadratic (mean of the agent quadratics)."""
        n = self.n_agents
        q = sum(c.Q for c in self.costs) / n
        b = sum(c.b for c in self.costs) / n
        const = sum(c.c for c in self.costs) / n
        return QuadraticCost(0.5 * (q + q.T), b, const)

    def lipschitz_bound(self) -> float:
        """max_i of the agent gradient Lipschitz constants."""
        return max(c.lipschitz() for c in self.costs)


def fig1_instance() -> tuple[Objective, Box]:
    """The 4-agent, 2-d benchmark: f_j(x) = ||x - c_j||^2 with collinear
    centers c_j = (5/3 - 2j/3) * (1, 1), on the box |x_k| <= 2.

    The centers average to the origin, so the constrained optimum is the
    origin with optimal value 10/9.
    """
    costs = []
    for j in range(1, 5):
        scale = 5.0 / 3.0 - 2.0 * j / 3.0
        costs.append(quadratic_from_center(1.0, np.array([scale, scale])))
    return Objective(tuple(costs)), cube(2.0, 2)


def _random_rotation_apply(rng: np.random.Generator, diag: np.ndarray) -> np.ndarray:
    """Q = R^T diag R with R a product of seeded Givens rotations."""
    n = diag.shape[0]
    q = np.diag(diag)
    if n < 2:
        return q
    for _ in range(3 * n):
        i, j = rng.choice(n, size=2, replace=False)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        c, s = np.cos(theta), np.sin(theta)
        rows_i, rows_j = q[i].copy(), q[j].copy()
        q[i] = c * rows_i + s * rows_j
        q[j] = -s * rows_i + c * rows_j
        cols_i, cols_j = q[:, i].copy(), q[:, j].copy()
        q[:, i] = c * cols_i + s * cols_j
        q[:, j] = -s * cols_i + c * cols_j
    return 0.5 * (q + q.T)


def random_instance(
    n_agents: int, dim: int, rng_seed: int, conditioning: float = 1.0
) -> Objective:
    """Seeded random quadratics: per agent, eigenvalues log-uniform in
    [1, conditioning] under a random rotation, centered at a uniform point
    in [-1, 1]^dim. Same seed, same objective.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if n_agents < 2:
        raise ValueError("n_agents must be >= 2")
    if conditioning < 1:
        raise ValueError("conditioning must be >= 1")
    rng = np.random.default_rng(rng_seed)
    costs = []
    for _ in range(n_agents):
        diag = np.exp(rng.uniform(0.0, np.log(conditioning), size=dim))
        q = _random_rotation_apply(rng, diag)
        center = rng.uniform(-1.0, 1.0, size=dim)
        b = -q @ center
        costs.append(QuadraticCost(q, b, float(0.5 * center @ q @ center)))
    return Objective(tuple(costs))


def feasible_minimizer_is_interior(obj: Objective, fset: FeasibleSet) -> bool:
    """Convenience check used by tests: unconstrained minimizer inside the set."""
    avg = obj.average_cost()
    x_free = np.linalg.lstsq(avg.Q, -avg.b, rcond=None)[0]
    return fset.contains(x_free, 1e-9)
