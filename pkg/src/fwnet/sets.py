"""Constraint sets with linear minimization, Euclidean projection, membership.

Every set exposes the three capabilities the dynamics and baselines need:
``lmo`` (the linear subproblem, always returning a vertex under deterministic
tie-breaking), ``project`` (the quadratic subproblem), and ``contains``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionMismatchError(ValueError):
    """Input vector dimension does not match the set."""


class ProjectionConvergenceError(RuntimeError):
    """Iterative projection failed to converge within the iteration cap."""


def _check_dim(name: str, v: np.ndarray, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise DimensionMismatchError(f"{name} expects shape ({dim},), got {v.shape}")
    return v


class FeasibleSet:
    """Base class; concrete variants are Box, Simplex, L1Ball, VertexPolytope."""

    dim: int

    def lmo(self, z: np.ndarray) -> np.ndarray:
        """Vertex of the set minimizing v . z, deterministic under ties."""
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:
        """Euclidean projection of x onto the set."""
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        """True iff the distance from x to the set is at most tol."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = _check_dim("contains", x, self.dim)
        return bool(np.linalg.norm(x - self.project(x)) <= tol)

    def sample_point(self, rng_seed: int) -> np.ndarray:
        """Deterministic feasible point for the given seed."""
        raise NotImplementedError

    def vertices(self) -> np.ndarray | None:
        """Full vertex list as rows, or None when enumeration is infeasible."""
        return None


def _exp_weights(rng: np.random.Generator, count: int) -> np.ndarray:
    w = rng.exponential(size=count)
    return w / w.sum()


@dataclass(frozen=True)
class Box(FeasibleSet):
    """Axis-aligned box {x : lower <= x <= upper} componentwise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box is empty: lower > upper somewhere")
        lo, hi = lo.copy(), hi.copy()
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def lmo(self, z: np.ndarray) -> np.ndarray:
        z = _check_dim("lmo", z, self.dim)
        # z_k > 0 -> lower_k; z_k < 0 -> upper_k; ties (z_k == 0) -> lower_k
        return np.where(z < 0, self.upper, self.lower)

    def project(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim("project", x, self.dim)
        return np.clip(x, self.lower, self.upper)

    def sample_point(self, rng_seed: int) -> np.ndarray:
        rng = np.random.default_rng(rng_seed)
        u = rng.uniform(size=self.dim)
        return self.lower + u * (self.upper - self.lower)

    def vertices(self) -> np.ndarray | None:
        n = self.dim
        if n > 20:
            return None
        corners = np.empty((2**n, n))
        for k in range(2**n):
            bits = (k >> np.arange(n)) & 1
            corners[k] = np.where(bits == 1, self.upper, self.lower)
        return corners


def cube(radius: float, dim: int) -> Box:
    """The box {x : |x_k| <= radius}, i.e. the sup-norm ball."""
    r = float(radius)
    return Box(np.full(dim, -r), np.full(dim, r))


def _project_simplex(x: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {y >= 0, sum(y) = radius}, sort-based, exact."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, x.size + 1)
    rho = int(np.nonzero(u - css / idx > 0)[0].max()) + 1
    theta = css[rho - 1] / rho
    return np.maximum(x - theta, 0.0)


@dataclass(frozen=True)
class Simplex(FeasibleSet):
    """Scaled probability simplex {x : x >= 0, sum(x) = radius}."""

    radius: float
    dim: int

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def lmo(self, z: np.ndarray) -> np.ndarray:
        z = _check_dim("lmo", z, self.dim)
        v = np.zeros(self.dim)
        v[int(np.argmin(z))] = self.radius  # argmin takes the smallest index on ties
        return v

    def project(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim("project", x, self.dim)
        return _project_simplex(x, self.radius)

    def sample_point(self, rng_seed: int) -> np.ndarray:
        rng = np.random.default_rng(rng_seed)
        return self.radius * _exp_weights(rng, self.dim)

    def vertices(self) -> np.ndarray:
        return self.radius * np.eye(self.dim)


@dataclass(frozen=True)
class L1Ball(FeasibleSet):
    """The l1 ball {x : sum_k |x_k| <= radius}."""

    radius: float
    dim: int

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def lmo(self, z: np.ndarray) -> np.ndarray:
        z = _check_dim("lmo", z, self.dim)
        k = int(np.argmax(np.abs(z)))
        sign = 1.0 if z[k] >= 0 else -1.0  # sign(0) := +1
        v = np.zeros(self.dim)
        v[k] = -self.radius * sign
        return v

    def project(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim("project", x, self.dim)
        if np.abs(x).sum() <= self.radius:
            return x.copy()
        beta = _project_simplex(np.abs(x), self.radius)
        return np.sign(x) * beta

    def sample_point(self, rng_seed: int) -> np.ndarray:
        rng = np.random.default_rng(rng_seed)
        w = _exp_weights(rng, 2 * self.dim)
        return self.radius * (w[: self.dim] - w[self.dim :])

    def vertices(self) -> np.ndarray:
        eye = self.radius * np.eye(self.dim)
        return np.vstack([eye, -eye])


def cross_polytope(radius: float, dim: int) -> "VertexPolytope":
    """The l1 ball in vertex description: conv{+-radius * e_k}."""
    eye = float(radius) * np.eye(dim)
    return VertexPolytope(np.vstack([eye, -eye]))


@dataclass(frozen=True)
class VertexPolytope(FeasibleSet):
    """Convex hull of an explicit vertex list (rows of ``verts``).

    The LMO is a finite argmin over vertices. Projection has no closed form;
    it is solved as a quadratic program over the convex-combination weights by
    accelerated projected gradient on the weight simplex, run to a certified
    tolerance (the linearized optimality gap bounds the squared point error).
    """

    verts: np.ndarray
    proj_tol: float = 1e-10
    proj_max_iter: int = 100_000

    def __post_init__(self):
        v = np.asarray(self.verts, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("verts must be a nonempty 2-d array of vertex rows")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "verts", v)

    @property
    def dim(self) -> int:
        return self.verts.shape[1]

    def lmo(self, z: np.ndarray) -> np.ndarray:
        z = _check_dim("lmo", z, self.dim)
        return self.verts[int(np.argmin(self.verts @ z))].copy()

    def project(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim("project", x, self.dim)
        verts = self.verts
        m = verts.shape[0]
        if m == 1:
            return verts[0].copy()
        # minimize phi(w) = 0.5 * ||verts.T w - x||^2 over the weight simplex
        lip = float(np.linalg.eigvalsh(verts @ verts.T).max())
        if lip <= 0:  # all vertices at the origin
            return verts[0].copy()
        step = 1.0 / lip
        w = np.full(m, 1.0 / m)
        w_prev = w
        momentum = 0.0
        stall = 0
        best_gap = np.inf
        for _ in range(self.proj_max_iter):
            momentum_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum**2))
            u = w + ((momentum - 1.0) / momentum_next) * (w - w_prev)
            residual = verts.T @ u - x
            grad = verts @ residual
            w_prev, w = w, _project_simplex(u - step * grad, 1.0)
            # adaptive restart: drop momentum when it opposes the step taken
            if (u - w) @ (w - w_prev) > 0.0:
                momentum = 0.0
                w_prev = w
            else:
                momentum = momentum_next
            # certificate: max_q (p - x).(p - q) over vertices q bounds ||p - p*||^2
            p_res = verts.T @ w - x
            scores = verts @ p_res
            gap = float(w @ scores - scores.min())
            if gap <= self.proj_tol**2:
                break
            if gap >= best_gap * (1.0 - 1e-9):
                stall += 1
                if stall > 500:  # floating-point floor reached
                    break
            else:
                best_gap = gap
                stall = 0
        else:
            raise ProjectionConvergenceError(
                f"polytope projection did not converge in {self.proj_max_iter} iterations"
            )
        return verts.T @ w

    def sample_point(self, rng_seed: int) -> np.ndarray:
        rng = np.random.default_rng(rng_seed)
        w = _exp_weights(rng, self.verts.shape[0])
        return self.verts.T @ w

    def vertices(self) -> np.ndarray:
        return self.verts.copy()
