"""Directed weighted communication graphs and their structural checks.

Edge convention: ``adjacency[i, j] > 0`` means agent ``j`` sends information
to agent ``i``. All consensus sums in the dynamics follow this orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BALANCE_TOL = 1e-9
EIG_TOL = 1e-9


class GraphValidationError(ValueError):
    """Raised when a graph violates a structural requirement."""


@dataclass(frozen=True)
class Digraph:
    """Weighted digraph on N agents, immutable after construction.

    Parameters
    ----------
    adjacency : ndarray, shape (N, N)
        Nonnegative weights with zero diagonal; ``adjacency[i, j] > 0``
        iff j sends to i.
    """

    adjacency: np.ndarray = field()

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphValidationError(f"adjacency must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise GraphValidationError("graph needs at least one agent")
        if np.any(a < 0):
            raise GraphValidationError("adjacency weights must be nonnegative")
        if np.any(np.diag(a) != 0):
            raise GraphValidationError("adjacency diagonal must be zero (no self-loops)")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]

    @property
    def max_degree(self) -> float:
        """Largest weighted in-degree, max_i sum_j a_ij."""
        return float(self.adjacency.sum(axis=1).max())


def laplacian(g: Digraph) -> np.ndarray:
    """Return L = D - A with D the diagonal of row sums of A."""
    a = g.adjacency
    return np.diag(a.sum(axis=1)) - a


def is_weight_balanced(g: Digraph, tol: float = BALANCE_TOL) -> bool:
    """True iff every node's weighted in-degree equals its out-degree within tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = g.adjacency
    return bool(np.all(np.abs(a.sum(axis=1) - a.sum(axis=0)) <= tol))


def is_strongly_connected(g: Digraph) -> bool:
    """True iff a directed path joins every ordered pair of distinct nodes.

    Decided by two reachability sweeps from node 0: one on the graph,
    one on the reverse graph.
    """
    a = g.adjacency
    return _reaches_all(a) and _reaches_all(a.T)


def _reaches_all(a: np.ndarray) -> bool:
    # BFS from node 0 over edges j -> i encoded as a[i, j] > 0.
    n = a.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        j = frontier.pop()
        for i in np.nonzero(a[:, j] > 0)[0]:
            if not seen[i]:
                seen[i] = True
                frontier.append(int(i))
    return bool(seen.all())


def lambda2(g: Digraph) -> float:
    """Smallest positive eigenvalue of the symmetrized Laplacian (L + L^T) / 2.

    Requires a strongly connected, weight-balanced graph; raises
    GraphValidationError if no eigenvalue exceeds ``EIG_TOL`` (the graph is
    then effectively disconnected).
    """
    lap = laplacian(g)
    sym = 0.5 * (lap + lap.T)
    eigvals = np.linalg.eigvalsh(sym)
    positive = eigvals[eigvals > EIG_TOL]
    if positive.size == 0:
        raise GraphValidationError(
            "symmetrized Laplacian has no eigenvalue above "
            f"{EIG_TOL}; graph is not connected"
        )
    return float(positive.min())


def make_topology(kind: str, n_agents: int, weight: float = 1.0) -> Digraph:
    """Build a named uniformly-weighted topology.

    ``kind`` is one of ``directed_ring`` (agent i receives from i-1),
    ``undirected_ring``, or ``complete``. All three are strongly connected
    and weight-balanced.
    """
    if n_agents < 2:
        raise GraphValidationError(f"n_agents must be >= 2, got {n_agents}")
    if weight <= 0:
        raise GraphValidationError(f"weight must be positive, got {weight}")
    a = np.zeros((n_agents, n_agents))
    if kind == "directed_ring":
        for i in range(n_agents):
            a[i, (i - 1) % n_agents] = weight
    elif kind == "undirected_ring":
        for i in range(n_agents):
            a[i, (i - 1) % n_agents] = weight
            a[i, (i + 1) % n_agents] = weight
    elif kind == "complete":
        a[:] = weight
        np.fill_diagonal(a, 0.0)
    else:
        raise GraphValidationError(f"unknown topology kind: {kind!r}")
    return Digraph(a)
