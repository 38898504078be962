"""Experiment configuration: TOML loading, validation, object construction.

One structured-text file describes one experiment. Every sub-table is
validated against its module's preconditions before any run starts, so a
bad config fails fast with a message naming the violated assumption.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .baselines import DiscreteConfig, ProjectedConfig
from .dynamics import IntegratorConfig, Schedule
from .graphs import Digraph, make_topology
from .objectives import Objective, QuadraticCost, fig1_instance, random_instance
from .sets import Box, FeasibleSet, L1Ball, Simplex, VertexPolytope, cube

ALGORITHMS = ("cg_ode", "cg_discrete", "defw", "projected")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def build_graph(spec: dict) -> Digraph:
    if "adjacency" in spec:
        return Digraph(np.asarray(spec["adjacency"], dtype=float))
    try:
        return make_topology(spec["kind"], int(spec["n_agents"]), float(spec.get("weight", 1.0)))
    except KeyError as exc:
        raise ConfigError(f"graph spec missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid graph spec: {exc}") from exc


def build_set(spec: dict) -> FeasibleSet:
    kind = spec.get("type")
    try:
        if kind == "box":
            if "radius" in spec:
                return cube(float(spec["radius"]), int(spec["dim"]))
            return Box(np.asarray(spec["lower"], float), np.asarray(spec["upper"], float))
        if kind == "simplex":
            return Simplex(float(spec["radius"]), int(spec["dim"]))
        if kind == "l1ball":
            return L1Ball(float(spec["radius"]), int(spec["dim"]))
        if kind == "polytope":
            return VertexPolytope(np.asarray(spec["vertices"], float))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid set spec: {exc}") from exc
    raise ConfigError(f"unknown set type {kind!r}")


def build_objective(spec: dict) -> Objective:
    kind = spec.get("type")
    try:
        if kind == "fig1":
            return fig1_instance()[0]
        if kind == "random":
            return random_instance(
                int(spec["n_agents"]),
                int(spec["dim"]),
                int(spec["seed"]),
                float(spec.get("conditioning", 1.0)),
            )
        if kind == "explicit":
            costs = tuple(
                QuadraticCost(
                    np.asarray(c["Q"], float),
                    np.asarray(c["b"], float),
                    float(c.get("c", 0.0)),
                )
                for c in spec["costs"]
            )
            return Objective(costs)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid objective spec: {exc}") from exc
    raise ConfigError(f"unknown objective type {kind!r}")


def build_schedule(spec: dict) -> Schedule:
    kind = spec.get("kind", "inverse_linear")
    try:
        if kind == "inverse_linear":
            return Schedule(t0=float(spec.get("t0", 1.0)), power=1.0)
        if kind == "inverse_power":
            return Schedule(t0=float(spec.get("t0", 1.0)), power=float(spec["p"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid schedule spec: {exc}") from exc
    raise ConfigError(f"unknown schedule kind {kind!r}")


def build_integrator(spec: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            method=spec.get("method", "euler"),
            h=float(spec["h"]),
            horizon=float(spec["horizon"]),
            record_every=float(spec.get("record_every", 1.0)),
            exact_feasibility=bool(spec.get("exact_feasibility", True)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid integrator spec: {exc}") from exc


def build_discrete(spec: dict) -> DiscreteConfig:
    try:
        return DiscreteConfig(
            delta=float(spec.get("delta", 0.5)),
            schedule=build_schedule(spec.get("schedule", {})),
            n_iters=int(spec["n_iters"]),
            record_every=int(spec.get("record_every", 10)),
            gossip_rounds=int(spec.get("gossip_rounds", 1)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid discrete spec: {exc}") from exc


def build_projected(spec: dict) -> ProjectedConfig:
    try:
        return ProjectedConfig(
            h=float(spec.get("h", 0.3)),
            alpha=float(spec.get("alpha", 0.3)),
            n_iters=int(spec["n_iters"]),
            record_every=int(spec.get("record_every", 10)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid projected spec: {exc}") from exc


@dataclass
class ExperimentConfig:
    """Fully resolved experiment: instance objects plus per-algorithm configs."""

    name: str
    algorithms: list[str]
    graph: Digraph
    objective: Objective
    fset: FeasibleSet
    seed: int
    output: str
    x0: np.ndarray | None = None
    schedule: Schedule | None = None
    integrator: IntegratorConfig | None = None
    discrete: DiscreteConfig | None = None
    projected: ProjectedConfig | None = None
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("config lists no algorithms")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}, expected one of {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("duplicate algorithm entries")
        if "cg_ode" in self.algorithms and (self.schedule is None or self.integrator is None):
            raise ConfigError("cg_ode requires [schedule] and [integrator] tables")
        if any(a in self.algorithms for a in ("cg_discrete", "defw")) and self.discrete is None:
            raise ConfigError("cg_discrete/defw require a [discrete] table")
        if "projected" in self.algorithms and self.projected is None:
            raise ConfigError("projected requires a [projected] table")
        if self.objective.dim != self.fset.dim:
            raise ConfigError("objective and set dimensions differ")
        if self.objective.n_agents != self.graph.n_agents:
            raise ConfigError("objective agent count differs from graph size")
        if self.x0 is not None and self.x0.shape != (self.graph.n_agents, self.fset.dim):
            raise ConfigError("x0 has the wrong shape")


def load_experiment(path, seed_override: int | None = None) -> ExperimentConfig:
    raw = _load_toml(path)
    for key in ("graph", "objective", "set"):
        if key not in raw:
            raise ConfigError(f"config is missing the [{key}] table")
    algorithms = raw.get("algorithms")
    if algorithms is None:
        algorithms = [raw.get("algorithm", "cg_ode")]
    init = raw.get("init", {})
    x0 = np.asarray(init["x0"], dtype=float) if "x0" in init else None
    seed = int(init.get("seed", raw.get("seed", 0)))
    if seed_override is not None:
        seed = seed_override
    return ExperimentConfig(
        name=str(raw.get("name", Path(path).stem)),
        algorithms=list(algorithms),
        graph=build_graph(raw["graph"]),
        objective=build_objective(raw["objective"]),
        fset=build_set(raw["set"]),
        seed=seed,
        output=str(raw.get("output", Path(path).stem)),
        x0=x0,
        schedule=build_schedule(raw["schedule"]) if "schedule" in raw else None,
        integrator=build_integrator(raw["integrator"]) if "integrator" in raw else None,
        discrete=build_discrete(raw["discrete"]) if "discrete" in raw else None,
        projected=build_projected(raw["projected"]) if "projected" in raw else None,
        raw=raw,
    )


@dataclass
class BenchConfig:
    name: str
    dims: list[int]
    set_kind: str
    repeats: int
    radius: float
    probe_seed: int
    output: str

    def __post_init__(self):
        if not self.dims:
            raise ConfigError("bench needs a nonempty dims list")
        if any(d < 1 for d in self.dims):
            raise ConfigError("bench dims must be positive")
        if self.repeats < 10:
            raise ConfigError("bench repeats must be at least 10")
        if self.set_kind not in ("box", "simplex", "l1ball", "cross_polytope",
                                 "box_vs_cross_polytope"):
            raise ConfigError(f"unknown bench set_kind {self.set_kind!r}")


def load_bench(path) -> BenchConfig:
    raw = _load_toml(path)
    try:
        return BenchConfig(
            name=str(raw.get("name", Path(path).stem)),
            dims=[int(d) for d in raw["dims"]],
            set_kind=str(raw.get("set_kind", "box_vs_cross_polytope")),
            repeats=int(raw.get("repeats", 50)),
            radius=float(raw.get("radius", 2.0)),
            probe_seed=int(raw.get("probe_seed", 0)),
            output=str(raw.get("output", Path(path).stem)),
        )
    except KeyError as exc:
        raise ConfigError(f"bench config missing key {exc}") from exc


def _load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
