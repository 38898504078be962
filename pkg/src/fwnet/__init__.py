"""Projection-free multi-agent optimization dynamics over directed networks."""

from .graphs import Digraph, is_strongly_connected, is_weight_balanced, lambda2, laplacian, make_topology
from .objectives import Objective, QuadraticCost, fig1_instance, random_instance
from .sets import Box, FeasibleSet, L1Ball, Simplex, VertexPolytope, cross_polytope, cube
from .dynamics import IntegratorConfig, NetworkState, Schedule, euler_step_bound, inverse_linear, inverse_power, rhs, simulate, step
from .baselines import DiscreteConfig, ProjectedConfig, defw_step, discretized_cg_step, projected_dynamics_step, run_defw, run_discretized_cg, run_projected
from .metrics import RunRecord, consensus_error, fw_gap, lemma2_numeric_check, optimality_gap, reference_solution, time_subproblem, tracking_error

__version__ = "0.1.0"
