"""qma2lab: a verification lab for a two-prover quantum Merlin-Arthur
protocol over 2-out-of-4-SAT.

Pipeline: parse 3-SAT (`sat_io`), reduce to clause vectors, build honest
witnesses and exact acceptance probabilities (`qstate`, `hamiltonian`,
`verifier`), attack soundness with a separable-witness optimizer
(`adversary`), and orchestrate gap experiments (`harness`).
"""

from .adversary import (
    AttackConfig,
    AttackResult,
    cheat_objective,
    enumerate_proper_cheats,
    maximize_s,
    objective_gradient,
    optimize_cheat,
)
from .errors import InvariantError
from .hamiltonian import (
    PairBasis,
    PairWitness,
    b_coeffs,
    dense_h,
    dense_operator,
    optimal_phi,
    properness_accept_prob,
)
from .qstate import (
    PolarDecomp,
    ProperState,
    StateVec,
    nearest_proper,
    polar_decomp,
    proper_state,
    random_near_proper,
    random_state,
    s_max,
    s_value,
    trace_distance_pure,
)
from .sat_io import (
    Assignment,
    Cnf3,
    DimacsError,
    ExhaustiveResult,
    TwoFourInstance,
    bound_occurrences,
    exhaustive_sat_search,
    parse_2of4,
    parse_dimacs,
    reduce_to_2of4,
    write_2of4,
)
from .verifier import (
    ClauseVectorSet,
    ProtocolConstants,
    combined_accept_prob,
    completeness,
    honest_witnesses,
    protocol_constants,
    run_protocol_sampled,
    sat_reject_prob,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AttackConfig",
    "AttackResult",
    "ClauseVectorSet",
    "Cnf3",
    "DimacsError",
    "ExhaustiveResult",
    "InvariantError",
    "PairBasis",
    "PairWitness",
    "PolarDecomp",
    "ProperState",
    "ProtocolConstants",
    "StateVec",
    "TwoFourInstance",
    "b_coeffs",
    "bound_occurrences",
    "cheat_objective",
    "combined_accept_prob",
    "completeness",
    "dense_h",
    "dense_operator",
    "enumerate_proper_cheats",
    "exhaustive_sat_search",
    "honest_witnesses",
    "maximize_s",
    "nearest_proper",
    "objective_gradient",
    "optimal_phi",
    "optimize_cheat",
    "parse_2of4",
    "parse_dimacs",
    "polar_decomp",
    "proper_state",
    "properness_accept_prob",
    "protocol_constants",
    "random_near_proper",
    "random_state",
    "reduce_to_2of4",
    "run_protocol_sampled",
    "s_max",
    "s_value",
    "sat_reject_prob",
    "trace_distance_pure",
    "write_2of4",
]
