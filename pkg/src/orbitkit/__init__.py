"""orbitkit: exact computation with multivalued dynamics on [0, 1]."""

from .space import (
    ClosedSet,
    Q,
    canonicalize,
    combine,
    hausdorff,
    interval,
    intersection,
    maxdist,
    parse_set,
    point,
    rho_prefix,
    union,
)
from .setmap import (
    FiniteSystem,
    SetValuedMap,
    evaluate,
    finite_system,
    image,
    iterate,
    lsc_check,
    make_map,
    preimage,
    preimage_union_map,
    usc_check,
    values_connected_check,
)
from .orbit import (
    OrbitCover,
    OrbitTree,
    depth_connectivity,
    inverse_limit_prefixes,
    orbit_cover,
    orbit_tree,
    project_k,
    sibling_within,
)
from .analysis import (
    TransitionGraph,
    Verdict,
    dense_orbit_build,
    finite_oracle,
    minimality_check,
    to_dot,
    transition_graph,
    transitivity_probe,
    weak_dense_probe,
)
from .sensitivity import (
    ProbeBudget,
    SensitivityWitness,
    recurrent_separation_probe,
    sensitivity_probe,
)
from .corpus import builtin, list_builtins

__version__ = "0.1.0"

__all__ = [
    "ClosedSet", "Q", "canonicalize", "combine", "hausdorff", "interval",
    "intersection", "maxdist", "parse_set", "point", "rho_prefix", "union",
    "FiniteSystem", "SetValuedMap", "evaluate", "finite_system", "image",
    "iterate", "lsc_check", "make_map", "preimage", "preimage_union_map",
    "usc_check", "values_connected_check",
    "OrbitCover", "OrbitTree", "depth_connectivity", "inverse_limit_prefixes",
    "orbit_cover", "orbit_tree", "project_k", "sibling_within",
    "TransitionGraph", "Verdict", "dense_orbit_build", "finite_oracle",
    "minimality_check", "to_dot", "transition_graph", "transitivity_probe",
    "weak_dense_probe",
    "ProbeBudget", "SensitivityWitness", "recurrent_separation_probe",
    "sensitivity_probe",
    "builtin", "list_builtins",
]
