"""Super-node compression of large networks for fast, stable community detection."""

from .compression import (PERIPHERY, SuperNodeAssignment, SuperNodeNetwork, contract,
                          grow_supernodes, map_partition)
from .evaluation import (EvalConfig, MatchResolutionResult, VariabilityResult,
                         benchmark, default_gamma_grid, match_resolution,
                         run_evaluation, variability_experiment)
from .generator import planted_partition
from .graph import (EdgeListParseError, Graph, extract_core_subgraph, k_core,
                    neighborhood, parse_edge_list, write_edge_list)
from .louvain import louvain, modularity
from .metrics import (community_size_ranking, kendall_tau, min_auc,
                      neighbor_community_distribution, nmi)
from .partition import Partition
from .rng import derive_seed
from .sbm import (BlockModelParams, estimate_pi, fit_sbm, fit_sbm_supernodes,
                  sbm_loglik, select_k, select_k_supernodes)
from .seeding import SeedSet, corehd_seeds, degree_seeds

__all__ = [
    "BlockModelParams", "EdgeListParseError", "EvalConfig", "Graph",
    "MatchResolutionResult", "PERIPHERY", "Partition", "SeedSet",
    "SuperNodeAssignment", "SuperNodeNetwork", "VariabilityResult", "benchmark",
    "community_size_ranking", "contract", "corehd_seeds", "default_gamma_grid",
    "degree_seeds", "derive_seed", "estimate_pi", "extract_core_subgraph",
    "fit_sbm", "fit_sbm_supernodes", "grow_supernodes", "k_core", "kendall_tau",
    "louvain", "map_partition", "match_resolution", "min_auc", "modularity",
    "neighbor_community_distribution", "neighborhood", "nmi", "parse_edge_list",
    "planted_partition", "run_evaluation", "sbm_loglik", "select_k",
    "select_k_supernodes", "variability_experiment", "write_edge_list",
]

__version__ = "0.1.0"
