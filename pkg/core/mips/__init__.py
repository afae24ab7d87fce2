"""Approximate maximum inner product search: reduction, oracles, amplification."""
from .adaptive import AdaptiveMipsIndex, IndexStats, MipsAnswer, QueryOutcome, build_adaptive, compute_kappa, round_to_lattice
from .lsh import LshIndex, LshStats, build_lsh
from .oracle import AnnOracle, BruteForceOracle, OracleAnswer, OracleBackend, brute_force_mips
from .point_set import PointSet
from .reduction import AnnSpec, MipsSpec, ann_params, lift_point, lift_points, lift_queries, lift_query

__all__ = [
    "AdaptiveMipsIndex",
    "AnnOracle",
    "AnnSpec",
    "BruteForceOracle",
    "IndexStats",
    "LshIndex",
    "LshStats",
    "MipsAnswer",
    "MipsSpec",
    "OracleAnswer",
    "OracleBackend",
    "PointSet",
    "QueryOutcome",
    "ann_params",
    "brute_force_mips",
    "build_adaptive",
    "build_lsh",
    "compute_kappa",
    "lift_point",
    "lift_points",
    "lift_queries",
    "lift_query",
    "round_to_lattice",
]
