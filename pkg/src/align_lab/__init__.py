"""Exact alignment of attributed Erdős–Rényi graph pairs at desk scale."""

from .alignment import Weights, delta_a, delta_pi, delta_u, map_align, posterior_oracle, weighted_distance, weights
from .bounds import classify_region, margin_converse, margin_lemma2, margin_report, margin_thm1, union_bound_error
from .genfunc import WeightExponentPoly, full_pgf, induced_orbits, lemma4_bound, orbit_pgf, prob_delta_leq_zero, psi
from .model import (
    AttributedGraph,
    GraphPair,
    JointEdgeDistribution,
    ModelParams,
    SubsamplingParams,
    anonymize,
    correlation,
    from_subsampling,
    intersection,
    sample_pair,
    validate,
)
from .permutation import Permutation

__version__ = "0.1.0"
