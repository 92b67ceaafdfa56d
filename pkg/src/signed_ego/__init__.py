"""Signed ego networks from directed interaction logs."""

__version__ = "0.1.0"

from .analytics import (
    bin_and_test,
    circle_report,
    composition_report,
    correlate,
    negativity_full_vs_active,
    negativity_metrics,
)
from .egonet import assemble_circles, build_ego_network, compute_frequencies, mean_shift_1d
from .ingest import FilterRules, filter_egos, parse_interactions
from .sentiment import classify_interaction, load_lexicon, score_text
from .signing import build_profiles, compare_classifiers, sign_relationship
from .triads import build_signed_graph, census_triads, check_weak_balance, null_model_surprise

__all__ = [
    "FilterRules",
    "assemble_circles",
    "bin_and_test",
    "build_ego_network",
    "build_profiles",
    "build_signed_graph",
    "census_triads",
    "check_weak_balance",
    "circle_report",
    "classify_interaction",
    "compare_classifiers",
    "composition_report",
    "compute_frequencies",
    "correlate",
    "filter_egos",
    "load_lexicon",
    "mean_shift_1d",
    "negativity_full_vs_active",
    "negativity_metrics",
    "null_model_surprise",
    "parse_interactions",
    "score_text",
    "sign_relationship",
]
