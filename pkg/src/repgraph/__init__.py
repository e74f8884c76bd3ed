"""Offline social-graph reputation engine.

Builds user and tweet graphs from recorded dumps, computes node scores,
aggregates per-account features into active/passive/total reputation and
produces timeline forensics.
"""

from .config import ScoringConfig
from .features import AccountFeatures, BotTag, classify_bot, feature_correlations
from .graph import (
    DirectedGraph,
    NodeScore,
    PathResult,
    all_node_scores,
    betweenness,
    betweenness_centrality,
    closeness,
    degrees,
    diagonal,
    distance,
    pagerank,
)
from .reputation import (
    Neighborhood,
    ReputationTag,
    ReputationVector,
    active_reputation,
    classify_reputation,
    passive_reputation,
    score_population,
    total_reputation,
)

__version__ = "0.1.0"

__all__ = [
    "AccountFeatures", "BotTag", "DirectedGraph", "Neighborhood", "NodeScore", "PathResult",
    "ReputationTag", "ReputationVector", "ScoringConfig", "active_reputation", "all_node_scores",
    "betweenness", "betweenness_centrality", "classify_bot", "classify_reputation", "closeness",
    "degrees", "diagonal", "distance", "feature_correlations", "pagerank", "passive_reputation",
    "score_population", "total_reputation",
]
