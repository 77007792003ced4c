"""Bounded-memory selection of diverse exemplars from feature streams.

The core loop keeps K exemplar slots and, for every incoming frame,
runs a competitive update whose cost trades distance to the nearest
slot against the growth in convex-hull volume the frame would buy.
Batch baselines, an evaluation harness, a binary/CSV feature format,
an HTTP service, and a CLI round out the package.
"""

from .batch import (
    BatchConfig,
    batch_kmedoids,
    batch_precis,
    random_sample,
    uniform_sample,
)
from .errors import DivstreamError
from .evaluation import (
    ClusterSpec,
    MatchReport,
    ReferenceSummary,
    choose_k,
    cluster_coverage,
    dedup,
    freeze_tail,
    match_score,
    synth_mixture,
)
from .features_io import read_features, write_features, write_features_csv
from .geometry import ProjectionBasis, divscore, divscore_swap, fit_projection, hull_volume, project
from .model import (
    ALL_ALGOS,
    ExemplarSet,
    FeatureVector,
    SamplerConfig,
    SummaryResult,
    UpdateOutcome,
)
from .sampler import OnlineDiverseSampler, OnlineKMedoidsSampler, make_sampler

__version__ = "0.1.0"

__all__ = [
    "ALL_ALGOS",
    "BatchConfig",
    "ClusterSpec",
    "DivstreamError",
    "ExemplarSet",
    "FeatureVector",
    "MatchReport",
    "OnlineDiverseSampler",
    "OnlineKMedoidsSampler",
    "ProjectionBasis",
    "ReferenceSummary",
    "SamplerConfig",
    "SummaryResult",
    "UpdateOutcome",
    "batch_kmedoids",
    "batch_precis",
    "choose_k",
    "cluster_coverage",
    "dedup",
    "divscore",
    "divscore_swap",
    "fit_projection",
    "freeze_tail",
    "hull_volume",
    "make_sampler",
    "match_score",
    "project",
    "random_sample",
    "read_features",
    "synth_mixture",
    "uniform_sample",
    "write_features",
    "write_features_csv",
    "__version__",
]
