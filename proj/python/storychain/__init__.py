"""Story chain detection over timestamped news articles."""

from ._storychain import (
    Article,
    Collection,
    Config,
    ConfigError,
    DataError,
    IoError,
    PairScore,
    codelength,
    hierarchical_cluster,
    run_all,
    run_cluster,
    run_eval,
    run_ingest,
    run_stats,
    tokenize,
    visit_rates,
)

__all__ = [
    "Article",
    "Collection",
    "Config",
    "ConfigError",
    "DataError",
    "IoError",
    "PairScore",
    "codelength",
    "hierarchical_cluster",
    "run_all",
    "run_cluster",
    "run_eval",
    "run_ingest",
    "run_stats",
    "tokenize",
    "visit_rates",
]
