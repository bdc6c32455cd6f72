"""Ensemble of clustered desparsified Lasso (ECDL)."""

from ._ecdl import (
    EcdlError,
    aggregate_pvalues,
    cdl,
    desparsified_lasso,
    ecdl,
    fit_lasso,
    jaccard,
    map_correlation,
    recall_at_precision,
    simulate_1d,
    simulate_3d,
    universal_lambda,
    ward_cluster,
)

__all__ = [
    "EcdlError",
    "aggregate_pvalues",
    "cdl",
    "desparsified_lasso",
    "ecdl",
    "fit_lasso",
    "jaccard",
    "map_correlation",
    "recall_at_precision",
    "simulate_1d",
    "simulate_3d",
    "universal_lambda",
    "ward_cluster",
]
