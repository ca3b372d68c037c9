"""
Evaluation
==========

Segmentation metrics, the dataset harness and synthetic test data.

Metrics
-------

.. autosummary::
    :toctree: evaluation

    bbox_error
    overlap_score
    MetricWarning

Dataset harness
---------------

A dataset is described by a manifest, one tab-separated line per image:
``image``, ``groundtruth``, ``kind`` (bbox, trimap or prior), ``init`` and an optional ``metric``.

.. autosummary::
    :toctree: evaluation
    :nosignatures:

    read_manifest
    write_manifest
    ManifestEntry
    EntryKind
    Metric
    run_dataset
    evaluate_entry
    load_entry
    summarize
    EvalRecord
    DatasetSummary
    write_records
    records_to_dataframe
    run_sweep

Synthetic data
--------------

.. autosummary::
    :toctree: evaluation
    :nosignatures:

    make_synthetic
    oracle_prior
    write_synthetic_dataset
    SyntheticImage
"""

# flake8: noqa

from ._dataframe import records_to_dataframe
from .dataset import *
from .manifest import *
from .metrics import *
from .synthetic import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
