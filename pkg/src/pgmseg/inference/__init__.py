"""
Inference
=========

Marginal label probabilities from the assignment matrix and maximum likelihood labeling.

.. autosummary::
    :toctree: inference
    :nosignatures:

    MarginalTable

Spectral graph matching
-----------------------

Marginals from the leading eigenvector of the assignment matrix.
The power iteration is compiled with numba if available.

.. autosummary::
    :toctree: inference

    sgm_marginals
    power_iteration

Probabilistic graph matching
----------------------------

Spectral marginals with iterative reweighting of the pairwise probabilities.
Candidate labelings are improved by iterated conditional modes (compiled with numba if available).

.. autosummary::
    :toctree: inference

    pgm_marginals
    icm_labels
    conditional_marginals

Labeling
--------

.. autosummary::
    :toctree: inference

    ml_labels
    map_labels_exhaustive
    labeling_log_score
"""

# flake8: noqa

from .pgm import *
from .spectral import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
