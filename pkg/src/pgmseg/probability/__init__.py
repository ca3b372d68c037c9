"""
Assignment probabilities
========================

Unary and pairwise assignment probabilities of superpixels, estimation of the RBF bandwidths
and assembly of the assignment matrix for inference.

Bandwidths
----------

.. autosummary::
    :toctree: probability
    :nosignatures:

    Bandwidths
    median_bandwidth
    mean_bandwidth
    estimate_sigma_u_initial
    estimate_sigma_p

Unary probabilities
-------------------

.. autosummary::
    :toctree: probability
    :nosignatures:

    UnaryTable
    unary_probabilities
    unary_from_divergences
    unary_background_only
    unary_background_from_divergences

Pairwise probabilities
----------------------

.. autosummary::
    :toctree: probability
    :nosignatures:

    PairwiseEdges
    PairProbMatrix
    adjacency_divergences
    select_pairwise_neighbors
    cross_class_divergences
    pairwise_probabilities

Assignment matrix
-----------------

.. autosummary::
    :toctree: probability

    assemble_assignment_matrix
    dump_coordinates
"""

# flake8: noqa

from .bandwidth import *
from .matrix import *
from .pairwise import *
from .unary import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
