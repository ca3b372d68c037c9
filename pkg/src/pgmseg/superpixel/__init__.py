"""
Superpixels
===========

Watershed over-segmentation of an image into superpixels and their spatial adjacency graph.
Randomness is confined to the watershed marker seeding and exposed as a single integer seed.

.. autosummary::
    :toctree: superpixel
    :nosignatures:

    Superpixel
    AdjacencyGraph

.. autosummary::
    :toctree: superpixel

    watershed_partition
    watershed_labels
    superpixels_from_labels
    gradient_magnitude
    superpixel_adjacency
    superpixel_label_map
    label_map_adjacency
    save_label_map
"""

# flake8: noqa

from .adjacency import *
from .datatypes import *
from .watershed import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
