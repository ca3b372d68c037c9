"""
Segmentation pipeline
=====================

End-to-end foreground/background segmentation: superpixels, initialization from the trimap,
iterative refinement of labels, color models and bandwidths, and majority voting over reruns.

Configuration
-------------

.. autosummary::
    :toctree: pipeline
    :nosignatures:

    SegConfig
    Mode
    Solver
    check_mode

Single run
----------

.. autosummary::
    :toctree: pipeline
    :nosignatures:

    run_segmentation
    SegmentationResult
    IterationRecord
    IterationState
    SegmentationWarning
    SuperpixelScene
    prepare_scene
    majority_trimap_state
    init_models
    refine_bandwidths

Ensemble
--------

.. autosummary::
    :toctree: pipeline
    :nosignatures:

    run_ensemble
    EnsembleResult
    majority_vote
"""

# flake8: noqa

from .config import *
from .ensemble import *
from .refinement import *
from .scene import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
