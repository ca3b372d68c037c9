"""
Color models
============

Gaussian color models of superpixels, Gaussian mixture models of the foreground and
background classes and the Kullback-Leibler divergences between them.

Gaussians
---------

.. autosummary::
    :toctree: colormodel
    :nosignatures:

    GaussianModel
    fit_gaussian
    fit_gaussian_stack
    stack_gaussians
    unstack_gaussians

Mixtures
--------

.. autosummary::
    :toctree: colormodel
    :nosignatures:

    GmmModel
    fit_gmm

Divergences
-----------

Divergences of single Gaussians and vectorized versions for stacked Gaussians (``*_batch``).

.. autosummary::
    :toctree: colormodel

    kl_gaussian
    sym_kl_gaussian
    kl_gaussian_to_gmm
    kl_gaussian_batch
    sym_kl_gaussian_batch
    kl_gaussians_to_gmm
"""

# flake8: noqa

from .divergence import *
from .gaussian import *
from .gmm import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
