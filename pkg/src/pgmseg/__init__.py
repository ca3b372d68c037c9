"""Top-level module of pgmseg."""

# flake8: noqa

from . import colormodel, evaluation, imagecore, inference, pipeline, probability, superpixel
