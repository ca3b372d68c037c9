"""
Image core
==========

Image decoding, sRGB to CIELAB conversion, trimap ingestion and mask encoding.

Data types
----------

.. autosummary::
    :toctree: imagecore
    :nosignatures:

    LabImage
    TriMap
    TrimapLabel
    Provenance
    BoundingBox
    SegMask

Color
-----

.. autosummary::
    :toctree: imagecore

    read_image
    srgb_to_lab

Trimap
------

.. autosummary::
    :toctree: imagecore

    build_trimap
    read_trimap
    read_prior
    ring_mask

Masks
-----

Masks are stored as 8-bit grayscale PNG files (foreground = 255, background = 0).

.. autosummary::
    :toctree: imagecore

    encode_mask
    decode_mask
    read_mask
    write_mask
"""

# flake8: noqa

from .codec import *
from .color import *
from .datatypes import *
from .trimap import *

__all__ = [_ for _ in dir() if not _.startswith("_")]
