"""Exact reductions among rank minimization, matrix completion and tensor rank."""

from __future__ import annotations

from . import reductions
from .algebra import Matrix, PureTensor, Tensor, rank
from .fields import GF, QQ, Field, PrimeField, RationalField
from .instances import (AffineMatrixFamily, Certificate, PartialMatrix, TRInstance, Unknown,
                        compose)

__version__ = "0.1.0"

__all__ = [
    "GF", "QQ", "Field", "PrimeField", "RationalField", "Matrix", "Tensor", "PureTensor",
    "rank", "AffineMatrixFamily", "PartialMatrix", "Unknown", "TRInstance", "Certificate",
    "compose", "reductions",
]
