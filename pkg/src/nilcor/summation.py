"""Deterministic compensated reduction.

Averages in this package are defined as limits of Cesaro means, so the
numerics must not inject order-dependent rounding noise.  All reductions
go through ``math.fsum``, which forms the exact sum and rounds once;
the result is therefore independent of summation order and of any
partitioning of the index range.
"""

from __future__ import annotations

from math import fsum
from typing import Iterable

import numpy as np


def csum(values: Iterable[float]) -> float:
    """Exactly rounded sum of real values."""
    return fsum(values)


def csum_complex(values) -> complex:
    """Exactly rounded sum of complex values (real and imaginary parts
    summed independently)."""
    if isinstance(values, np.ndarray):
        return complex(fsum(values.real), fsum(values.imag))
    zs = list(values)
    return complex(fsum(z.real for z in zs), fsum(z.imag for z in zs))


def cmean(values: Iterable[float], count: int) -> float:
    return fsum(values) / count


def cmean_complex(values, count: int) -> complex:
    s = csum_complex(values)
    return complex(s.real / count, s.imag / count)
