"""Density diagnostics along index sequences.

``cesaro_abs`` tabulates E_{n <= N} |a(r_n)| over a horizon schedule and
attaches a verdict: decay to (near) zero is evidence that the sequence is
null along (r_n); a floor that persists with no decay is evidence that it
is not.  No finite computation decides the limit, so the verdict is a
pure function of the tabulated values and two published thresholds, and
the raw values always travel with it.

``weyl_sum`` and ``equidist_report`` quantify equidistribution of orbits
along a sequence: exponential sums against the torus characters, visit
frequencies of the connected components against the exact limiting
residue distribution of the sequence (when its arithmetic provides one),
and a histogram star-discrepancy per component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import median
from typing import Callable, Sequence

import numpy as np

from .exact import cis, frac_scaled
from .seq import SequenceSpec, generate
from .spectral import SpectralMeasure
from .summation import csum
from .systems import ComponentTorus, Point, System, TorusPoint

_INT64_SAFE = (1 << 62) - 1
_TREND_SLACK = 1e-12


@dataclass(frozen=True)
class CesaroTable:
    """Partial Cesaro means of |a(r_n)| over a horizon schedule."""

    schedule: tuple[int, ...]
    values: tuple[float, ...]
    verdict: str
    floor_threshold: float
    decay_factor: float


def _verdict(values: Sequence[float], floor: float, decay: float) -> str:
    first, last = values[0], values[-1]
    decayed = last <= decay * first or (first == 0.0 and last == 0.0)
    if last <= floor and decayed:
        return "null-consistent"
    if min(values) >= floor:
        ratios = [
            b / a for a, b in zip(values, values[1:]) if a > 0
        ] or [1.0]
        if median(ratios) >= 1.0 - _TREND_SLACK:
            return "not-null"
    return "inconclusive"


def cesaro_abs(
    a: SpectralMeasure | Callable[[int], complex],
    r: SequenceSpec,
    schedule: Sequence[int],
    floor_threshold: float = 0.05,
    decay_factor: float = 0.5,
) -> CesaroTable:
    """E_{n <= N} |a(r_n)| for each N in an increasing schedule.

    ``a`` is a coefficient function or a spectral measure (whose Fourier
    coefficients are then the sequence).  Sums are exactly rounded.
    """
    schedule = tuple(int(n) for n in schedule)
    if not schedule or any(n < 1 for n in schedule):
        raise ValueError("schedule must be positive")
    if any(b <= a_ for a_, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    terms = generate(r, schedule[-1])
    mags = _abs_values(a, terms)
    values = tuple(csum(mags[:n]) / n for n in schedule)
    return CesaroTable(
        schedule=schedule,
        values=values,
        verdict=_verdict(values, floor_threshold, decay_factor),
        floor_threshold=floor_threshold,
        decay_factor=decay_factor,
    )


def _abs_values(a, terms: list[int]) -> list[float]:
    if isinstance(a, SpectralMeasure):
        if all(abs(t) <= _INT64_SAFE for t in terms):
            return np.abs(a.coeff_array(np.array(terms, dtype=np.int64))).tolist()
        return [abs(a.fourier_coeff(t)) for t in terms]
    return [abs(complex(a(t))) for t in terms]


def weyl_sum(
    system: ComponentTorus,
    x: TorusPoint,
    r: SequenceSpec,
    freq: Sequence[int],
    n_terms: int,
    char_index: int = 0,
) -> float:
    """|E_{n <= N} e(freq . x_{r_n}) chi(j_{r_n})| along the orbit of x.

    chi is the character j -> e(char_index * j / d).  The zero frequency
    with the trivial character is rejected (its sum is identically 1).
    Small values support equidistribution against that character.
    """
    if not isinstance(system, ComponentTorus):
        raise TypeError("Weyl sums are computed on component torus systems")
    freq = tuple(int(k) for k in freq)
    if len(freq) != system.m:
        raise ValueError(f"frequency must have {system.m} coordinates")
    if all(k == 0 for k in freq) and char_index % system.d == 0:
        raise ValueError("zero frequency and trivial character: the constant mode")
    if n_terms < 1:
        raise ValueError("need at least one term")
    terms = generate(r, n_terms)

    kalpha = Fraction(0)
    base = Fraction(0)
    for k, a, xi in zip(freq, system.alpha, x.x):
        if k:
            kalpha += k * a
            base += k * xi
    d = system.d
    re: list[float] = []
    im: list[float] = []
    two_pi = 2.0 * math.pi
    p, q = kalpha.numerator, kalpha.denominator
    base_f = float(base - (base.numerator // base.denominator))
    for t in terms:
        ph = two_pi * (base_f + ((t * p) % q) / q + (char_index * ((x.j + t) % d)) / d)
        re.append(math.cos(ph))
        im.append(math.sin(ph))
    return abs(complex(csum(re), csum(im))) / n_terms


def star_discrepancy_histogram(
    coords: np.ndarray, bins: int, max_cells: int = 1 << 20
) -> float:
    """Histogram approximation of the star discrepancy of points in [0,1)^m.

    The empirical measure of every anchored box with grid-aligned corner
    is compared with its volume; the bin width adds at most m/bins to the
    true value.  The grid is coarsened so the cell count stays bounded.
    """
    pts = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    n, m = pts.shape
    if m > 3:
        raise ValueError("star discrepancy supported up to dimension 3")
    b = min(bins, int(max_cells ** (1.0 / m)))
    idx = np.minimum((pts * b).astype(np.int64), b - 1)
    hist = np.zeros((b,) * m, dtype=np.float64)
    np.add.at(hist, tuple(idx.T), 1.0)
    hist /= n
    cdf = hist
    for axis in range(m):
        cdf = np.cumsum(cdf, axis=axis)
    grids = np.meshgrid(*[(np.arange(1, b + 1)) / b] * m, indexing="ij")
    volume = np.ones_like(cdf)
    for g in grids:
        volume = volume * g
    return float(np.max(np.abs(cdf - volume)))


@dataclass(frozen=True)
class EquidistReport:
    """Orbit equidistribution diagnostics along a sequence."""

    n_terms: int
    component_counts: tuple[int, ...]
    component_freqs: tuple[float, ...]
    predicted_freqs: tuple[float, ...] | None
    weyl: dict[int, dict[tuple[int, ...], float]]  # component -> freq -> |sum|
    star_discrepancy: dict[int, float]
    hist_counts: dict[int, tuple[tuple[int, ...], ...]]  # component -> per-coord bins
    bins: int
    max_freq: int


def _canonical_freqs(m: int, max_freq: int) -> list[tuple[int, ...]]:
    # nonzero frequency vectors up to sign (|sum| is sign-symmetric)
    out = []
    ranges = [range(-max_freq, max_freq + 1)] * m
    import itertools

    for k in itertools.product(*ranges):
        if all(v == 0 for v in k):
            continue
        first = next(v for v in k if v != 0)
        if first > 0:
            out.append(k)
    return out


def equidist_report(
    system: ComponentTorus,
    x: TorusPoint,
    r: SequenceSpec,
    max_freq: int,
    bins: int,
    n_terms: int,
) -> EquidistReport:
    """Where the orbit along (r_n) lands and how evenly.

    Reports exact component visit counts against the limiting prediction
    implied by the sequence's residue distribution mod d (when available),
    Weyl sums of all heights up to max_freq conditioned on each visited
    component, and a histogram star discrepancy of the fiber coordinates
    per component.
    """
    if not isinstance(system, ComponentTorus):
        raise TypeError("equidistribution reports run on component torus systems")
    if n_terms < bins:
        raise ValueError("need at least as many terms as bins")
    terms = generate(r, n_terms)
    d, m = system.d, system.m

    comp_arr = np.empty(n_terms, dtype=np.int64)
    coord_arr = np.empty((n_terms, m), dtype=np.float64)
    alphas = [(a.numerator, a.denominator) for a in system.alpha]
    x0 = [float(c) for c in x.x]
    j0 = x.j
    for i, t in enumerate(terms):
        comp_arr[i] = (j0 + t) % d
        for c in range(m):
            p, q = alphas[c]
            coord_arr[i, c] = (x0[c] + ((t * p) % q) / q) % 1.0

    counts = np.bincount(comp_arr, minlength=d).tolist()
    freqs = tuple(c / n_terms for c in counts)
    dist = r.residue_distribution(d)
    predicted = None
    if dist is not None:
        predicted = [0.0] * d
        for res, weight in enumerate(dist):
            predicted[(x.j + res) % d] += weight
        predicted = tuple(predicted)

    weyl: dict[int, dict[tuple[int, ...], float]] = {}
    star: dict[int, float] = {}
    hists: dict[int, tuple[tuple[int, ...], ...]] = {}
    kvecs = _canonical_freqs(m, max_freq)
    for comp in range(d):
        if not counts[comp]:
            continue
        pts = coord_arr[comp_arr == comp]
        table = {}
        for k in kvecs:
            phase = pts @ np.array(k, dtype=np.float64)
            z = np.exp(2j * np.pi * phase)
            table[k] = abs(complex(csum(z.real), csum(z.imag))) / counts[comp]
        weyl[comp] = table
        star[comp] = star_discrepancy_histogram(pts, bins)
        hists[comp] = tuple(
            tuple(
                np.histogram(pts[:, c], bins=bins, range=(0.0, 1.0))[0].tolist()
            )
            for c in range(m)
        )

    return EquidistReport(
        n_terms=n_terms,
        component_counts=tuple(counts),
        component_freqs=freqs,
        predicted_freqs=predicted,
        weyl=weyl,
        star_discrepancy=star,
        hist_counts=hists,
        bins=bins,
        max_freq=max_freq,
    )
