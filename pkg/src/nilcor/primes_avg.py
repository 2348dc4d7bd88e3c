"""Prime-indexed averages and their limit formulas.

Contents:

* the prime-restricted log weight lambda_mod(M, r, n) =
  (phi(M)/M) * log(Mn + r) when Mn + r is prime, zero otherwise;
* ``compare_weighted_natural``: the plain average of a(q) over
  {q <= N : qd + r prime} against the weighted average
  E_{n in [N]} lambda_mod(d, r, n) a(n), whose difference tends to zero;
* ``prime_orbit_average`` and ``corollary_rhs``: the two sides of the
  limit formula for E_{n in [N]} f(tau^{Q(p_n)} x) on a system with d
  connected components, the right side being the average of the component
  integrals over X_{Q(s)+k} for s coprime to d (for d = 1 the single
  integral over the whole space);
* ``recurrence_density``: the fraction of prime indices n for which the
  triple (or quadruple) intersection A and its shifts by multiples of
  (p_n - 1) alpha keeps measure above |A|^level - delta, with the
  intersection measure computed exactly as circular arc intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import Rational, cis, frac_scaled, to_fraction
from .seq import (
    IntegerPolynomial,
    euler_phi,
    eval_polynomial,
    is_prime,
    prime_mask,
    primes_first,
)
from .summation import cmean_complex, csum, csum_complex
from .systems import (
    ComponentTorus,
    HeisenbergNil,
    Point,
    System,
    TrigObservable,
    evaluate,
    haar_integral_component,
    iterate,
)


def lambda_mod(modulus: int, residue: int, n: int) -> float:
    """(phi(M)/M) * log(Mn + r) when Mn + r is prime, else 0."""
    if not 0 <= residue < modulus:
        raise ValueError("need 0 <= residue < modulus")
    if n < 1:
        raise ValueError("n must be >= 1")
    v = modulus * n + residue
    if not is_prime(v):
        return 0.0
    return euler_phi(modulus) / modulus * math.log(v)


@dataclass(frozen=True)
class WeightedAverageReport:
    natural_avg: complex
    weighted_avg: complex
    difference: float
    horizon: int
    prime_count: int
    strata: dict[int, "WeightedAverageReport"] | None = None


def compare_weighted_natural(
    a,
    modulus: int,
    residue: int,
    horizon: int,
    omega: int | None = None,
) -> WeightedAverageReport:
    """Natural vs log-weighted prime-indexed averages of a bounded sequence.

    natural = mean of a(q) over q in {1..N : qd + r prime};
    weighted = E_{n in [N]} lambda_mod(d, r, n) a(n).

    ``omega`` optionally stratifies both averages by the residue class of
    q mod W, W the product of primes below omega; the per-class reports
    are attached without any claim about their rate.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if math.gcd(residue, modulus) != 1 and not (modulus == 1 and residue == 0):
        raise ValueError("need gcd(residue, modulus) = 1")
    mask = prime_mask(modulus * horizon + residue)
    qs = [q for q in range(1, horizon + 1) if mask[modulus * q + residue]]
    if not qs:
        raise ValueError(f"no q <= {horizon} with {modulus} q + {residue} prime")
    report = _weighted_report(a, qs, modulus, residue, horizon)
    if omega is not None:
        w = 1
        for p in primes_first(max(omega, 1)):
            if p >= omega:
                break
            w *= p
        strata = {}
        for b in range(w):
            qb = [q for q in qs if q % w == b]
            if qb:
                strata[b] = _weighted_report(a, qb, modulus, residue, horizon)
        report = WeightedAverageReport(
            natural_avg=report.natural_avg,
            weighted_avg=report.weighted_avg,
            difference=report.difference,
            horizon=horizon,
            prime_count=report.prime_count,
            strata=strata,
        )
    return report


def _weighted_report(a, qs, modulus, residue, horizon) -> WeightedAverageReport:
    phi_ratio = euler_phi(modulus) / modulus
    values = [complex(a(q)) for q in qs]
    natural = cmean_complex(values, len(values))
    weighted_terms = [
        phi_ratio * math.log(modulus * q + residue) * v for q, v in zip(qs, values)
    ]
    weighted = csum_complex(weighted_terms)
    weighted = complex(weighted.real / horizon, weighted.imag / horizon)
    return WeightedAverageReport(
        natural_avg=natural,
        weighted_avg=weighted,
        difference=abs(natural - weighted),
        horizon=horizon,
        prime_count=len(qs),
    )


def prime_orbit_average(
    system: System,
    f: TrigObservable,
    poly: IntegerPolynomial,
    x: Point,
    n_primes: int,
    exclude_primes_dividing_d: bool = False,
) -> complex:
    """E over the first N primes of f(tau^{Q(p)} x).

    The finitely many primes dividing the component count are included by
    default (they are a vanishing fraction); the flag drops them instead
    of silently filtering.
    """
    if poly.is_constant:
        raise ValueError("exponent polynomial must be non-constant")
    if n_primes < 1:
        raise ValueError("need at least one prime")
    primes = primes_first(n_primes)
    if exclude_primes_dividing_d:
        primes = [p for p in primes if system.d % p != 0]
    exponents = [eval_polynomial(poly, p) for p in primes]
    return orbit_average(system, f, x, exponents)


def orbit_average(
    system: System, f: TrigObservable, x: Point, exponents: list[int]
) -> complex:
    """E over a list of exponents of f(tau^e x), exact phase reduction."""
    if isinstance(system, ComponentTorus):
        d = system.d
        # precompute, per Fourier term, the combined rotation number k.alpha
        # and the fixed phase k.x0
        terms = []
        for jc, k, c in f.terms:
            kalpha = Fraction(0)
            base = Fraction(0)
            for ki, ai, xi in zip(k, system.alpha, x.x):
                if ki:
                    kalpha += ki * ai
                    base += ki * xi
            terms.append((jc, c * cis(frac_scaled(1, base)), kalpha))
        values = []
        for e in exponents:
            comp = (x.j + e) % d
            z = 0j
            for jc, cbase, kalpha in terms:
                if jc != comp:
                    continue
                z += cbase * cis(frac_scaled(e, kalpha))
            values.append(z)
        return cmean_complex(values, len(values))
    values = [evaluate(f, iterate(system, x, e)) for e in exponents]
    return cmean_complex(values, len(values))


def corollary_rhs(
    system: System, f: TrigObservable, poly: IntegerPolynomial, k: int
) -> complex:
    """Limit of the prime orbit average started in component k.

    The average over s < d coprime to d of the component integral over
    X_{(Q(s)+k) mod d}; for a connected system (d = 1) this is the single
    integral over the whole space.
    """
    d = system.d
    if d == 1:
        return haar_integral_component(system, f, 0)
    residues = [s for s in range(1, d) if math.gcd(s, d) == 1]
    total = 0j
    for s in residues:
        comp = (eval_polynomial(poly, s) + k) % d
        total += haar_integral_component(system, f, comp)
    return total / len(residues)


# --------------------------------------------------------------------------
# recurrence along p - 1
# --------------------------------------------------------------------------

def _intersect_arc(
    pieces: list[tuple[float, float]], start: float, length: float
) -> list[tuple[float, float]]:
    # intersect a disjoint union of [a, b) in [0, 1) with the arc
    # [start, start + length) taken mod 1
    arcs = [(start, min(1.0, start + length))]
    if start + length > 1.0:
        arcs.append((0.0, start + length - 1.0))
    out = []
    for a0, b0 in pieces:
        for a1, b1 in arcs:
            lo, hi = max(a0, a1), min(b0, b1)
            if hi > lo:
                out.append((lo, hi))
    return out


def intersection_measure(length: float, t: float, level: int) -> float:
    """Measure of the intersection of level arcs of the given length whose
    left endpoints step backwards by t around the circle.

    This is mu(A and A-t and ... and A-(level-1)t) for any arc A of that
    length: the start point drops out by translation invariance.
    """
    if not 0 < length <= 1:
        raise ValueError("arc length must lie in (0, 1]")
    pieces = [(0.0, length)]
    for i in range(1, level):
        pieces = _intersect_arc(pieces, (-i * t) % 1.0, length)
        if not pieces:
            return 0.0
    return sum(b - a for a, b in pieces)


def recurrence_density(
    alpha: Rational,
    interval: tuple[Rational, Rational],
    level: int,
    delta: float,
    n_primes: int,
) -> float:
    """Fraction of n <= N with the level-fold self-intersection of the arc
    under rotation by (p_n - 1) alpha of measure at least |A|^level - delta.
    """
    if level not in (3, 4):
        raise ValueError("level must be 3 or 4")
    if delta <= 0:
        raise ValueError("delta must be positive")
    _, length = interval
    length = float(to_fraction(length))
    if not 0 < length < 1:
        raise ValueError("need an arc with 0 < |A| < 1")
    a = to_fraction(alpha)
    threshold = length**level - delta
    hits = 0
    for p in primes_first(n_primes):
        t = frac_scaled(p - 1, a)
        if intersection_measure(length, t, level) >= threshold:
            hits += 1
    return hits / n_primes


def recurrence_density_grid(
    interval: tuple[Rational, Rational],
    level: int,
    delta: float,
    grid_size: int = 10**4,
) -> float:
    """Lebesgue measure (grid approximation) of the rotation parameters t
    whose intersection measure clears the same threshold; the limit of the
    empirical density when (p_n - 1) alpha equidistributes."""
    _, length = interval
    length = float(to_fraction(length))
    threshold = length**level - delta
    hits = sum(
        1
        for g in range(grid_size)
        if intersection_measure(length, g / grid_size, level) >= threshold
    )
    return hits / grid_size
