"""Measures on the circle with exact Fourier coefficients.

A ``SpectralMeasure`` is a finite list of atoms plus an optional
Riesz-product continuous part.  Its Fourier coefficients

    sigma_hat(n) = integral of exp(2 pi i n t) d sigma(t)

are evaluated in closed form: atoms contribute w * exp(2 pi i n theta),
and the Riesz product with base lambda and coefficient schedule (a_j)
contributes prod a_j / 2 over the nonzero digits of the {0, +-1} base
lambda expansion of n (coefficient zero when no such expansion exists).
The discrete/continuous split is exposed as a pair of coefficient
functions whose pointwise sum reproduces sigma_hat through the same
arithmetic path, hence exactly.

The time average of |sigma_hat(n)|^2 converges to the sum of squared atom
masses (Wiener); ``wiener_discrete_mass`` evaluates the average at a
finite horizon with compensated summation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import Rational, cis, frac_scaled, to_fraction
from .summation import csum
from .systems import TrigObservable

_MERGE_TOL = 1e-12
_CHUNK = 1 << 16


def balanced_digits(n: int, base: int = 3) -> list[int]:
    """Balanced base expansion: n = sum eps_j base**j with |eps_j| <= base/2.

    Requires an odd base >= 3 (even bases have no balanced digit set).
    The expansion is unique and reconstructs n exactly.
    """
    if base < 3:
        raise ValueError("base must be >= 3")
    if base % 2 == 0:
        raise ValueError("balanced digits need an odd base")
    half = base // 2
    digits: list[int] = []
    while n:
        r = n % base
        if r > half:
            r -= base
        digits.append(r)
        n = (n - r) // base
    return digits


@dataclass(frozen=True)
class RieszProductSpec:
    """Weak-star limit of the densities prod_j (1 + a_j cos(2 pi base^j t)).

    ``coeffs`` is a finite prefix of the schedule; ``tail`` continues it
    as a constant.  Requires |a_j| <= 1 (nonnegativity of the partial
    densities) and base >= 3 (distinctness of the product frequencies).
    The resulting measure is continuous with total mass 1.
    """

    base: int = 3
    coeffs: tuple[float, ...] = ()
    tail: float = 1.0

    def __post_init__(self) -> None:
        if self.base < 3:
            raise ValueError("base must be >= 3")
        coeffs = tuple(float(a) for a in self.coeffs)
        if any(abs(a) > 1 for a in coeffs) or abs(self.tail) > 1:
            raise ValueError("schedule values must lie in [-1, 1]")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "tail", float(self.tail))

    def schedule(self, j: int) -> float:
        return self.coeffs[j] if j < len(self.coeffs) else self.tail

    def coeff(self, n: int) -> float:
        """Fourier coefficient at n; depends on finitely many digits."""
        n = abs(n)
        out = 1.0
        j = 0
        while n:
            r = n % self.base
            if r == 0:
                eps = 0
            elif r == 1:
                eps = 1
            elif r == self.base - 1:
                eps = -1
            else:
                return 0.0  # no {0, +-1} expansion in this base
            if eps:
                out *= self.schedule(j) / 2.0
            n = (n - eps) // self.base
            j += 1
        return out

    def coeff_array(self, ns: np.ndarray) -> np.ndarray:
        """Vectorized ``coeff`` for an int64 array."""
        n = np.abs(ns.astype(np.int64, copy=True))
        out = np.ones(n.shape, dtype=np.float64)
        j = 0
        while np.any(n):
            r = n % self.base
            eps = np.zeros_like(n)
            eps[r == 1] = 1
            eps[r == self.base - 1] = -1
            bad = (r != 0) & (eps == 0)
            out[bad] = 0.0
            n[bad] = 0
            out[eps != 0] *= self.schedule(j) / 2.0
            n = (n - eps) // self.base
            j += 1
        return out


@dataclass(frozen=True)
class SpectralMeasure:
    """Atoms (theta_i, w_i) plus an optional scaled Riesz-product part.

    Atom locations are points of [0, 1) (exact rationals are kept exact);
    masses are positive; locations closer than 1e-12 on the circle are
    merged with summed mass.  The total mass is the atom mass plus the
    Riesz weight.
    """

    atoms: tuple[tuple[Fraction | float, float], ...] = ()
    riesz: RieszProductSpec | None = None
    riesz_weight: float = 0.0
    declared_total_mass: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.riesz is None and self.riesz_weight:
            raise ValueError("riesz_weight without a riesz part")
        if self.riesz is not None and self.riesz_weight < 0:
            raise ValueError("riesz_weight must be nonnegative")
        merged = _merge_atoms(self.atoms)
        object.__setattr__(self, "atoms", merged)
        total = sum(w for _, w in merged) + self.riesz_weight
        if self.declared_total_mass is None:
            object.__setattr__(self, "declared_total_mass", total)
        elif abs(self.declared_total_mass - total) > 1e-9:
            raise ValueError(
                f"declared mass {self.declared_total_mass} != computed {total}"
            )

    @classmethod
    def from_atoms(
        cls, atoms: Iterable[tuple[Rational, float]]
    ) -> "SpectralMeasure":
        return cls(atoms=tuple((_atom_location(t), float(w)) for t, w in atoms))

    @classmethod
    def riesz_product(
        cls, spec: RieszProductSpec | None = None, weight: float = 1.0
    ) -> "SpectralMeasure":
        return cls(riesz=spec or RieszProductSpec(), riesz_weight=weight)

    @classmethod
    def mixed(
        cls,
        atoms: Iterable[tuple[Rational, float]],
        riesz: RieszProductSpec,
        riesz_weight: float,
    ) -> "SpectralMeasure":
        return cls(
            atoms=tuple((_atom_location(t), float(w)) for t, w in atoms),
            riesz=riesz,
            riesz_weight=riesz_weight,
        )

    # -- coefficients --------------------------------------------------------

    def atomic_coeff(self, n: int) -> complex:
        total = 0j
        for theta, w in self.atoms:
            if isinstance(theta, Fraction):
                total += w * cis(frac_scaled(n, theta))
            elif abs(n) < (1 << 53):
                total += w * cis((n * theta) % 1.0)
            else:
                # n too large for float products: reduce exactly instead
                total += w * cis(frac_scaled(n, Fraction(theta)))
        return total

    def continuous_coeff(self, n: int) -> complex:
        if self.riesz is None:
            return 0j
        return complex(self.riesz_weight * self.riesz.coeff(n))

    def fourier_coeff(self, n: int) -> complex:
        # literally the sum of the two split components: the split identity
        # psi + eps = sigma_hat is an arithmetic identity, not a tolerance
        return self.atomic_coeff(n) + self.continuous_coeff(n)

    def coeff_array(self, ns: np.ndarray) -> np.ndarray:
        """Vectorized coefficients (atom locations rounded to float)."""
        out = np.zeros(len(ns), dtype=np.complex128)
        for theta, w in self.atoms:
            t = float(theta)
            out += w * np.exp(2j * np.pi * ((ns * t) % 1.0))
        if self.riesz is not None and self.riesz_weight:
            out += self.riesz_weight * self.riesz.coeff_array(ns)
        return out


def _atom_location(t: Rational) -> Fraction | float:
    if isinstance(t, float):
        return t % 1.0
    f = to_fraction(t)
    return f - (f.numerator // f.denominator)


def _circle_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def _merge_atoms(
    atoms: Iterable[tuple[Fraction | float, float]]
) -> tuple[tuple[Fraction | float, float], ...]:
    merged: list[list] = []
    for theta, w in atoms:
        if w <= 0:
            raise ValueError("atom masses must be positive")
        loc = _atom_location(theta)
        for slot in merged:
            if _circle_dist(float(slot[0]), float(loc)) <= _MERGE_TOL:
                slot[1] += w
                break
        else:
            merged.append([loc, float(w)])
    merged.sort(key=lambda s: float(s[0]))
    return tuple((t, w) for t, w in merged)


# --------------------------------------------------------------------------
# module operations
# --------------------------------------------------------------------------

def fourier_coeff(measure: SpectralMeasure, n: int) -> complex:
    """sigma_hat(n), closed form."""
    return measure.fourier_coeff(n)


def nil_null_split(
    measure: SpectralMeasure,
) -> tuple[Callable[[int], complex], Callable[[int], complex]]:
    """(discrete-part coefficients, continuous-part coefficients).

    The returned functions are the two addends of ``fourier_coeff``, so
    their sum reproduces it exactly.
    """
    return measure.atomic_coeff, measure.continuous_coeff


def herglotz_from_rotation(f: TrigObservable, alpha: Rational) -> SpectralMeasure:
    """Spectral measure of an observable on a circle rotation.

    For f = sum c_k exp(2 pi i k x) rotated by alpha, the single
    correlation a(n) = integral of f(x + n alpha) * conj(f(x)) dx equals
    sum |c_k|^2 exp(2 pi i n k alpha), i.e. the measure is purely atomic
    with an atom of mass |c_k|^2 at k*alpha mod 1.  Analytically
    coincident atom locations are merged.
    """
    if f.m != 1 or f.d != 1:
        raise ValueError("needs an observable on a 1-torus rotation (m=1, d=1)")
    a = to_fraction(alpha)
    atoms = []
    for _, k, c in f.terms:
        mass = abs(c) ** 2
        if mass:
            atoms.append((k[0] * a, mass))
    if not atoms:
        raise ValueError("zero observable has no spectral measure")
    return SpectralMeasure.from_atoms(atoms)


def wiener_discrete_mass(
    coeffs: SpectralMeasure | Callable[[int], complex], n_terms: int
) -> float:
    """E_{n in [N]} |sigma_hat(n)|^2 with compensated summation.

    As N grows this converges to the sum of squared atom masses; it
    converges to zero exactly when the measure is continuous.
    """
    if n_terms < 1:
        raise ValueError("horizon must be >= 1")

    def sq_values():
        if isinstance(coeffs, SpectralMeasure):
            for start in range(1, n_terms + 1, _CHUNK):
                ns = np.arange(start, min(start + _CHUNK, n_terms + 1), dtype=np.int64)
                z = coeffs.coeff_array(ns)
                yield from (z.real**2 + z.imag**2).tolist()
        else:
            for n in range(1, n_terms + 1):
                z = coeffs(n)
                yield z.real * z.real + z.imag * z.imag

    return csum(sq_values()) / n_terms


def coefficient_rows(
    measure: SpectralMeasure, ns: Sequence[int]
) -> list[tuple[int, float, float]]:
    """(n, re, im) rows for table export."""
    return [
        (n, measure.fourier_coeff(n).real, measure.fourier_coeff(n).imag) for n in ns
    ]
