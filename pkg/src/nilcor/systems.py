"""Explicit, exactly iterable translation systems.

Two families:

* ``ComponentTorus``: [0,1)^m x Z/d with translation
  (x, j) -> (x + alpha mod 1, j + 1 mod d).  The d copies of the torus are
  the connected components; the translation cycles through them while
  rotating the fiber.

* ``HeisenbergNil``: the quotient of the continuous Heisenberg group
  (group law (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')) by its integer
  lattice, with points stored as fundamental-domain representatives in
  [0,1)^3.  Powers of the translating element have the closed form
  tau^n = (na, nb, nc + C(n,2)*a*b), so iteration is O(1) in n.

All coordinates are exact rationals; a coordinate is converted to a float
only at the moment a Fourier mode is evaluated.  Observables are finite
Fourier sums per connected component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import Rational, cis, cis_frac, frac, to_fraction

# sqrt(2) - 1 to 40 decimal digits, the default rotation number
SQRT2_MINUS_1 = "0.4142135623730950488016887242096980785697"


def _coords(values: Sequence[Rational]) -> tuple[Fraction, ...]:
    return tuple(frac(to_fraction(v)) for v in values)


# --------------------------------------------------------------------------
# systems
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentTorus:
    """m-torus times Z/d under (x, j) -> (x + alpha, j + 1)."""

    m: int
    d: int
    alpha: tuple[Fraction, ...]
    rationality_flags: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("torus dimension must be >= 1")
        if self.d < 1:
            raise ValueError("component count must be >= 1")
        if len(self.alpha) != self.m:
            raise ValueError("rotation vector length must equal m")
        if self.rationality_flags is not None and len(self.rationality_flags) != self.m:
            raise ValueError("one rationality flag per coordinate")
        object.__setattr__(self, "alpha", tuple(frac(a) for a in self.alpha))

    @classmethod
    def make(
        cls,
        alpha: Sequence[Rational] | Rational,
        d: int = 1,
        rationality_flags: Sequence[bool] | None = None,
    ) -> "ComponentTorus":
        if not isinstance(alpha, (list, tuple)):
            alpha = [alpha]
        coords = tuple(to_fraction(a) for a in alpha)
        flags = tuple(rationality_flags) if rationality_flags is not None else None
        return cls(m=len(coords), d=d, alpha=coords, rationality_flags=flags)

    def point(self, x: Sequence[Rational] | Rational, j: int = 0) -> "TorusPoint":
        if not isinstance(x, (list, tuple)):
            x = [x]
        if len(x) != self.m:
            raise ValueError(f"expected {self.m} coordinates, got {len(x)}")
        return TorusPoint(_coords(x), j % self.d)


@dataclass(frozen=True)
class TorusPoint:
    x: tuple[Fraction, ...]
    j: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(frac(c) for c in self.x))

    def floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.x)


@dataclass(frozen=True)
class HeisenbergNil:
    """Heisenberg nilmanifold with translating element tau = (a, b, c)."""

    tau: tuple[Fraction, Fraction, Fraction]

    def __post_init__(self) -> None:
        if len(self.tau) != 3:
            raise ValueError("tau must be a triple")
        object.__setattr__(self, "tau", tuple(to_fraction(t) for t in self.tau))

    @classmethod
    def make(cls, a: Rational, b: Rational, c: Rational = 0) -> "HeisenbergNil":
        return cls((to_fraction(a), to_fraction(b), to_fraction(c)))

    # the component structure is trivial (the manifold is connected)
    @property
    def m(self) -> int:
        return 3

    @property
    def d(self) -> int:
        return 1

    def point(
        self, x: Rational = 0, y: Rational = 0, z: Rational = 0
    ) -> "HeisenbergPoint":
        return HeisenbergPoint(heisenberg_reduce((x, y, z)))

    def identity(self) -> "HeisenbergPoint":
        return HeisenbergPoint((Fraction(0), Fraction(0), Fraction(0)))

    def power(self, n: int) -> tuple[Fraction, Fraction, Fraction]:
        """tau^n before reduction: (na, nb, nc + C(n,2) a b)."""
        a, b, c = self.tau
        return (n * a, n * b, n * c + Fraction(n * (n - 1), 2) * a * b)


@dataclass(frozen=True)
class HeisenbergPoint:
    xyz: tuple[Fraction, Fraction, Fraction]

    @property
    def x(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.xyz

    @property
    def j(self) -> int:
        return 0

    def floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.xyz)


System = ComponentTorus | HeisenbergNil
Point = TorusPoint | HeisenbergPoint


def heisenberg_mul(
    g: tuple[Fraction, Fraction, Fraction], h: tuple[Fraction, Fraction, Fraction]
) -> tuple[Fraction, Fraction, Fraction]:
    """(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')."""
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])


def heisenberg_reduce(
    g: tuple[Rational, Rational, Rational]
) -> tuple[Fraction, Fraction, Fraction]:
    """Fundamental-domain representative of the right coset g Gamma.

    Right-multiplying by an integer element (p, q, r) sends (x, y, z) to
    (x+p, y+q, z+r+x*q); reducing y first therefore shifts z by x*q, after
    which x and finally z are brought into [0, 1).
    """
    x, y, z = (to_fraction(c) for c in g)
    q = -(y.numerator // y.denominator)
    y = y + q
    z = z + x * q
    x = frac(x)
    z = frac(z)
    return (x, y, z)


def iterate(system: System, point: Point, n: int) -> Point:
    """tau^n applied to a point, via closed forms; O(1) in n."""
    if isinstance(system, ComponentTorus):
        if not isinstance(point, TorusPoint):
            raise TypeError("torus system needs a torus point")
        x = tuple(frac(c + n * a) for c, a in zip(point.x, system.alpha))
        return TorusPoint(x, (point.j + n) % system.d)
    if isinstance(system, HeisenbergNil):
        if not isinstance(point, HeisenbergPoint):
            raise TypeError("Heisenberg system needs a Heisenberg point")
        g = heisenberg_mul(system.power(n), point.xyz)
        return HeisenbergPoint(heisenberg_reduce(g))
    raise TypeError(f"unknown system {type(system).__name__}")


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrigObservable:
    """Finite Fourier sum per connected component.

    f(x, j) = sum over stored terms (j, k, c) of c * exp(2 pi i k.x); for
    the Heisenberg manifold the frequency vectors live in Z^3 and there is
    a single component.
    """

    m: int
    d: int
    terms: tuple[tuple[int, tuple[int, ...], complex], ...]

    def __post_init__(self) -> None:
        cleaned = []
        seen = {}
        for j, k, c in self.terms:
            k = tuple(int(v) for v in k)
            if len(k) != self.m:
                raise ValueError(f"frequency {k} has wrong dimension")
            if not 0 <= j < self.d:
                raise ValueError(f"component {j} out of range")
            key = (j, k)
            seen[key] = seen.get(key, 0) + complex(c)
        for (j, k), c in sorted(seen.items()):
            if c != 0:
                cleaned.append((j, k, c))
        object.__setattr__(self, "terms", tuple(cleaned))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_terms(
        cls, system: System, terms: Iterable[tuple[int, Sequence[int], complex]]
    ) -> "TrigObservable":
        return cls(system.m, system.d, tuple((j, tuple(k), c) for j, k, c in terms))

    @classmethod
    def constant(cls, system: System, value: complex = 1.0) -> "TrigObservable":
        zero = (0,) * system.m
        return cls(
            system.m, system.d, tuple((j, zero, value) for j in range(system.d))
        )

    @classmethod
    def character(
        cls, system: System, freq: Sequence[int], char: int = 0
    ) -> "TrigObservable":
        """f(x, j) = exp(2 pi i freq.x) * exp(2 pi i char j / d)."""
        k = tuple(int(v) for v in freq)
        return cls(
            system.m,
            system.d,
            tuple((j, k, cis_frac(Fraction(char * j, system.d))) for j in range(system.d)),
        )

    @classmethod
    def component_indicator(cls, system: System, component: int) -> "TrigObservable":
        if not 0 <= component < system.d:
            raise ValueError("component out of range")
        return cls(system.m, system.d, ((component, (0,) * system.m, 1.0),))

    # -- queries -------------------------------------------------------------

    def coeff(self, j: int, k: Sequence[int]) -> complex:
        k = tuple(int(v) for v in k)
        for jj, kk, c in self.terms:
            if jj == j and kk == k:
                return c
        return 0j

    @property
    def is_real(self) -> bool:
        """True iff coefficients are conjugate-symmetric (f real-valued)."""
        for j, k, c in self.terms:
            mirror = self.coeff(j, tuple(-v for v in k))
            if abs(mirror - c.conjugate()) > 1e-12 * max(1.0, abs(c)):
                return False
        return True

    @property
    def height(self) -> int:
        return max((max(map(abs, k), default=0) for _, k, _ in self.terms), default=0)

    def sup_bound(self) -> float:
        """Certified bound on sup |f| (coefficient absolute sum per component)."""
        per: dict[int, float] = {}
        for j, _, c in self.terms:
            per[j] = per.get(j, 0.0) + abs(c)
        return max(per.values(), default=0.0)

    def conjugate(self) -> "TrigObservable":
        return TrigObservable(
            self.m,
            self.d,
            tuple(
                (j, tuple(-v for v in k), c.conjugate()) for j, k, c in self.terms
            ),
        )


def evaluate(f: TrigObservable, point: Point) -> complex:
    """The finite Fourier sum at a point of the matching system."""
    coords = point.x if isinstance(point, TorusPoint) else point.xyz
    if len(coords) != f.m:
        raise ValueError(f"point has {len(coords)} coordinates, observable wants {f.m}")
    j = point.j
    if not 0 <= j < f.d:
        raise ValueError(f"component index {j} out of range for d={f.d}")
    total = 0j
    for jj, k, c in f.terms:
        if jj != j:
            continue
        phase = Fraction(0)
        for ki, xi in zip(k, coords):
            if ki:
                phase += ki * xi
        total += c * cis_frac(phase)
    return total


def haar_integral_component(system: System, f: TrigObservable, j: int) -> complex:
    """Integral of f over connected component j against its Haar measure.

    Haar measure on a component is normalized Lebesgue measure on the
    fiber, so the integral is the frequency-zero coefficient there.
    """
    if (f.m, f.d) != (system.m, system.d):
        raise ValueError("observable was built for a different system shape")
    if not 0 <= j < system.d:
        raise ValueError(f"component index {j} out of range")
    return complex(f.coeff(j, (0,) * f.m))


def orbit_phase_stream(alpha: Fraction, exponents: Iterable[int]) -> list[float]:
    """[frac(e * alpha) for e in exponents] by exact integer reduction."""
    p, q = alpha.numerator, alpha.denominator
    return [((e * p) % q) / q for e in exponents]


def rotation_weyl_closed_form(alpha: Fraction, n_terms: int) -> float:
    """|E_{n in [N]} exp(2 pi i n alpha)| for a circle rotation, exactly
    reduced: |sin(pi N alpha)| / (N |sin(pi alpha)|), with frac(N alpha)
    computed by integer arithmetic."""
    if frac(alpha) == 0:
        return 1.0
    top = math.sin(math.pi * float(Fraction((n_terms * alpha.numerator) % alpha.denominator, alpha.denominator)))
    bot = n_terms * math.sin(math.pi * float(frac(alpha)))
    return abs(top / bot)
