"""Integer index sequences.

Provides the sequences along which Cesaro averages are taken: the
integers, integer-valued polynomials, primes, polynomials of primes,
primes in arithmetic progressions, floors of fractional powers, geometric
sequences, and factorials.  All generation is exact integer arithmetic;
floors of n**c are certified (interval arithmetic with escalating
precision, never a guess).

Integer-valued polynomials are stored in the binomial-coefficient basis
Q(n) = sum_i c_i * C(n, i) with integer c_i, which makes integrality on
all integers structural instead of a per-call check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .exact import Rational, to_fraction


class AmbiguousFloorError(ArithmeticError):
    """floor(n**c) could not be certified at maximum working precision."""


# --------------------------------------------------------------------------
# binomial-basis integer polynomials
# --------------------------------------------------------------------------

def binomial(n: int, k: int) -> int:
    """C(n, k) for any integer n (negative allowed) and k >= 0.

    Uses the falling factorial n(n-1)...(n-k+1)/k!, which is an exact
    integer for every integer n.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    num = 1
    for i in range(k):
        num *= n - i
    return num // math.factorial(k)


def _stirling2_table(kmax: int) -> list[list[int]]:
    # S(k, i) for 0 <= i <= k <= kmax
    table = [[1]]
    for k in range(1, kmax + 1):
        row = [0] * (k + 1)
        for i in range(1, k + 1):
            prev = table[k - 1]
            row[i] = (prev[i] * i if i < k else 0) + prev[i - 1]
        table.append(row)
    return table


@dataclass(frozen=True)
class IntegerPolynomial:
    """Polynomial taking integer values on all integers.

    ``coeffs[i]`` multiplies C(n, i); the zero polynomial is ``(0,)``.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("need at least one coefficient")
        if not all(isinstance(c, int) for c in self.coeffs):
            raise TypeError("binomial-basis coefficients must be integers")
        trimmed = self.coeffs
        while len(trimmed) > 1 and trimmed[-1] == 0:
            trimmed = trimmed[:-1]
        object.__setattr__(self, "coeffs", trimmed)

    @classmethod
    def from_binomial(cls, coeffs: Sequence[int]) -> "IntegerPolynomial":
        return cls(tuple(int(c) for c in coeffs))

    @classmethod
    def from_monomial(cls, coeffs: Sequence[Rational]) -> "IntegerPolynomial":
        """Build from monomial coefficients a_0 + a_1 n + ... + a_D n^D.

        Rational coefficients are accepted; polynomials that are not
        integer-valued on the integers are rejected.
        """
        mono = [to_fraction(a) for a in coeffs] or [Fraction(0)]
        deg = len(mono) - 1
        s2 = _stirling2_table(deg)
        out: list[Fraction] = [Fraction(0)] * (deg + 1)
        # n^k = sum_i S(k, i) * i! * C(n, i)
        for k, a in enumerate(mono):
            if a == 0:
                continue
            for i in range(k + 1):
                out[i] += a * s2[k][i] * math.factorial(i)
        for i, c in enumerate(out):
            if c.denominator != 1:
                raise ValueError(
                    f"not integer-valued: binomial coefficient {i} would be {c}"
                )
        return cls(tuple(int(c) for c in out))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def __call__(self, n: int) -> int:
        return eval_polynomial(self, n)

    def to_monomial(self) -> tuple[Fraction, ...]:
        """Exact monomial coefficients, lowest degree first."""
        deg = self.degree
        out = [Fraction(0)] * (deg + 1)
        # C(n, i) = sum over signed Stirling numbers of the first kind / i!
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            # expand n(n-1)...(n-i+1) iteratively
            poly = [Fraction(1)]
            for j in range(i):
                poly = [Fraction(0)] + poly
                for t in range(len(poly) - 1):
                    poly[t] -= j * poly[t + 1]
            fact = math.factorial(i)
            for t, a in enumerate(poly):
                out[t] += Fraction(c, fact) * a
        return tuple(out)

    def compose_affine(self, stride: int, offset: int) -> "IntegerPolynomial":
        """The polynomial m -> Q(stride * m + offset)."""
        mono = self.to_monomial()
        deg = len(mono) - 1
        out = [Fraction(0)] * (deg + 1)
        for k, a in enumerate(mono):
            if a == 0:
                continue
            # (stride*m + offset)^k
            for i in range(k + 1):
                out[i] += a * math.comb(k, i) * stride**i * offset ** (k - i)
        return IntegerPolynomial.from_monomial(out)

    def describe(self) -> str:
        return "Q[binomial " + ",".join(str(c) for c in self.coeffs) + "]"


def eval_polynomial(poly: IntegerPolynomial, n: int) -> int:
    """Evaluate at an integer (negative allowed), exactly."""
    total = 0
    term = 1  # C(n, i), updated incrementally
    for i, c in enumerate(poly.coeffs):
        if i > 0:
            term = term * (n - i + 1) // i
        total += c * term
    return total


# --------------------------------------------------------------------------
# primes
# --------------------------------------------------------------------------

_SEGMENT = 1 << 20


def _base_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, increasing, as int64.

    Segmented: memory is O(sqrt(limit) + segment size).  limit < 2 gives
    an empty array.
    """
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    root = math.isqrt(limit)
    base = _base_sieve(max(root, 2))
    if limit <= max(root, 2):
        return base[base <= limit]
    chunks = [base]
    lo = int(max(root, 2)) + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT - 1, limit)
        mask = np.ones(hi - lo + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            mask[start - lo :: p] = False
        chunks.append((np.flatnonzero(mask) + lo).astype(np.int64))
        lo = hi + 1
    return np.concatenate(chunks)


@lru_cache(maxsize=4)
def _cached_primes(limit: int) -> np.ndarray:
    arr = sieve_primes(limit)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=2)
def prime_mask(limit: int) -> np.ndarray:
    """Boolean lookup table: mask[v] is True iff v is prime, 0 <= v <= limit."""
    mask = np.zeros(limit + 1, dtype=bool)
    mask[sieve_primes(limit)] = True
    mask.setflags(write=False)
    return mask


def _nth_prime_bound(n: int) -> int:
    if n < 6:
        return 13
    x = n * (math.log(n) + math.log(math.log(n)))
    return int(x) + 10


def primes_first(count: int) -> list[int]:
    """The first ``count`` primes."""
    if count < 1:
        return []
    limit = _nth_prime_bound(count)
    while True:
        arr = _cached_primes(limit)
        if len(arr) >= count:
            return [int(p) for p in arr[:count]]
        limit *= 2


def primes_in_ap(modulus: int, residue: int, count: int) -> list[int]:
    """First ``count`` primes congruent to ``residue`` mod ``modulus``.

    Requires gcd(residue, modulus) = 1 (or residue 0 with modulus 1, i.e.
    all primes).  Otherwise the class contains at most the primes dividing
    gcd(residue, modulus), which are named in the rejection.
    """
    if modulus < 1:
        raise ValueError("modulus must be positive")
    residue %= modulus
    g = math.gcd(residue, modulus)
    if not (g == 1 or (modulus == 1 and residue == 0)):
        exceptional = [
            p for p in sorted(set(_prime_factors(g))) if p % modulus == residue
        ]
        raise ValueError(
            f"gcd({residue}, {modulus}) = {g} != 1: the class contains only the "
            f"finitely many primes {exceptional or '[]'} and has no density"
        )
    if count < 1:
        return []
    # roughly one in phi(modulus) primes lands in the class
    guess = max(count * euler_phi(modulus), 6)
    limit = _nth_prime_bound(int(guess * 1.3))
    while True:
        arr = _cached_primes(limit)
        hits = arr[arr % modulus == residue]
        if len(hits) >= count:
            return [int(p) for p in hits[:count]]
        limit *= 2


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality for n < 3.3e24 (fixed Miller-Rabin bases)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("phi needs a positive argument")
    result = n
    for p in sorted(set(_prime_factors(n))):
        result = result // p * (p - 1)
    return result


# --------------------------------------------------------------------------
# certified floors of n**c
# --------------------------------------------------------------------------

_EXACT_BITS_CAP = 1 << 21
_MAX_PRECISION = 1 << 13


def _floor_nth_root(x: int, b: int) -> int:
    """floor(x ** (1/b)) for x >= 0, exact."""
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return 0
    if b == 1:
        return x
    if b == 2:
        return math.isqrt(x)
    r = 1 << (x.bit_length() // b + 1)
    while True:
        nr = ((b - 1) * r + x // r ** (b - 1)) // b
        if nr >= r:
            break
        r = nr
    while r**b > x:
        r -= 1
    while (r + 1) ** b <= x:
        r += 1
    return r


def _exact_floor_positive(raw) -> int:
    """Exact floor of a positive finite raw mpf tuple (no re-rounding)."""
    sign, man, exp, _ = raw
    if man == 0:
        if exp == 0:
            return 0
        raise AmbiguousFloorError("non-finite interval endpoint")
    if sign:
        raise AmbiguousFloorError("negative endpoint for a positive power")
    return man << exp if exp >= 0 else man >> (-exp)


def hardy_floor(c: Rational, n: int) -> int:
    """floor(n**c), certified.

    When c = a/b with n**a of manageable size the floor is the exact
    integer b-th root of n**a.  Otherwise the value is bracketed by
    interval arithmetic at escalating precision until the bracket
    contains no integer; an unresolvable bracket raises
    AmbiguousFloorError instead of guessing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cf = to_fraction(c)
    if cf <= 0:
        raise ValueError("exponent must be positive")
    a, b = cf.numerator, cf.denominator
    if a * max(n.bit_length(), 1) <= _EXACT_BITS_CAP:
        return _floor_nth_root(n**a, b)

    import mpmath

    iv = mpmath.iv
    prec = 128
    while prec <= _MAX_PRECISION:
        old = iv.prec
        iv.prec = prec
        try:
            expo = iv.mpf(cf.numerator) / iv.mpf(cf.denominator)
            val = iv.exp(expo * iv.log(iv.mpf(n)))
            raw_lo, raw_hi = val._mpi_
            lo = _exact_floor_positive(raw_lo)
            hi = _exact_floor_positive(raw_hi)
        finally:
            iv.prec = old
        if lo == hi:
            return lo
        prec *= 2
    raise AmbiguousFloorError(
        f"floor({n}**{cf}) straddles an integer at {_MAX_PRECISION} bits"
    )


def hardy_regime(c: Rational) -> str:
    """'polynomial' when the exponent is a positive integer, else 'hardy'."""
    cf = to_fraction(c)
    return "polynomial" if cf.denominator == 1 else "hardy"


# --------------------------------------------------------------------------
# sequence specs
# --------------------------------------------------------------------------

_KINDS = (
    "identity",
    "polynomial",
    "primes",
    "polynomial_of_primes",
    "primes_in_ap",
    "hardy_floor",
    "geometric",
    "factorial",
    "explicit",
)


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of an index sequence r_1, r_2, ...

    ``offset``/``stride`` reindex the base sequence: term m is the base
    sequence at index offset + stride*m (m >= 1), e.g. stride 3 on the
    squares yields (3m)^2.
    """

    kind: str
    poly: IntegerPolynomial | None = None
    modulus: int | None = None
    residue: int | None = None
    base: int | None = None
    exponent: Fraction | None = None
    terms: tuple[int, ...] | None = None
    offset: int = 0
    stride: int = 1

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.offset < 0 or self.stride < 1:
            raise ValueError("need offset >= 0 and stride >= 1")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, offset: int = 0, stride: int = 1) -> "SequenceSpec":
        return cls("identity", offset=offset, stride=stride)

    @classmethod
    def polynomial(
        cls, poly: IntegerPolynomial, offset: int = 0, stride: int = 1
    ) -> "SequenceSpec":
        if poly.is_constant:
            raise ValueError("polynomial sequences must be non-constant")
        return cls("polynomial", poly=poly, offset=offset, stride=stride)

    @classmethod
    def primes(cls, offset: int = 0, stride: int = 1) -> "SequenceSpec":
        return cls("primes", offset=offset, stride=stride)

    @classmethod
    def polynomial_of_primes(
        cls, poly: IntegerPolynomial, offset: int = 0, stride: int = 1
    ) -> "SequenceSpec":
        if poly.is_constant:
            raise ValueError("polynomial sequences must be non-constant")
        return cls("polynomial_of_primes", poly=poly, offset=offset, stride=stride)

    @classmethod
    def primes_in_ap(
        cls, modulus: int, residue: int, offset: int = 0, stride: int = 1
    ) -> "SequenceSpec":
        primes_in_ap(modulus, residue, 0)  # validates the class
        return cls(
            "primes_in_ap",
            modulus=modulus,
            residue=residue % modulus,
            offset=offset,
            stride=stride,
        )

    @classmethod
    def hardy_floor(
        cls, c: Rational, offset: int = 0, stride: int = 1
    ) -> "SequenceSpec":
        cf = to_fraction(c)
        if cf <= 0:
            raise ValueError("exponent must be positive")
        return cls("hardy_floor", exponent=cf, offset=offset, stride=stride)

    @classmethod
    def geometric(cls, q: int, offset: int = 0, stride: int = 1) -> "SequenceSpec":
        if q < 2:
            raise ValueError("geometric base must be >= 2")
        return cls("geometric", base=q, offset=offset, stride=stride)

    @classmethod
    def factorial(cls, offset: int = 0, stride: int = 1) -> "SequenceSpec":
        return cls("factorial", offset=offset, stride=stride)

    @classmethod
    def explicit(cls, terms: Iterable[int]) -> "SequenceSpec":
        return cls("explicit", terms=tuple(int(t) for t in terms))

    # -- generation --------------------------------------------------------

    def _indices(self, count: int) -> list[int]:
        return [self.offset + self.stride * m for m in range(1, count + 1)]

    def generate(self, count: int) -> list[int]:
        return generate(self, count)

    def metadata(self) -> dict:
        info: dict = {"kind": self.kind, "offset": self.offset, "stride": self.stride}
        if self.poly is not None:
            info["polynomial"] = self.poly.describe()
        if self.modulus is not None:
            info["modulus"] = self.modulus
            info["residue"] = self.residue
        if self.base is not None:
            info["base"] = self.base
        if self.exponent is not None:
            info["exponent"] = str(self.exponent)
            info["regime"] = hardy_regime(self.exponent)
        return info

    def residue_distribution(self, modulus: int) -> list[float] | None:
        """Limiting distribution of the terms mod ``modulus``, when one is
        implied by the arithmetic of the sequence; None otherwise."""
        return _residue_distribution(self, modulus)


def generate(spec: SequenceSpec, count: int) -> list[int]:
    """First ``count`` terms of the sequence, exact integers."""
    if count < 1:
        raise ValueError("count must be >= 1")
    idx = spec._indices(count)
    kind = spec.kind
    if kind == "identity":
        return idx
    if kind == "polynomial":
        return [eval_polynomial(spec.poly, i) for i in idx]
    if kind == "primes":
        plist = primes_first(idx[-1])
        return [plist[i - 1] for i in idx]
    if kind == "polynomial_of_primes":
        plist = primes_first(idx[-1])
        return [eval_polynomial(spec.poly, plist[i - 1]) for i in idx]
    if kind == "primes_in_ap":
        plist = primes_in_ap(spec.modulus, spec.residue, idx[-1])
        return [plist[i - 1] for i in idx]
    if kind == "hardy_floor":
        return [hardy_floor(spec.exponent, i) for i in idx]
    if kind == "geometric":
        return [spec.base**i for i in idx]
    if kind == "factorial":
        return [math.factorial(i) for i in idx]
    if kind == "explicit":
        if idx[-1] > len(spec.terms):
            raise ValueError(
                f"explicit sequence has {len(spec.terms)} terms, need index {idx[-1]}"
            )
        return [spec.terms[i - 1] for i in idx]
    raise AssertionError(kind)


# --------------------------------------------------------------------------
# limiting residue distributions (exact, where the arithmetic gives one)
# --------------------------------------------------------------------------

def _lcm_upto(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out = math.lcm(out, i)
    return out


def _poly_residue_counts(poly: IntegerPolynomial, modulus: int) -> list[float]:
    # Q(n) mod d is periodic in n with period d * lcm(1..deg): the
    # binomial-basis increments C(n+P, i) - C(n, i) are divisible by d
    # once d | C(P, t) for 1 <= t <= deg, which P = d * lcm(1..deg) gives.
    period = modulus * _lcm_upto(max(poly.degree, 1))
    counts = [0] * modulus
    for n in range(1, period + 1):
        counts[eval_polynomial(poly, n) % modulus] += 1
    return [c / period for c in counts]


def _prime_pushforward(poly: IntegerPolynomial | None, modulus: int) -> list[float]:
    # distribution of Q(p) mod d over primes p: residues of p equidistribute
    # over the classes coprime to P = d * lcm(1..deg), and Q mod d is a
    # function of p mod P.
    deg = max(poly.degree, 1) if poly is not None else 1
    period = modulus * _lcm_upto(deg)
    classes = [x for x in range(period) if math.gcd(x, period) == 1]
    counts = [0] * modulus
    for x in classes:
        v = eval_polynomial(poly, x) % modulus if poly is not None else x % modulus
        counts[v] += 1
    return [c / len(classes) for c in counts]


def _residue_distribution(spec: SequenceSpec, modulus: int) -> list[float] | None:
    if modulus < 1:
        raise ValueError("modulus must be positive")
    if modulus == 1:
        return [1.0]
    kind = spec.kind
    if kind in ("identity", "polynomial"):
        poly = spec.poly if kind == "polynomial" else IntegerPolynomial((0, 1))
        composed = poly.compose_affine(spec.stride, spec.offset)
        return _poly_residue_counts(composed, modulus)
    if kind in ("primes", "polynomial_of_primes"):
        if spec.stride != 1:
            return None  # no elementary prediction along index subprogressions
        return _prime_pushforward(
            spec.poly if kind == "polynomial_of_primes" else None, modulus
        )
    if kind == "primes_in_ap":
        if spec.stride != 1:
            return None
        lcm = math.lcm(spec.modulus, modulus)
        classes = [
            x
            for x in range(lcm)
            if x % spec.modulus == spec.residue and math.gcd(x, lcm) == 1
        ]
        if not classes:
            return None
        counts = [0] * modulus
        for x in classes:
            counts[x % modulus] += 1
        return [c / len(classes) for c in counts]
    if kind == "geometric":
        # orbit of q^i mod d is eventually periodic; average over the cycle
        start = spec.offset + spec.stride
        step = pow(spec.base, spec.stride, modulus)
        v = pow(spec.base, start, modulus)
        seen: dict[int, int] = {}
        orbit: list[int] = []
        while v not in seen:
            seen[v] = len(orbit)
            orbit.append(v)
            v = v * step % modulus
        cycle = orbit[seen[v] :]
        counts = [0] * modulus
        for x in cycle:
            counts[x] += 1
        return [c / len(cycle) for c in counts]
    if kind == "factorial":
        # i! is divisible by d for all i >= d
        counts = [0.0] * modulus
        counts[0] = 1.0
        return counts
    return None
