"""Integer-arithmetic vanishing certificates for complete rational sums.

A rational point a/m turns the Weyl sum into a finite Fourier sum over
residue classes mod m: S(a/m; N) = sum_r c_r e(r/m), where c_r counts how
often the phase polynomial hits residue r.  Two integer conditions on the
histogram force the sum to vanish exactly:

* half-period pairing: m even and c_r == c_{r+m/2} for every r, so terms
  cancel in pairs (e(1/2) = -1);
* residue permutation: all c_r equal, so the sum collapses to the full
  sum of m-th roots of unity, which is 0.

Everything here is exact 64-bit modular arithmetic; no floating point is
involved in issuing a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .sumcore import TorusPoint, eval_direct

MAX_MODULUS = 2**31 - 1  # keeps every modular product inside int64

_SPLITTER = 134217729.0  # 2^27 + 1


def _two_prod_scalar(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl

HALF_PERIOD_PAIRING = "half-period-pairing"
RESIDUE_PERMUTATION = "residue-permutation"
NUMERIC_ONLY = "numeric-only"


@dataclass(frozen=True)
class RationalPoint:
    """A point (a_1/m, ..., a_d/m) with a common denominator m."""

    numerators: tuple[int, ...]
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ContractError(f"modulus must be >= 2, got {self.modulus}")
        if self.modulus > MAX_MODULUS:
            raise ContractError(f"modulus {self.modulus} exceeds 2^31-1")
        if len(self.numerators) < 1:
            raise ContractError("need at least one numerator")
        reduced = tuple(int(a) % self.modulus for a in self.numerators)
        object.__setattr__(self, "numerators", reduced)

    @property
    def degree(self) -> int:
        return len(self.numerators)

    def to_torus(self) -> TorusPoint:
        """Embed as a TorusPoint carrying the exact a/m in double-double."""
        hi = []
        lo = []
        m = float(self.modulus)
        for a in self.numerators:
            h = a / self.modulus
            p, e = _two_prod_scalar(h, m)
            r = (float(a) - p) - e
            hi.append(h)
            lo.append(r / self.modulus)
        return TorusPoint(tuple(hi), tuple(lo))

    def __str__(self) -> str:
        return ",".join(str(a) for a in self.numerators) + f"/{self.modulus}"


@dataclass
class ResidueHistogram:
    """Counts of phase-polynomial values mod m over n = 1..total."""

    modulus: int
    counts: np.ndarray  # int64, length modulus
    total: int


@dataclass
class VanishingCertificate:
    point: RationalPoint
    span: int
    mechanism: str  # one of the three module constants
    verified: bool


@lru_cache(maxsize=256)
def _period_values(numerators: tuple[int, ...], modulus: int) -> np.ndarray:
    """Phase polynomial values mod m for k = 1..m (Horner, reduced each step)."""
    k = np.arange(1, modulus + 1, dtype=np.int64)
    v = np.zeros_like(k)
    for a in reversed(numerators):
        v = (v * k + a) % modulus
    v = (v * k) % modulus
    return v


def residue_histogram(point: RationalPoint, n: int) -> ResidueHistogram:
    """Histogram c_r = #{1 <= k <= n : P(k) = r mod m}.

    One O(m) period precomputation (cached per point), then whole periods
    are counted by scaling and the remainder by a direct pass.
    """
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    m = point.modulus
    vals = _period_values(point.numerators, m)
    whole, rem = divmod(n, m)
    counts = np.zeros(m, dtype=np.int64)
    if whole:
        counts += np.bincount(vals, minlength=m) * whole
    if rem:
        counts += np.bincount(vals[:rem], minlength=m)
    return ResidueHistogram(modulus=m, counts=counts, total=n)


def eval_rational_exactly(point: RationalPoint, n: int) -> complex:
    """sum_r c_r e(r/m): m transcendental calls however large n is."""
    hist = residue_histogram(point, n)
    roots = np.exp((2j * np.pi / hist.modulus) * np.arange(hist.modulus))
    return complex(np.dot(hist.counts, roots))


def certify_zero(point: RationalPoint, span: int) -> VanishingCertificate:
    """Certificate that S(point; span) = 0, by integer checks when possible.

    Falls back to a numeric-only check (|sum| < 1e-9 * span) for sums that
    vanish for reasons other than the two certified mechanisms.
    """
    if span < 1:
        raise ContractError(f"span must be >= 1, got {span}")
    hist = residue_histogram(point, span)
    m = hist.modulus
    c = hist.counts
    if m % 2 == 0 and np.array_equal(c, np.roll(c, m // 2)):
        return VanishingCertificate(point, span, HALF_PERIOD_PAIRING, True)
    if np.all(c == c[0]):
        return VanishingCertificate(point, span, RESIDUE_PERMUTATION, True)
    verified = abs(eval_rational_exactly(point, span)) < 1e-9 * span
    return VanishingCertificate(point, span, NUMERIC_ONLY, verified)


def _histogram_identity_residual(point: RationalPoint, n: int) -> float:
    """|exact Fourier form - direct evaluation|, for diagnostics/tests."""
    return abs(eval_rational_exactly(point, n) - eval_direct(point.to_torus(), n))


def parse_rational(text: str) -> RationalPoint:
    """Parse "a1,a2,../m" into a RationalPoint (exact round-trip format)."""
    try:
        nums, m = text.split("/")
        numerators = tuple(int(a) for a in nums.split(","))
        modulus = int(m)
    except ValueError as exc:
        raise ContractError(f"malformed rational point {text!r}") from exc
    return RationalPoint(numerators, modulus)


def gauss_monomial_point(b: int, modulus: int, degree: int) -> RationalPoint:
    """The monomial point b*n^degree / modulus as a RationalPoint."""
    if degree < 1:
        raise ContractError("degree must be >= 1")
    nums = [0] * degree
    nums[-1] = b % modulus
    return RationalPoint(tuple(nums), modulus)
