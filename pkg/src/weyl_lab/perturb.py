"""Empirical verification of incomplete-sum and continuity bounds.

``incomplete_bound_scan`` measures, for each prime, the worst ratio of an
incomplete exponential sum against its expected bound shape:

* ``gauss-p``         : max_N |sum_{n<=N} e_p(b n^2)|                / sqrt(p)
* ``shifted-gauss-p`` : max over windows of |sum e_p(a n + b n^2)|   / sqrt(p)
* ``monomial-p``      : max over windows of |sum e_p(a n^d)|  / (sqrt(p) log p)
* ``quadratic-4p``    : max_{N<=4p} |sum e_{4p}(a n + b n^2)| / (sqrt(p) log p)

Window maxima for the shifted quadratic case reduce to prefix maxima: the
substitution n -> n + M turns the window into a prefix with the linear
coefficient shifted to a + 2bM, and M sweeping the residues sweeps all
shifted coefficients.  Monomial windows admit no such reduction, so their
maximum is the diameter of the prefix-sum point set in the plane.

``continuity_check`` verifies the perturbation estimate
|S_d(y;N) - S_d(x;N)| <= c * tau * (kappa N^alpha + K) for offsets
0 <= y_i - x_i < tau N^-i, after first checking the growth hypothesis
|S_d(x;M)| <= c (kappa M^alpha + K) along the whole prefix.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial import ConvexHull, QhullError
from sympy import primerange

from .errors import ContractError, HypothesisViolationError
from .exactzero import RationalPoint
from .sumcore import TorusPoint, eval_incremental, iter_partial_sum_blocks

KIND_GAUSS = "gauss-p"
KIND_SHIFTED = "shifted-gauss-p"
KIND_MONOMIAL = "monomial-p"
KIND_QUADRATIC = "quadratic-4p"

SCAN_KINDS = (KIND_GAUSS, KIND_SHIFTED, KIND_MONOMIAL, KIND_QUADRATIC)

# exhaustive coefficient enumeration above this prime would be intractable;
# callers must pass a sample size instead
EXHAUSTIVE_P_MAX = 10**4

# probes reject tau above this (the estimate is only meaningful for tau = O(1))
TAU_CAP = 4.0


@dataclass(frozen=True)
class BoundProfile:
    """Growth envelope kappa*M^alpha + K with perturbation scale tau.

    ``tau = 0`` is admitted as the degenerate corner (zero offsets, zero
    difference); probes over several tau values require tau > 0.  When ``c``
    is given, the envelope hypothesis is enforced at that constant;
    otherwise the constant is fitted from the observed prefix.
    """

    alpha: float
    kappa: float
    K: float
    tau: float
    description: str = ""
    c: float | None = None

    def __post_init__(self):
        if self.alpha < 0 or self.kappa < 0 or self.K < 0:
            raise ContractError("alpha, kappa, K must be >= 0")
        if self.tau < 0:
            raise ContractError(f"tau must be >= 0, got {self.tau}")
        if self.kappa == 0 and self.K == 0:
            raise ContractError("envelope is identically zero")

    def envelope(self, m) -> float:
        return self.kappa * np.asarray(m, dtype=np.float64) ** self.alpha + self.K


@dataclass(frozen=True)
class BoundReport:
    profile: BoundProfile
    n: int
    lhs: float  # worst |S(y;n) - S(x;n)| observed
    rhs_unit: float  # tau * (kappa n^alpha + K)
    ratio: float
    samples: int
    c_fit: float  # fitted hypothesis constant over the prefix


def gauss_profile(p: int, tau: float) -> BoundProfile:
    """Envelope for Gauss anchors b/2p: (alpha, kappa, K) = (0, 0, sqrt(p))."""
    return BoundProfile(0.0, 0.0, math.sqrt(p), tau, f"gauss p={p}")


def quadratic_profile(p: int, tau: float) -> BoundProfile:
    """Envelope for quadratic anchors: (1, p^-1/2 log p, sqrt(p) log p)."""
    lg = math.log(p)
    return BoundProfile(1.0, lg / math.sqrt(p), math.sqrt(p) * lg, tau,
                        f"quadratic p={p}")


# ---------------------------------------------------------------------------
# incomplete-sum scans

@njit(cache=True)
def _prefix_max_kernel(m, a_arr, b_arr, cos_t, sin_t):  # pragma: no cover
    """max over listed (a, b) and N <= m of |sum_{n<=N} e_m(a n + b n^2)|.

    The phase index advances by a + b(2n-1) each step, itself advancing by
    2b, so the whole scan is integer adds and two table lookups per term.
    """
    best = 0.0
    for i in range(a_arr.shape[0]):
        step = (a_arr[i] + b_arr[i]) % m
        inc = (2 * b_arr[i]) % m
        idx = 0
        sr = 0.0
        si = 0.0
        mx = 0.0
        for _ in range(m):
            idx += step
            if idx >= m:
                idx -= m
            sr += cos_t[idx]
            si += sin_t[idx]
            v = sr * sr + si * si
            if v > mx:
                mx = v
            step += inc
            if step >= m:
                step -= m
        if mx > best:
            best = mx
    return math.sqrt(best)


def _root_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    ang = (2.0 * np.pi / m) * np.arange(m)
    return np.cos(ang), np.sin(ang)


def _diameter(points: np.ndarray) -> float:
    """Diameter of a planar point set (complex array), via the convex hull."""
    xy = np.column_stack([points.real, points.imag])
    if len(xy) > 3:
        try:
            xy = xy[ConvexHull(xy).vertices]
        except QhullError:
            pass  # degenerate (collinear) hull: fall through to pairwise
    d2 = np.sum((xy[:, None, :] - xy[None, :, :]) ** 2, axis=-1)
    return math.sqrt(float(d2.max()))


def _scan_pairs(p: int, kind: str, sample_size: int | None, rng) -> tuple:
    """(modulus, a-array, b-array) for the prefix-max kernel at one prime."""
    if kind == KIND_GAUSS:
        # conjugation b <-> p-b halves the range
        b = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
        if sample_size is not None and len(b) > sample_size:
            b = rng.choice(b, size=sample_size, replace=False)
        return p, np.zeros_like(b), b
    if kind == KIND_SHIFTED:
        if sample_size is None:
            b = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
            a = np.arange(p, dtype=np.int64)
            bb, aa = np.meshgrid(b, a, indexing="ij")
            return p, aa.ravel(), bb.ravel()
        a = rng.integers(0, p, size=sample_size, dtype=np.int64)
        b = rng.integers(1, p, size=sample_size, dtype=np.int64)
        return p, a, b
    if kind == KIND_QUADRATIC:
        m = 4 * p
        coprime = np.array(
            [v for v in range(1, m + 1) if math.gcd(v, 2 * p) == 1],
            dtype=np.int64,
        )
        # conjugation (a, b) <-> (4p-a, 4p-b): scan a below 2p only
        a_half = coprime[coprime < 2 * p]
        if sample_size is None:
            aa, bb = np.meshgrid(a_half, coprime, indexing="ij")
            return m, aa.ravel(), bb.ravel()
        a = rng.choice(a_half, size=sample_size, replace=True)
        b = rng.choice(coprime, size=sample_size, replace=True)
        return m, a, b
    raise ContractError(f"unknown scan kind {kind!r}")


def _monomial_worst(p: int, d: int, sample_size: int | None, rng) -> float:
    n = np.arange(1, p + 1, dtype=np.int64)
    nd = np.ones_like(n)
    for _ in range(d):
        nd = (nd * n) % p
    cos_t, sin_t = _root_tables(p)
    a_vals = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)  # conjugate half
    if sample_size is not None and len(a_vals) > sample_size:
        a_vals = rng.choice(a_vals, size=sample_size, replace=False)
    worst = 0.0
    for a in a_vals:
        idx = (int(a) * nd) % p
        terms = cos_t[idx] + 1j * sin_t[idx]
        prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(terms)])
        # windows are differences of prefix sums; windows crossing the
        # period reach the same point set translated by the complete sum
        pts = np.concatenate([prefix, prefix + prefix[-1]])
        worst = max(worst, _diameter(pts))
    return worst


def incomplete_bound_scan(
    kind: str,
    p_max: int,
    d: int = 3,
    sample_size: int | None = None,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Worst observed ratio against the bound shape, per prime p <= p_max."""
    if kind not in SCAN_KINDS:
        raise ContractError(f"unknown scan kind {kind!r}")
    if p_max < 3:
        raise ContractError(f"p_max must be >= 3, got {p_max}")
    if sample_size is None and p_max > EXHAUSTIVE_P_MAX:
        raise ContractError(
            f"exhaustive scan capped at p_max={EXHAUSTIVE_P_MAX}; "
            "pass sample_size"
        )
    if kind == KIND_MONOMIAL and d < 3:
        raise ContractError(f"monomial scan needs d >= 3, got {d}")
    rng = np.random.default_rng(seed)
    results = []
    for p in primerange(3, p_max + 1):
        p = int(p)
        if kind == KIND_MONOMIAL:
            worst = _monomial_worst(p, d, sample_size, rng)
            denom = math.sqrt(p) * math.log(p)
        else:
            m, a_arr, b_arr = _scan_pairs(p, kind, sample_size, rng)
            cos_t, sin_t = _root_tables(m)
            worst = _prefix_max_kernel(m, a_arr, b_arr, cos_t, sin_t)
            denom = math.sqrt(p)
            if kind == KIND_QUADRATIC:
                denom *= math.log(p)
        results.append((p, worst / denom))
    return results


def fitted_constant(scan: list[tuple[int, float]]) -> float:
    """The recorded global constant: the largest per-prime ratio."""
    if not scan:
        raise ContractError("empty scan")
    return max(r for _, r in scan)


# ---------------------------------------------------------------------------
# continuity verification

def _check_hypothesis(x: TorusPoint, profile: BoundProfile, n: int) -> float:
    """Scan |S(M)| for M <= n against the envelope; return the fitted c."""
    c_fit = 0.0
    for start, sums in iter_partial_sum_blocks(x, n):
        ms = np.arange(start, start + sums.size)
        mags = np.abs(sums)
        env = profile.envelope(ms)
        ratios = mags / env
        worst = int(np.argmax(ratios))
        if profile.c is not None and mags[worst] > profile.c * env[worst]:
            raise HypothesisViolationError(
                int(ms[worst]), float(mags[worst]),
                float(profile.c * env[worst]),
            )
        c_fit = max(c_fit, float(ratios[worst]))
    return c_fit


def continuity_check(
    anchor: RationalPoint,
    profile: BoundProfile,
    n: int,
    samples: int = 40,
    seed: int = 0,
) -> BoundReport:
    """Worst |S(y;n) - S(anchor;n)| over sampled admissible offsets.

    Offsets are drawn with 0 <= delta_i < tau * n^-i; the deterministic
    upper-corner offset is always included as one extra sample, since it
    empirically maximizes the difference.
    """
    if samples < 1:
        raise ContractError(f"samples must be >= 1, got {samples}")
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    x = anchor.to_torus()
    c_fit = _check_hypothesis(x, profile, n)
    rhs_unit = profile.tau * float(profile.envelope(n))
    if profile.tau == 0.0:
        return BoundReport(profile, n, 0.0, 0.0, 0.0, 1, c_fit)
    d = x.degree
    scale = profile.tau * np.power(float(n), -np.arange(1, d + 1, dtype=float))
    rng = np.random.default_rng(seed)
    offsets = rng.random((samples, d)) * scale
    offsets = np.vstack([offsets, scale])  # deterministic corner
    base = eval_incremental(x, n)
    lhs = 0.0
    for row in offsets:
        y = TorusPoint(tuple(c + dv for c, dv in zip(x.coords, row)),
                       x.coords_lo)
        lhs = max(lhs, abs(eval_incremental(y, n) - base))
    return BoundReport(profile, n, lhs, rhs_unit, lhs / rhs_unit,
                       samples + 1, c_fit)


def tau_scaling_probe(
    anchor: RationalPoint,
    profile: BoundProfile,
    n: int,
    taus: list[float],
    samples: int = 40,
    seed: int = 0,
) -> list[BoundReport]:
    """One continuity report per tau; linearity shows as a flat ratio band."""
    if not taus:
        raise ContractError("taus must be non-empty")
    for t in taus:
        if not (0 < t <= TAU_CAP):
            raise ContractError(f"tau must be in (0, {TAU_CAP}], got {t}")
    return [
        continuity_check(anchor, dataclasses.replace(profile, tau=t), n,
                         samples=samples, seed=seed)
        for t in taus
    ]


# ---------------------------------------------------------------------------
# tabular serialization

_SCAN_HEADER = "kind\tp\tworst_ratio"
_REPORT_HEADER = (
    "alpha\tkappa\tK\ttau\tn\tlhs\trhs_unit\tratio\tsamples\tc_fit\tdescription"
)


def scan_table(kind: str, scan: list[tuple[int, float]]) -> str:
    rows = [_SCAN_HEADER]
    rows += [f"{kind}\t{p}\t{ratio:.6g}" for p, ratio in scan]
    return "\n".join(rows)


def report_table(reports: list[BoundReport]) -> str:
    rows = [_REPORT_HEADER]
    for r in reports:
        pr = r.profile
        rows.append(
            f"{pr.alpha:g}\t{pr.kappa:.6g}\t{pr.K:.6g}\t{pr.tau:g}\t{r.n}\t"
            f"{r.lhs:.6g}\t{r.rhs_unit:.6g}\t{r.ratio:.6g}\t{r.samples}\t"
            f"{r.c_fit:.6g}\t{pr.description}"
        )
    return "\n".join(rows)
