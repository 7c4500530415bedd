"""Exploration of partial-sum behaviour: liminf proxies, small-value search,
orbit statistics, restricted sets, growth bands, and the distribution of
normalized Gauss sums.

Everything here reports finite-scan proxies: membership statements about
liminf/limsup sets are not decidable from finite data, so every result
carries its scan horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy

from .errors import ContractError
from .families import FAMILY_LAMBDA, enumerate_family, find_lambda_point_in_box
from .sumcore import TorusPoint, iter_partial_sum_blocks

ALPHA_GRID = np.round(np.arange(0.0, 3.0001, 0.05), 10)

CF_DEPTH_CAP = 40  # double precision cannot support deeper expansions
MIN_GROWTH_CHECKPOINTS = 20


@dataclass
class LiminfEstimate:
    point: TorusPoint
    n_max: int
    min_abs: float
    argmin_n: int
    record_curve: list[tuple[int, float]]  # (N, running min |S|), log-spaced


@dataclass
class SearchResult:
    found: bool
    x: TorusPoint
    n: int
    abs_value: float
    evaluations: int


@dataclass
class OrbitStats:
    n_max: int
    window: float
    grid: int
    max_abs: float
    visited_fraction: float
    line_direction: complex  # unit vector of the total-least-squares line
    line_offset: complex  # centroid the line passes through
    line_max_residual: float  # worst orthogonal distance to the line
    growth_exponent: float  # slope of log prefix-max |S| vs log N


@dataclass
class HitRecord:
    point: TorusPoint
    alpha: float
    n_min: int
    n_max: int
    count: int  # how many N in [n_min, n_max] have |S(N)| >= N^alpha
    largest_n: int  # largest such N, 0 if none


@dataclass
class PsiCurve:
    n: int
    grid: int
    alphas: np.ndarray
    psi: np.ndarray  # fraction of grid points with N^-1/2 |G| >= alpha


def _log_checkpoints(n_max: int, count: int = 64) -> np.ndarray:
    pts = np.unique(np.geomspace(1, n_max, count).astype(np.int64))
    if pts[-1] != n_max:
        pts = np.append(pts, np.int64(n_max))
    return pts


def liminf_estimate(x: TorusPoint, n_max: int) -> LiminfEstimate:
    """Exact minimum of |S(N)| over N <= n_max, with a log-spaced record curve.

    Single streaming pass; every N is examined, only the curve is sampled.
    """
    if n_max < 1:
        raise ContractError(f"n_max must be >= 1, got {n_max}")
    marks = _log_checkpoints(n_max)
    curve: list[tuple[int, float]] = []
    best = math.inf
    argmin = 0
    pos = 0
    for start, sums in iter_partial_sum_blocks(x, n_max):
        mags = np.abs(sums)
        i = int(np.argmin(mags))
        if mags[i] < best:
            best = float(mags[i])
            argmin = start + i
        stop = start + sums.size
        while pos < marks.size and marks[pos] < stop:
            m = int(marks[pos])
            running = float(np.min(mags[: m - start + 1]))
            prev = curve[-1][1] if curve else math.inf
            curve.append((m, min(prev, running)))
            pos += 1
    return LiminfEstimate(x, n_max, best, argmin, curve)


# ---------------------------------------------------------------------------
# small-value search

def _check_region(region, d: int):
    if len(region) != d:
        raise ContractError(f"region must have {d} intervals, got {len(region)}")
    for lo, hi in region:
        if not (0.0 <= lo < hi <= 1.0):
            raise ContractError(f"malformed region interval ({lo}, {hi})")


def _coprime_fraction_in(lo: float, hi: float, denom: int, g: int) -> int | None:
    """Numerator a with lo < a/denom < hi and gcd(a, g) = 1, or None."""
    a = int(math.floor(lo * denom)) + 1
    while a / denom < hi:
        if math.gcd(a, g) == 1:
            return a
        a += 1
    return None


def _anchor_candidates(region, d: int, n_cap: int, limit: int) -> list[TorusPoint]:
    """Family points inside the region whose vanishing span fits under n_cap.

    Larger spans come first: their exact zero sits deeper in the scan.
    """
    out: list[TorusPoint] = []
    if d == 1:
        # any proper fraction a/q is a complete-period zero of the linear sum
        for q in range(min(n_cap, 10**4), 1, -1):
            a = _coprime_fraction_in(*region[0], q, 1)
            if a is not None:
                out.append(TorusPoint((a / q,)))
            if len(out) >= limit:
                return out
        return out
    primes = [int(p) for p in sympy.primerange(3, max(4, n_cap // 4 + 1))]
    for p in reversed(primes):
        if len(out) >= limit:
            break
        if d == 2:
            nums = [
                _coprime_fraction_in(lo, hi, 4 * p, 2 * p) for lo, hi in region
            ]
            if all(a is not None for a in nums):
                from .exactzero import RationalPoint

                out.append(RationalPoint(tuple(nums), 4 * p).to_torus())
        else:
            if math.gcd(d, p - 1) != 1 or p <= d:
                continue
            fp = find_lambda_point_in_box(d, p, tuple(region))
            if fp is not None:
                out.append(fp.point.to_torus())
    return out


def search_small(
    region,
    d: int,
    eps: float,
    n_cap: int,
    budget: int,
    seed: int = 0,
) -> SearchResult:
    """Seeded multi-start search for x in the region with min_N |S(x;N)| <= eps.

    Candidates are exact-vanishing family anchors inside the region (tried
    first) topped up with uniform random points; ``budget`` caps the number
    of candidate evaluations, each a full streaming scan to n_cap.
    """
    if eps <= 0:
        raise ContractError(f"eps must be > 0, got {eps}")
    if n_cap < 1 or budget < 1:
        raise ContractError("n_cap and budget must be >= 1")
    _check_region(region, d)
    rng = np.random.default_rng(seed)
    candidates = _anchor_candidates(region, d, n_cap, limit=max(1, budget // 2))
    lo = np.array([r[0] for r in region])
    hi = np.array([r[1] for r in region])
    while len(candidates) < budget:
        candidates.append(TorusPoint(tuple(lo + rng.random(d) * (hi - lo))))
    best = SearchResult(False, candidates[0], 0, math.inf, 0)
    for i, x in enumerate(candidates[:budget], start=1):
        est = liminf_estimate(x, n_cap)
        if est.min_abs < best.abs_value:
            best = SearchResult(
                est.min_abs <= eps, x, est.argmin_n, est.min_abs, i
            )
        else:
            best.evaluations = i
        if best.found:
            break
    return best


# ---------------------------------------------------------------------------
# orbit statistics

def _principal_direction(sxx: float, syy: float, sxy: float) -> complex:
    """Unit eigenvector of the larger eigenvalue of [[sxx, sxy], [sxy, syy]]."""
    if sxx == 0.0 and syy == 0.0 and sxy == 0.0:
        return 1.0 + 0.0j
    half_tr = 0.5 * (sxx + syy)
    det = sxx * syy - sxy * sxy
    lam = half_tr + math.sqrt(max(half_tr * half_tr - det, 0.0))
    # (A - lam I) v = 0; pick the better-conditioned row
    if abs(sxy) > 1e-300:
        v = complex(lam - syy, sxy)
    elif sxx >= syy:
        v = 1.0 + 0.0j
    else:
        v = 0.0 + 1.0j
    return v / abs(v)


def orbit_stats(
    x: TorusPoint, n_max: int, window: float = 50.0, grid: int = 64
) -> OrbitStats:
    """Streaming statistics of the orbit {S(x;N) : N <= n_max}.

    One pass accumulates the occupancy grid, prefix maxima, and the moments
    of the total-least-squares line; a second pass measures the worst
    orthogonal residual against the fitted line.
    """
    if grid < 2:
        raise ContractError(f"grid must be >= 2, got {grid}")
    if window <= 0:
        raise ContractError(f"window must be > 0, got {window}")
    if n_max < 1:
        raise ContractError(f"n_max must be >= 1, got {n_max}")
    marks = _log_checkpoints(n_max, max(MIN_GROWTH_CHECKPOINTS + 1, 64))
    occupancy = np.zeros((grid, grid), dtype=bool)
    max_abs = 0.0
    prefix_max: list[float] = []
    pos = 0
    count = 0
    s1 = 0.0 + 0.0j
    sxx = syy = sxy = 0.0
    for start, sums in iter_partial_sum_blocks(x, n_max):
        mags = np.abs(sums)
        max_abs = max(max_abs, float(mags.max()))
        count += sums.size
        s1 += complex(sums.sum())
        sxx += float(np.sum(sums.real**2))
        syy += float(np.sum(sums.imag**2))
        sxy += float(np.sum(sums.real * sums.imag))
        inside = (np.abs(sums.real) < window) & (np.abs(sums.imag) < window)
        ix = ((sums.real[inside] + window) * (grid / (2 * window))).astype(int)
        iy = ((sums.imag[inside] + window) * (grid / (2 * window))).astype(int)
        occupancy[ix, iy] = True
        stop = start + sums.size
        while pos < marks.size and marks[pos] < stop:
            m = int(marks[pos])
            running = float(np.max(mags[: m - start + 1]))
            prev = prefix_max[-1] if prefix_max else 0.0
            prefix_max.append(max(prev, running))
            pos += 1

    centroid = s1 / count
    direction = _principal_direction(
        sxx / count - centroid.real**2,
        syy / count - centroid.imag**2,
        sxy / count - centroid.real * centroid.imag,
    )
    residual = 0.0
    for _, sums in iter_partial_sum_blocks(x, n_max):
        rel = (sums - centroid) * np.conj(direction)
        residual = max(residual, float(np.max(np.abs(rel.imag))))

    logs_n = np.log(marks.astype(float))
    logs_s = np.log(np.maximum(prefix_max, 1e-300))
    slope = float(np.polyfit(logs_n, logs_s, 1)[0]) if len(marks) > 1 else 0.0
    return OrbitStats(
        n_max=n_max,
        window=window,
        grid=grid,
        max_abs=max_abs,
        visited_fraction=float(occupancy.sum()) / grid**2,
        line_direction=direction,
        line_offset=centroid,
        line_max_residual=residual,
        growth_exponent=slope,
    )


# ---------------------------------------------------------------------------
# restricted sets and growth bands

def restricted_membership_scan(
    d: int,
    alpha: float,
    points: list[TorusPoint],
    n_min: int,
    n_max: int,
) -> list[HitRecord]:
    """Per point: the N in [n_min, n_max] with |S(N)| >= N^alpha.

    A finite-scan proxy only: no finite horizon decides membership in the
    limsup set, so records carry the scanned range.
    """
    if not (0 < alpha < 1):
        raise ContractError(f"alpha must be in (0, 1), got {alpha}")
    if not (1 <= n_min < n_max):
        raise ContractError(f"need 1 <= n_min < n_max, got {n_min}, {n_max}")
    out = []
    for x in points:
        if x.degree != d:
            raise ContractError(f"point degree {x.degree} != d={d}")
        hits = 0
        largest = 0
        for start, sums in iter_partial_sum_blocks(x, n_max):
            ns = np.arange(start, start + sums.size)
            mask = (ns >= n_min) & (np.abs(sums) >= ns.astype(float) ** alpha)
            hits += int(mask.sum())
            if mask.any():
                largest = int(ns[mask][-1])
        out.append(HitRecord(x, alpha, n_min, n_max, hits, largest))
    return out


def growth_band_check(x: float, y: float, n_max: int) -> tuple[float, float]:
    """Empirical band [min, max] of |S_2((y, x); N)| / sqrt(N) over N <= n_max."""
    if n_max < 1:
        raise ContractError(f"n_max must be >= 1, got {n_max}")
    point = TorusPoint((y, x))
    c_lower = math.inf
    c_upper = 0.0
    for start, sums in iter_partial_sum_blocks(point, n_max):
        ns = np.arange(start, start + sums.size, dtype=float)
        ratios = np.abs(sums) / np.sqrt(ns)
        c_lower = min(c_lower, float(ratios.min()))
        c_upper = max(c_upper, float(ratios.max()))
    return c_lower, c_upper


def cf_expand(x: float, k: int) -> tuple[list[int], list[tuple[int, int]]]:
    """Continued-fraction partial quotients of the fractional part of x.

    Returns (quotients, convergents); the expansion truncates early for
    rationals.  Depth is capped at 40, past which double precision has no
    information left.
    """
    if not (1 <= k <= CF_DEPTH_CAP):
        raise ContractError(f"k must be in [1, {CF_DEPTH_CAP}], got {k}")
    frac = x % 1.0
    quotients: list[int] = []
    convergents: list[tuple[int, int]] = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    while frac > 1e-12 and len(quotients) < k:
        inv = 1.0 / frac
        a = int(inv)
        frac = inv - a
        quotients.append(a)
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        convergents.append((p_cur, q_cur))
    return quotients, convergents


def psi_distribution(n: int, grid: int) -> PsiCurve:
    """Empirical tail function of N^-1/2 |sum_{m<=N} e(m^2 x)| on an x-grid.

    x runs over midpoints of a uniform partition of [0, 1]; the tail is
    reported on the fixed alpha-grid 0, 0.05, ..., 3.
    """
    if grid < 10:
        raise ContractError(f"grid must be >= 10, got {grid}")
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    stats = np.empty(grid)
    scale = 1.0 / math.sqrt(n)
    for j in range(grid):
        xj = (j + 0.5) / grid
        total = 0.0 + 0.0j
        for _, sums in iter_partial_sum_blocks(TorusPoint((0.0, xj)), n):
            total = sums[-1]
        stats[j] = scale * abs(total)
    psi = np.array([(stats >= a).mean() for a in ALPHA_GRID])
    return PsiCurve(n=n, grid=grid, alphas=ALPHA_GRID.copy(), psi=psi)
