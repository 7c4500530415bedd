"""Box-counting dimension estimates and the random Cantor construction.

The random Cantor set subdivides each surviving square into four equal
quadrants and removes one uniformly at random, keeping three; after n
levels, 3^n squares of side 2^-n survive.  Its natural measure mu_n gives
each surviving level-k square mass 3^-k (density (4/3)^n on the union),
and E(mu_n(U)) equals the Lebesgue measure of U.

Quadrants are numbered 0..3 with bit 0 = right half, bit 1 = top half.
Removal indices consume the seed in breadth-first order, so a realization
of depth n+1 shares its first n levels with the depth-n realization of the
same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, ContractError

MAX_DEPTH = 15  # 3^15 ~ 14M surviving squares
MAX_BOX_SCALE = 30  # finest dyadic scale 2^-30 (fixed-point bits)

G_MENU = ("1", "ln", "ln^1/3", "ln^1/6")


@dataclass(frozen=True)
class BoxCountResult:
    scales: list[int]  # box side 2^-k for each k
    counts: list[int]  # occupied dyadic boxes at each scale
    slope: float  # fitted box dimension
    r2: float


@dataclass(frozen=True)
class CantorRealization:
    depth: int
    seed: int
    # removals[k][i]: removed quadrant of the i-th surviving level-k square,
    # squares in breadth-first order (children of i are 3i, 3i+1, 3i+2)
    removals: tuple[np.ndarray, ...]

    @property
    def kept_count(self) -> int:
        return 3**self.depth


@dataclass(frozen=True)
class WeylStatSummary:
    g_name: str
    depth: int
    n_max: int
    values: np.ndarray  # per-sample running-max statistic
    quartiles: tuple[float, float, float]
    max: float


# ---------------------------------------------------------------------------
# box counting

def box_count(points: np.ndarray, k_min: int, k_max: int) -> BoxCountResult:
    """Occupied dyadic boxes per scale and the fitted log2 slope.

    Coordinates are clipped to [0, 1) and converted to fixed point once;
    each scale is then a bit shift and a distinct-row count.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise ContractError("points must be non-empty")
    if not (0 <= k_min <= k_max <= MAX_BOX_SCALE):
        raise ContractError(
            f"need 0 <= k_min <= k_max <= {MAX_BOX_SCALE}, "
            f"got {k_min}, {k_max}"
        )
    scale = 1 << MAX_BOX_SCALE
    fixed = np.clip((pts * scale).astype(np.int64), 0, scale - 1)
    scales = list(range(k_min, k_max + 1))
    counts = []
    dim = fixed.shape[1]
    for k in scales:
        boxes = fixed >> (MAX_BOX_SCALE - k)
        if dim * k <= 63:
            # pack one box id per point: unique on 1-d is much faster
            packed = boxes[:, 0]
            for j in range(1, dim):
                packed = (packed << k) | boxes[:, j]
            counts.append(int(len(np.unique(packed))))
        else:
            counts.append(int(len(np.unique(boxes, axis=0))))
    logs = np.log2(np.array(counts, dtype=float))
    ks = np.array(scales, dtype=float)
    if len(scales) < 2 or np.ptp(logs) == 0.0:
        return BoxCountResult(scales, counts, 0.0, 1.0)
    slope, intercept = np.polyfit(ks, logs, 1)
    fitted = slope * ks + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    return BoxCountResult(scales, counts, float(slope), 1.0 - ss_res / ss_tot)


# ---------------------------------------------------------------------------
# random Cantor set

def cantor_sample(depth: int, seed: int) -> CantorRealization:
    """Draw a realization: one uniform removal per surviving square."""
    if depth < 0:
        raise ContractError(f"depth must be >= 0, got {depth}")
    if depth > MAX_DEPTH:
        raise CapacityError(f"depth {depth} exceeds the cap {MAX_DEPTH}")
    rng = np.random.default_rng(seed)
    removals = tuple(
        rng.integers(0, 4, size=3**level, dtype=np.int8)
        for level in range(depth)
    )
    return CantorRealization(depth=depth, seed=seed, removals=removals)


def _measure_rect(real, level, bfs, x0, y0, side, rx0, ry0, rx1, ry1, one):
    """mu restricted to the given surviving square, recursively."""
    x1 = x0 + side
    y1 = y0 + side
    w = min(rx1, x1) - max(rx0, x0)
    h = min(ry1, y1) - max(ry0, y0)
    if w <= 0 or h <= 0:
        return 0 * one
    mass = one / 3**level
    if rx0 <= x0 and ry0 <= y0 and x1 <= rx1 and y1 <= ry1:
        return mass  # fully contained: all deeper mass stays inside
    if level == real.depth:
        return mass * (w * h) / (side * side)
    removed = int(real.removals[level][bfs])
    half = side / 2
    total = 0 * one
    rank = 0
    for q in range(4):
        if q == removed:
            continue
        total += _measure_rect(
            real, level + 1, 3 * bfs + rank,
            x0 + (q & 1) * half, y0 + (q >> 1) * half, half,
            rx0, ry0, rx1, ry1, one,
        )
        rank += 1
    return total


def _is_dyadic(v: Fraction) -> bool:
    q = v.denominator
    return q & (q - 1) == 0


def cantor_measure(real: CantorRealization, rect) -> float | Fraction:
    """mu_n(rect) for rect = (x0, y0, x1, y1) inside the unit square.

    Passing all four corners as Fraction with power-of-two denominators
    selects exact rational arithmetic; any float corner selects floating
    arithmetic (good to ~1e-12).
    """
    if len(rect) != 4:
        raise ContractError("rect must be (x0, y0, x1, y1)")
    exact = all(isinstance(v, Fraction) and _is_dyadic(v) for v in rect)
    if exact:
        rx0, ry0, rx1, ry1 = rect
        one = Fraction(1)
    else:
        rx0, ry0, rx1, ry1 = (float(v) for v in rect)
        one = 1.0
    if not (0 <= rx0 < rx1 <= 1 and 0 <= ry0 < ry1 <= 1):
        raise ContractError(f"malformed rectangle {rect!r}")
    return _measure_rect(real, 0, 0, 0 * one, 0 * one, one,
                         rx0, ry0, rx1, ry1, one)


def cantor_expectation_test(
    rect, depth: int, trials: int, seed: int
) -> tuple[float, float, float]:
    """(Monte Carlo mean of mu_n(rect), standard error, Lebesgue target)."""
    if trials < 100:
        raise ContractError(f"trials must be >= 100, got {trials}")
    frect = tuple(float(v) for v in rect)
    rx0, ry0, rx1, ry1 = frect
    area = (rx1 - rx0) * (ry1 - ry0)
    trial_seeds = np.random.SeedSequence(seed).generate_state(trials)
    values = np.empty(trials)
    for i, s in enumerate(trial_seeds):
        values[i] = cantor_measure(cantor_sample(depth, int(s)), frect)
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(values.mean()), stderr, area


def cantor_draw(real: CantorRealization, seed: int, count: int) -> np.ndarray:
    """Points distributed as mu_n: descend choosing kept children uniformly,
    then uniform within the final depth-n square.  Returns (count, 2)."""
    if count < 1:
        raise ContractError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    x = np.zeros(count)
    y = np.zeros(count)
    bfs = np.zeros(count, dtype=np.int64)
    for level in range(real.depth):
        removed = real.removals[level][bfs]
        rank = rng.integers(0, 3, size=count)
        q = rank + (rank >= removed)  # skip over the removed quadrant
        half = 0.5 ** (level + 1)
        x += (q & 1) * half
        y += (q >> 1) * half
        bfs = 3 * bfs + rank
    side = 0.5**real.depth
    x += rng.random(count) * side
    y += rng.random(count) * side
    return np.column_stack([x, y])


def surviving_squares(real: CantorRealization) -> np.ndarray:
    """Origins (ix, iy) of surviving depth-n squares, units of 2^-n, BFS order."""
    if real.depth > 12:
        raise CapacityError("surviving_squares is capped at depth 12")
    origins = np.zeros((1, 2), dtype=np.int64)
    for level in range(real.depth):
        removed = real.removals[level]
        quads = np.array(
            [[q for q in range(4) if q != r] for r in removed], dtype=np.int64
        )  # (3^level, 3)
        dx = quads & 1
        dy = quads >> 1
        origins = (
            origins[:, None, :] * 2
            + np.stack([dx, dy], axis=-1)
        ).reshape(-1, 2)
    return origins


def cantor_weyl_statistic(
    depth: int,
    trials: int,
    n_max: int,
    g: str,
    seed: int = 0,
) -> WeylStatSummary:
    """Running-max of |S_2(x;N)| / (sqrt(N) g(ln N)) for mu_n-sampled x.

    One point is drawn from each of ``trials`` independent realizations.
    N starts at 2 so that g(ln N) is positive for every menu choice.
    """
    from .sumcore import TorusPoint, iter_partial_sum_blocks

    if g not in G_MENU:
        raise ContractError(f"g must be one of {G_MENU}, got {g!r}")
    if trials < 1 or n_max < 2:
        raise ContractError("need trials >= 1 and n_max >= 2")
    powers = {"1": 0.0, "ln": 1.0, "ln^1/3": 1 / 3, "ln^1/6": 1 / 6}
    exponent = powers[g]
    trial_seeds = np.random.SeedSequence(seed).generate_state(trials)
    values = np.empty(trials)
    for i, s in enumerate(trial_seeds):
        real = cantor_sample(depth, int(s))
        pt = cantor_draw(real, int(s) ^ 0xC0FFEE, 1)[0]
        x = TorusPoint((float(pt[0]), float(pt[1])))
        worst = 0.0
        for start, sums in iter_partial_sum_blocks(x, n_max):
            ns = np.arange(start, start + sums.size, dtype=float)
            mask = ns >= 2
            denom = np.sqrt(ns[mask]) * np.log(ns[mask]) ** exponent
            stat = np.abs(sums[mask]) / denom
            if stat.size:
                worst = max(worst, float(stat.max()))
        values[i] = worst
    q1, q2, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return WeylStatSummary(
        g_name=g, depth=depth, n_max=n_max, values=values,
        quartiles=(float(q1), float(q2), float(q3)), max=float(values.max()),
    )


# ---------------------------------------------------------------------------
# serialization

def realization_record(real: CantorRealization) -> str:
    """depth, seed, and the removal digits in breadth-first order (base 4)."""
    digits = "".join(
        "".join(str(int(v)) for v in level) for level in real.removals
    )
    return f"{real.depth}\t{real.seed}\t{digits or '-'}"


def parse_realization_record(line: str) -> CantorRealization:
    try:
        depth_s, seed_s, digits = line.rstrip("\n").split("\t")
        depth = int(depth_s)
        seed = int(seed_s)
        if digits == "-":
            digits = ""
        flat = np.array([int(c) for c in digits], dtype=np.int8)
    except ValueError as exc:
        raise ContractError(f"malformed realization record {line!r}") from exc
    if depth < 0 or len(flat) != (3**depth - 1) // 2 or np.any(flat > 3):
        raise ContractError(f"inconsistent realization record {line!r}")
    removals = []
    offset = 0
    for level in range(depth):
        n = 3**level
        removals.append(flat[offset:offset + n].copy())
        offset += n
    return CantorRealization(depth=depth, seed=seed, removals=tuple(removals))
