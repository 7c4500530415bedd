"""Evaluation of Weyl sums S_d(x;N) and their partial-sum traces.

Two evaluators are provided:

* ``eval_direct`` computes every phase from scratch, reducing the phase
  polynomial mod 1 in double-double arithmetic before the single
  transcendental call per term.  It is the accuracy oracle.
* ``eval_incremental`` is the production kernel: a forward-difference
  recurrence that replaces per-term transcendental calls with complex
  multiplications, renormalized every RENORM_STRIDE terms by recomputing
  the difference anchors directly.

Both accumulate the running sum with compensated (two-term) addition so
that tiny sums of huge numbers of unit terms stay accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import CapacityError, ContractError

TWO_PI = 2.0 * math.pi

# Forward-difference anchors are recomputed directly every this many terms,
# which keeps multiplicative drift near N * 2^-52 while amortizing the
# transcendental calls to a fraction of a percent of the term count.
RENORM_STRIDE = 16384

# Anchor refresh distance inside a block.  Nested cumprod error grows like a
# power of the distance from the anchor, so this stays small; the exp calls
# it costs are (d+1)/64 of the term count.
INNER_STRIDE = 64
_INNER_BY_DEGREE = {4: 32}  # degree >= 5 uses 16


def _inner_stride(d: int) -> int:
    if d <= 3:
        return INNER_STRIDE
    return _INNER_BY_DEGREE.get(d, 16)

MAX_N = 2**53 - 1

# Hard cap on the number of stored checkpoints in a trace (~256 MB of
# complex128).  Larger requests must use a bigger stride.
TRACE_CAPACITY = 2**24

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split constant


@dataclass(frozen=True)
class TorusPoint:
    """A point of the d-torus: the coefficient vector of the phase polynomial.

    ``coords[j-1]`` is the coefficient of n^j, in fractions of a full turn.
    Coordinates are reduced mod 1 on construction.

    ``coords_lo`` optionally holds double-double low parts, so that points
    derived from exact rationals a/m evaluate at the true rational rather
    than its nearest float (the rounding otherwise grows like n^d per term).
    """

    coords: tuple[float, ...]
    coords_lo: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ContractError("TorusPoint needs at least one coordinate")
        reduced = tuple(float(c) % 1.0 for c in self.coords)
        object.__setattr__(self, "coords", reduced)
        if self.coords_lo is not None and len(self.coords_lo) != len(self.coords):
            raise ContractError("coords_lo length must match coords")

    @property
    def degree(self) -> int:
        return len(self.coords)


@dataclass
class PartialSumTrace:
    """Checkpointed partial sums S(N) of a single orbit."""

    point: TorusPoint
    n_max: int
    checkpoints: np.ndarray  # strictly increasing int64 N values
    values: np.ndarray  # complex128 S(N) at each checkpoint
    full: bool = field(default=False)


# ---------------------------------------------------------------------------
# double-double helpers (vectorized; arrays or scalars)

def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _two_prod(a, b):
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _phases_mod1(coords, n: np.ndarray, lo=None) -> np.ndarray:
    """Phase polynomial P(n) = sum_j coords[j-1] * n^j reduced mod 1.

    Horner evaluation in double-double arithmetic.  Because every pending
    multiplier in the Horner scheme is an integer power of n, the running
    value can be reduced mod 1 after each multiplication without changing
    the final value mod 1; this keeps all intermediates below |n| and the
    absolute error near n^d * 2^-106.
    """
    if lo is None:
        lo = (0.0,) * len(coords)
    k = np.asarray(n, dtype=np.float64)
    hi = np.zeros_like(k)
    low = np.zeros_like(k)
    for x, x_lo in zip(reversed(coords), reversed(lo)):
        sh, sl = _two_sum(hi, x)
        sl = sl + low + x_lo
        hi, sl2 = _two_sum(sh, sl)
        # multiply by the integer n and reduce mod 1
        ph, pl = _two_prod(hi, k)
        pl = pl + sl2 * k
        hi, low = _two_sum(ph, pl)
        f = np.floor(hi)
        hi = hi - f
    hi, low = _two_sum(hi, low)
    out = hi + low
    out = out - np.floor(out)
    return out


def _unit_phases(coords, n: np.ndarray, lo=None) -> np.ndarray:
    """e(P(n)) for an integer array n."""
    return np.exp((2j * np.pi) * _phases_mod1(coords, n, lo))


class _Neumaier:
    """Compensated accumulator for complex partial block sums."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0 + 0.0j
        self.c = 0.0 + 0.0j

    def add(self, v: complex):
        t = self.s + v
        if abs(self.s.real) + abs(self.s.imag) >= abs(v.real) + abs(v.imag):
            self.c += (self.s - t) + v
        else:
            self.c += (v - t) + self.s
        self.s = t

    @property
    def value(self) -> complex:
        return self.s + self.c


def _check_point(x: TorusPoint):
    if not isinstance(x, TorusPoint):
        raise ContractError(f"expected TorusPoint, got {type(x).__name__}")


def _check_n(n: int, minimum: int = 0):
    if n < minimum:
        raise ContractError(f"n must be >= {minimum}, got {n}")
    if n > MAX_N:
        raise ContractError(f"n={n} exceeds the exact-integer range 2^53-1")


# ---------------------------------------------------------------------------
# direct evaluator (oracle)

_DIRECT_CHUNK = 1 << 17


def eval_direct(x: TorusPoint, n: int) -> complex:
    """S_d(x; n) with one transcendental call per term, compensated sum."""
    _check_point(x)
    _check_n(n, 0)
    acc = _Neumaier()
    for start in range(1, n + 1, _DIRECT_CHUNK):
        stop = min(start + _DIRECT_CHUNK, n + 1)
        terms = _unit_phases(x.coords, np.arange(start, stop, dtype=np.int64),
                             x.coords_lo)
        acc.add(complex(np.sum(terms)))
    return acc.value


# ---------------------------------------------------------------------------
# incremental (forward-difference) evaluator

def _term_block(coords, start: int, length: int, lo=None) -> np.ndarray:
    """Terms e(P(start)), ..., e(P(start+length-1)) by forward differencing.

    The j-th finite difference of P has degree d-j, and the d-th is constant,
    so each difference level within the block is a cumulative product of the
    level above it.  Only d+1 phases are computed directly, at the block
    anchor; everything else is complex multiplication.
    """
    d = len(coords)
    if length <= 0:
        return np.empty(0, dtype=np.complex128)
    if length <= max(d + 1, 8) or d + 2 >= _inner_stride(d):
        return _unit_phases(coords, np.arange(start, start + length, dtype=np.int64),
                            lo)

    if d == 1:
        ph = _phases_mod1(coords, np.arange(start, start + 2, dtype=np.int64), lo)
        z0 = np.exp((2j * np.pi) * ph[0])
        z1 = np.exp((2j * np.pi) * ((ph[1] - ph[0]) % 1.0))
        terms = np.empty(length, dtype=np.complex128)
        terms[0] = z0
        lvl = np.full(length - 1, z1, dtype=np.complex128)
        np.cumprod(lvl, out=lvl)
        np.multiply(z0, lvl, out=terms[1:])
        return terms

    # Rounding error of the nested difference recurrence grows like a power
    # of the span, so anchors are refreshed every INNER_STRIDE terms; only
    # the d+1 anchor phases per sub-block are computed directly, everything
    # else is complex multiplication.
    inner = _inner_stride(d)
    n_sub = -(-length // inner)
    sub_starts = start + inner * np.arange(n_sub, dtype=np.int64)
    idx = sub_starts[:, None] + np.arange(d + 1, dtype=np.int64)[None, :]
    ph = _phases_mod1(coords, idx, lo)
    z_cols = [ph[:, 0]]
    w = ph
    for _ in range(d):
        w = (w[:, 1:] - w[:, :-1]) % 1.0
        z_cols.append(w[:, 0])
    z = np.exp((2j * np.pi) * np.stack(z_cols, axis=1))  # (n_sub, d+1)

    out = np.empty(length, dtype=np.complex128)
    _expand_differences(z, inner, length, out)
    return out


@njit(cache=True)
def _expand_differences(z, inner, length, out):  # pragma: no cover
    """Fill ``out`` with terms from per-sub-block anchor rows ``z``.

    Row i of z holds the term at the sub-block anchor and its d forward
    differences; the recurrence f[j] *= f[j+1] advances all levels by one.
    """
    n_sub, dp1 = z.shape
    d = dp1 - 1
    f = np.empty(dp1, dtype=np.complex128)
    pos = 0
    for i in range(n_sub):
        for k in range(dp1):
            f[k] = z[i, k]
        steps = inner if pos + inner <= length else length - pos
        for _ in range(steps):
            out[pos] = f[0]
            pos += 1
            for j in range(d):
                f[j] = f[j] * f[j + 1]


def iter_term_blocks(x: TorusPoint, n: int, block: int = RENORM_STRIDE):
    """Yield (start, terms) covering n = 1 .. n in blocks.

    Each block is renormalized: its difference anchors are recomputed
    directly, so modulus drift never accumulates across blocks.
    """
    _check_point(x)
    _check_n(n, 0)
    start = 1
    while start <= n:
        length = min(block, n - start + 1)
        yield start, _term_block(x.coords, start, length, x.coords_lo)
        start += length


def eval_incremental(x: TorusPoint, n: int) -> complex:
    """Same value as ``eval_direct`` via the forward-difference kernel."""
    _check_n(n, 1)
    acc = _Neumaier()
    for _, terms in iter_term_blocks(x, n):
        acc.add(complex(np.sum(terms)))
    return acc.value


def iter_partial_sum_blocks(x: TorusPoint, n: int, block: int = RENORM_STRIDE):
    """Yield (start, S_values) where S_values[i] = S(start + i), streaming."""
    acc = _Neumaier()
    for start, terms in iter_term_blocks(x, n, block):
        np.cumsum(terms, out=terms)
        base = acc.value
        acc.add(complex(terms[-1]))
        terms += base
        yield start, terms


def trace(x: TorusPoint, n_max: int, checkpoint_stride: int = 1) -> PartialSumTrace:
    """Checkpointed partial sums at N = stride, 2*stride, ..., plus N = n_max."""
    _check_point(x)
    _check_n(n_max, 1)
    if checkpoint_stride < 1:
        raise ContractError(f"stride must be >= 1, got {checkpoint_stride}")
    count = n_max // checkpoint_stride + (1 if n_max % checkpoint_stride else 0)
    if count > TRACE_CAPACITY:
        raise CapacityError(
            f"trace would store {count} checkpoints (cap {TRACE_CAPACITY}); "
            f"use a stride of at least {n_max // TRACE_CAPACITY + 1}"
        )
    checkpoints = np.arange(checkpoint_stride, n_max + 1, checkpoint_stride,
                            dtype=np.int64)
    if checkpoints.size == 0 or checkpoints[-1] != n_max:
        checkpoints = np.append(checkpoints, np.int64(n_max))
    values = np.empty(checkpoints.size, dtype=np.complex128)
    pos = 0
    for start, sums in iter_partial_sum_blocks(x, n_max):
        stop = start + sums.size  # covers N in [start, stop)
        while pos < checkpoints.size and checkpoints[pos] < stop:
            values[pos] = sums[checkpoints[pos] - start]
            pos += 1
    return PartialSumTrace(
        point=x,
        n_max=n_max,
        checkpoints=checkpoints,
        values=values,
        full=(checkpoint_stride == 1),
    )
