"""Structured point families with exact vanishing, and their Diophantine limits.

Rational families (complete sums vanish exactly, certified by exactzero):

* ``P_p``   : (a/4p, b/4p) with gcd(ab, 2p) = 1, quadratic, span 4p;
* ``Q_p``   : b/2p with gcd(b, 2p) = 1, degree-2 monomial, span 2p;
* ``R_p``   : b/p for 1 <= b <= p, degree-d monomial (gcd(d, p-1) = 1), span p
              (the b = p element is the origin, where the sum is p, not 0;
              it is returned flagged and never certified);
* ``lambda-binomial`` : p^-1 (C(d,1) L, C(d,2) L^2, ..., C(d,d) L^d) mod p,
              a full-degree point whose complete sum over p terms vanishes.

Diophantine families (``build_dio_point``) realize points admitting
infinitely many close rational approximations by a greedy nested-interval
construction: each step picks a larger admissible prime whose anchor
fraction, padded by the family's approximation bound, fits strictly inside
the current interval.  A depth-k result carries k verified witnesses; the
limit point is approximated by the left endpoint of the innermost interval.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy

from .errors import ContractError, NumericError, PrimeSearchError
from .exactzero import RationalPoint, certify_zero, gauss_monomial_point
from .sumcore import TorusPoint, eval_direct

FAMILY_P = "P_p"
FAMILY_Q = "Q_p"
FAMILY_R = "R_p"
FAMILY_LAMBDA = "lambda-binomial"

DIO_P = "P*"
DIO_Q = "Q*"
DIO_R = "R*"
DIO_RECT = "rectangle-R"

PRIME_SEARCH_CAP = 10**9
# The innermost interval of a depth-3 construction for the steep monomial
# family needs primes near 1e12, so the Diophantine builder runs with a
# larger cap than the default prime search.
DIO_PRIME_CAP = 10**13

# enumerate_family returns the complete family only up to this prime;
# beyond it a sample_size must be requested.
FULL_ENUMERATION_LIMIT = 200


@dataclass(frozen=True)
class FamilyPoint:
    family: str
    prime: int
    params: tuple[int, ...]  # (a, b), (b,), or (lam,)
    point: RationalPoint
    vanishing_span: int
    degenerate: bool = False


@dataclass(frozen=True)
class DioWitness:
    prime: int
    numerators: tuple[int, ...]
    margins: tuple[float, ...]  # (x - a/m) / bound per coordinate


@dataclass
class DioPoint:
    family: str
    degree: int
    exact: tuple[Fraction, ...]  # left endpoint of the innermost interval
    approx: TorusPoint = field(repr=False)
    witnesses: list[DioWitness] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.witnesses)


def next_admissible_prime(
    lower: int,
    d: int,
    require_coprime_order: bool = True,
    cap: int = PRIME_SEARCH_CAP,
) -> int:
    """Smallest prime p > lower, with gcd(d, p-1) = 1 when required."""
    if lower < 2:
        raise ContractError(f"lower must be >= 2, got {lower}")
    if d < 2:
        raise ContractError(f"d must be >= 2, got {d}")
    p = int(lower)
    while True:
        p = int(sympy.nextprime(p))
        if p > cap:
            raise PrimeSearchError(
                f"no admissible prime for d={d} below cap {cap} (from {lower})"
            )
        if not require_coprime_order or math.gcd(d, p - 1) == 1:
            return p


def _require(cond: bool, constraint: str):
    if not cond:
        raise ContractError(f"inadmissible parameters: {constraint}")


def _lambda_numerators(d: int, lam: int, p: int) -> tuple[int, ...]:
    return tuple((math.comb(d, j) * pow(lam, j, p)) % p for j in range(1, d + 1))


def enumerate_family(
    family: str,
    p: int,
    d: int = 2,
    sample_size: int | None = None,
    seed: int = 0,
) -> list[FamilyPoint]:
    """All members of the family at prime p (or a seeded uniform sample).

    Every non-degenerate returned point certifies vanishing over its span
    through one of the two exact mechanisms.
    """
    _require(sympy.isprime(p), f"p={p} is not prime")
    rng = random.Random(seed)
    if sample_size is None and p > FULL_ENUMERATION_LIMIT:
        raise ContractError(
            f"p={p} too large for full enumeration; pass sample_size"
        )

    if family == FAMILY_P:
        _require(p >= 3, f"P_p needs p >= 3, got {p}")
        coprime = [a for a in range(1, 4 * p + 1) if math.gcd(a, 2 * p) == 1]
        pairs = [(a, b) for a in coprime for b in coprime]
        if sample_size is not None:
            pairs = rng.sample(pairs, min(sample_size, len(pairs)))
        return [
            FamilyPoint(family, p, (a, b), RationalPoint((a, b), 4 * p), 4 * p)
            for a, b in pairs
        ]

    if family == FAMILY_Q:
        _require(p >= 3, f"Q_p needs p >= 3, got {p}")
        bs = [b for b in range(1, 2 * p + 1) if math.gcd(b, 2 * p) == 1]
        if sample_size is not None:
            bs = rng.sample(bs, min(sample_size, len(bs)))
        return [
            FamilyPoint(family, p, (b,), gauss_monomial_point(b, 2 * p, 2), 2 * p)
            for b in bs
        ]

    if family == FAMILY_R:
        _require(d >= 3, f"R_p needs degree d >= 3, got {d}")
        _require(math.gcd(d, p - 1) == 1, f"R_p needs gcd(d, p-1)=1; p={p}, d={d}")
        bs = list(range(1, p + 1))
        if sample_size is not None:
            bs = rng.sample(bs, min(sample_size, len(bs)))
        return [
            FamilyPoint(
                family, p, (b,), gauss_monomial_point(b, p, d), p,
                degenerate=(b == p),
            )
            for b in bs
        ]

    if family == FAMILY_LAMBDA:
        _require(d >= 3, f"lambda-binomial needs d >= 3, got {d}")
        _require(p > d, f"lambda-binomial needs p > d; p={p}, d={d}")
        _require(
            math.gcd(d, p - 1) == 1,
            f"lambda-binomial needs gcd(d, p-1)=1; p={p}, d={d}",
        )
        lams = list(range(1, p))
        if sample_size is not None:
            lams = rng.sample(lams, min(sample_size, len(lams)))
        return [
            FamilyPoint(
                family, p, (lam,),
                RationalPoint(_lambda_numerators(d, lam, p), p), p,
            )
            for lam in lams
        ]

    raise ContractError(f"unknown family {family!r}")


def find_lambda_point_in_box(
    d: int, p: int, box: tuple[tuple[float, float], ...]
) -> FamilyPoint | None:
    """First lambda whose scaled binomial vector mod 1 lies in the box.

    Returns None when no lambda in 1..p-1 works; success is only guaranteed
    for boxes that are large relative to p^(-1/2d) log p.
    """
    _require(sympy.isprime(p) and p > d, f"need prime p > d, got p={p}, d={d}")
    _require(math.gcd(d, p - 1) == 1, f"need gcd(d, p-1)=1; p={p}, d={d}")
    if len(box) != d:
        raise ContractError(f"box must have {d} intervals, got {len(box)}")
    for lo, hi in box:
        if not (0.0 <= lo < hi <= 1.0):
            raise ContractError(f"malformed box interval ({lo}, {hi})")
    for lam in range(1, p):
        nums = _lambda_numerators(d, lam, p)
        if all(lo <= a / p < hi for a, (lo, hi) in zip(nums, box)):
            return FamilyPoint(FAMILY_LAMBDA, p, (lam,), RationalPoint(nums, p), p)
    return None


# ---------------------------------------------------------------------------
# neighborhood radius estimation

def _family_span_and_bound(family: str, p: int, d: int) -> tuple[int, float, int]:
    """(span N, incomplete-sum bound K, effective degree) for a family."""
    if family == FAMILY_P:
        return 4 * p, math.sqrt(p) * math.log(p), 2
    if family == FAMILY_Q:
        return 2 * p, math.sqrt(p), 2
    if family in (FAMILY_R, FAMILY_LAMBDA):
        return p, math.sqrt(p) * math.log(p), d
    raise ContractError(f"unknown family {family!r}")


def estimate_delta(
    p: int,
    eta: float,
    family: str,
    sample_budget: int = 200,
    d: int = 3,
    seed: int = 0,
    c_fit: float = 6.0,
) -> float:
    """Radius delta such that |S(.; span)| <= eta across the delta-neighborhood.

    Starts from the analytic candidate eta * N^-d / (c_fit * K) given by the
    continuity estimate, then halves until sample_budget random perturbed
    points all satisfy the bound.  Returns 1.0 outright when eta exceeds the
    trivial bound N.
    """
    if eta <= 0:
        raise ContractError(f"eta must be > 0, got {eta}")
    span, bound_k, d_eff = _family_span_and_bound(family, p, d)
    if eta >= span:
        return 1.0
    anchors = enumerate_family(
        family, p, d=d,
        sample_size=min(8, max(1, sample_budget)),
        seed=seed,
    )
    anchors = [fp for fp in anchors if not fp.degenerate]
    rng = random.Random(seed ^ 0x5EED)
    delta = min(1.0, eta * span ** (-d_eff) / (c_fit * bound_k))
    while True:
        if delta < 1e-300:
            raise NumericError(f"delta underflow: eta={eta} unachievable at p={p}")
        ok = True
        for _ in range(sample_budget):
            anchor = rng.choice(anchors)
            coords = anchor.point.to_torus().coords
            y = TorusPoint(
                tuple(c + rng.uniform(-delta, delta) for c in coords)
            )
            if abs(eval_direct(y, span)) > eta:
                ok = False
                break
        if ok:
            return delta
        delta /= 2


# ---------------------------------------------------------------------------
# Diophantine nested-interval construction

# margin applied to every approximation bound: witnesses are verified
# against 0.99 * bound, so floating evaluation of log p cannot unsound them
MARGIN = Fraction(99, 100)

_SOUND_DENOM = 10**50


@dataclass(frozen=True)
class _DioConfig:
    denom_factor: int  # anchor denominator = factor * p
    dims: int
    exponents: tuple[Fraction, ...]  # bound ~ p^-e / (log p)^w per dim
    log_powers: tuple[int, ...]
    coprime_to_two_p: bool  # numerators coprime to 2p (else to p)
    needs_coprime_order: bool  # prime must satisfy gcd(d, p-1) = 1


def _dio_config(family: str, d: int) -> _DioConfig:
    if family == DIO_Q:
        return _DioConfig(2, 1, (Fraction(5, 2),), (1,), True, False)
    if family == DIO_P:
        return _DioConfig(4, 2, (Fraction(5, 2),) * 2, (2, 2), True, False)
    if family == DIO_R:
        _require(d >= 3, f"R* needs d >= 3, got {d}")
        return _DioConfig(
            1, 1, (Fraction(2 * d + 1, 2),), (2,), False, True
        )
    if family == DIO_RECT:
        return _DioConfig(
            4, 2, (Fraction(3, 2), Fraction(5, 2)), (2, 2), True, False
        )
    raise ContractError(f"unknown Diophantine family {family!r}")


def _sound_bound(p: int, exponent: Fraction, log_power: int) -> Fraction:
    """Rational lower bound for MARGIN / (p^exponent * (log p)^log_power)."""
    with mpmath.workdps(60):
        v = mpmath.mpf(MARGIN.numerator) / MARGIN.denominator
        v /= mpmath.power(p, mpmath.mpf(exponent.numerator) / exponent.denominator)
        v /= mpmath.log(p) ** log_power
        scaled = int(mpmath.floor(v * _SOUND_DENOM))
    if scaled <= 0:
        raise NumericError(f"approximation bound underflow at p={p}")
    return Fraction(scaled, _SOUND_DENOM)


def _pick_coprime(rng: random.Random, a_min: int, a_max: int, g: int) -> int | None:
    """Seeded choice of a in [a_min, a_max] with gcd(a, g) = 1."""
    if a_min > a_max:
        return None
    width = a_max - a_min + 1
    for _ in range(256):
        a = a_min + rng.randrange(width)
        if math.gcd(a, g) == 1:
            return a
    for a in range(a_min, min(a_max, a_min + 10**6) + 1):
        if math.gcd(a, g) == 1:
            return a
    return None


def build_dio_point(
    family: str,
    d: int,
    depth: int,
    seed: int = 0,
    prime_cap: int = DIO_PRIME_CAP,
) -> DioPoint:
    """Greedy nested-interval construction of a depth-k Diophantine point.

    Step i picks the smallest admissible prime (seeded choice among anchor
    fractions) whose padded anchor interval fits strictly inside the current
    one; all witness inequalities re-verify by exact rational comparison.
    """
    if depth < 1:
        raise ContractError(f"depth must be >= 1, got {depth}")
    cfg = _dio_config(family, d)
    rng = random.Random(seed)
    intervals = [(Fraction(0), Fraction(1))] * cfg.dims
    witnesses: list[DioWitness] = []
    p = 2
    for _ in range(depth):
        length = min(r - l for l, r in intervals)
        # spacing 1/(factor*p) must leave room for an interior anchor
        p_floor = int(3 / (cfg.denom_factor * length)) if length < 1 else 2
        p = max(p, p_floor)
        while True:
            p = next_admissible_prime(
                p, d if cfg.needs_coprime_order else 2,
                require_coprime_order=cfg.needs_coprime_order,
                cap=prime_cap,
            )
            denom = cfg.denom_factor * p
            g = 2 * p if cfg.coprime_to_two_p else p
            bounds = [
                _sound_bound(p, e, w)
                for e, w in zip(cfg.exponents, cfg.log_powers)
            ]
            nums = []
            new_intervals = []
            for (left, right), w in zip(intervals, bounds):
                a_min = left * denom
                a_min = int(a_min) + 1  # strictly right of the left endpoint
                upper = (right - w) * denom
                a_max = int(upper)
                if Fraction(a_max, 1) == upper:  # keep the nesting strict
                    a_max -= 1
                a = _pick_coprime(rng, a_min, a_max, g)
                if a is None:
                    break
                nums.append(a)
                new_intervals.append(
                    (Fraction(a, denom), Fraction(a, denom) + w)
                )
            else:
                intervals = new_intervals
                witnesses.append(DioWitness(p, tuple(nums), (0.0,) * cfg.dims))
                break
            # this prime admits no interior anchor; try the next one

    exact = tuple(left for left, _ in intervals)
    approx = _torus_from_fractions(family, d, cfg, exact)
    dio = DioPoint(family=family, degree=d, exact=exact, approx=approx,
                   witnesses=witnesses)
    # recompute true margins and re-verify before returning
    margins = verify_dio_point(dio, cfg)
    dio.witnesses = [
        DioWitness(wit.prime, wit.numerators, m)
        for wit, m in zip(witnesses, margins)
    ]
    return dio


def _torus_from_fractions(
    family: str, d: int, cfg: _DioConfig, exact: tuple[Fraction, ...]
) -> TorusPoint:
    """Embed the exact coordinates, double-double, per family shape."""
    if cfg.dims == 2:
        values = exact
    elif family == DIO_Q:
        values = (Fraction(0),) * 1 + exact  # degree-2 monomial: (0, x)
    else:  # R*: degree-d monomial
        values = (Fraction(0),) * (d - 1) + exact
    hi = tuple(float(v) for v in values)
    lo = tuple(float(v - Fraction(h)) for v, h in zip(values, hi))
    return TorusPoint(hi, lo)


def verify_dio_point(dio: DioPoint, cfg: _DioConfig | None = None) -> list[tuple[float, ...]]:
    """Exact re-verification of every witness inequality; returns margins.

    Checks 0 <= x - a/m < 0.99 * bound(p) per coordinate by rational
    comparison (the bound pre-rounded downward), and that witness intervals
    are strictly nested with strictly increasing primes.  Raises
    NumericError on any violation.
    """
    if cfg is None:
        cfg = _dio_config(dio.family, dio.degree)
    margins: list[tuple[float, ...]] = []
    prev_prime = 1
    prev = [(Fraction(0), Fraction(1))] * cfg.dims
    for wit in dio.witnesses:
        if wit.prime <= prev_prime:
            raise NumericError(f"witness primes not increasing at p={wit.prime}")
        prev_prime = wit.prime
        denom = cfg.denom_factor * wit.prime
        row = []
        cur = []
        for i, a in enumerate(wit.numerators):
            w = _sound_bound(wit.prime, cfg.exponents[i], cfg.log_powers[i])
            anchor = Fraction(a, denom)
            gap = dio.exact[i] - anchor
            if not (0 <= gap < w):
                raise NumericError(
                    f"witness inequality fails at p={wit.prime}, coord {i}"
                )
            left, right = prev[i]
            if not (left < anchor and anchor + w < right or prev[i] == (0, 1)):
                raise NumericError(
                    f"witness interval not nested at p={wit.prime}, coord {i}"
                )
            row.append(float(gap / w) * float(MARGIN))
            cur.append((anchor, anchor + w))
        prev = cur
        margins.append(tuple(row))
    return margins


# ---------------------------------------------------------------------------
# line-oriented serialization

def family_point_record(fp: FamilyPoint) -> str:
    flags = "degenerate" if fp.degenerate else "-"
    params = ",".join(str(v) for v in fp.params)
    return "\t".join(
        [fp.family, str(fp.prime), params, str(fp.point),
         str(fp.vanishing_span), flags]
    )


def parse_family_record(line: str) -> FamilyPoint:
    from .exactzero import parse_rational

    try:
        family, p, params, point, span, flags = line.rstrip("\n").split("\t")
        return FamilyPoint(
            family=family,
            prime=int(p),
            params=tuple(int(v) for v in params.split(",")),
            point=parse_rational(point),
            vanishing_span=int(span),
            degenerate=(flags == "degenerate"),
        )
    except ValueError as exc:
        raise ContractError(f"malformed family record {line!r}") from exc


def dio_point_record(dio: DioPoint) -> str:
    wits = ";".join(
        f"{w.prime}:{','.join(str(a) for a in w.numerators)}:{max(w.margins):.6g}"
        for w in dio.witnesses
    )
    coords = ",".join(f"{f.numerator}/{f.denominator}" for f in dio.exact)
    return "\t".join([dio.family, str(dio.degree), coords, wits])


def certify_family_point(fp: FamilyPoint):
    """Convenience: exact certificate for a family member (see exactzero)."""
    if fp.degenerate:
        raise ContractError(
            f"degenerate family point (b = p) does not vanish: {fp}"
        )
    return certify_zero(fp.point, fp.vanishing_span)
