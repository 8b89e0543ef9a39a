"""Growth series over word balls, rate fits and a finite-radius growth classifier."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Literal

import numpy as np

from growthlab.cayley import BallLevels
from growthlab.exact_linalg import berkowitz

Kind = Literal["element", "trace", "charpoly"]
KINDS = ("element", "trace", "charpoly")

# classifier thresholds
BOUNDED_RUN = 4
MIN_LEVELS = 8
WIN_RATIO = 0.7
FALLBACK_GROWTH = 1.5


class TooFewLevelsError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthSeries:
    kind: str
    counts: tuple[int, ...]
    gens_digest: str = ""
    start: int = 0  # radius of counts[0]

    def __post_init__(self):
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be nondecreasing")
        if self.start == 0 and self.counts and self.counts[0] != 1:
            raise ValueError("a series starting at radius 0 must have counts[0] = 1")

    @property
    def radii(self) -> range:
        return range(self.start, self.start + len(self.counts))

    def at(self, n: int) -> int:
        return self.counts[n - self.start]

    def drop(self, k: int) -> "GrowthSeries":
        """The same series without its first k levels (radii are kept)."""
        return GrowthSeries(self.kind, self.counts[k:], self.gens_digest, self.start + k)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "count", "kind", "gens_digest"])
        for n, c in zip(self.radii, self.counts):
            w.writerow([n, c, self.kind, self.gens_digest])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GrowthSeries":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty series")
        return cls(rows[0]["kind"], tuple(int(r["count"]) for r in rows),
                   rows[0]["gens_digest"], int(rows[0]["radius"]))


@dataclass(frozen=True)
class RateEstimate:
    slope: float
    window: tuple[int, int]
    residual: float


@dataclass(frozen=True)
class GrowthClass:
    label: str  # bounded | polynomial | exponential
    degree_estimate: float | None = None
    rate_estimate: RateEstimate | None = None


def _trace_key(g) -> tuple[int, int]:
    d = g.dim
    t = sum(g.num[i * d + i] for i in range(d))
    if g.den == 1:
        return t, 1
    q = gcd(t, g.den)
    return t // q, g.den // q


def _charpoly_key(g) -> tuple[int, ...]:
    """Charpoly coefficients as integers over one reduced common denominator (last item)."""
    d, den = g.dim, g.den
    if d == 2:
        a, b, c, e = g.num
        coeffs = [1, -(a + e), a * e - b * c]
    else:
        coeffs = berkowitz(g.num, d)
    if den == 1:
        return (*coeffs, 1)
    scaled = [c * den ** (d - k) for k, c in enumerate(coeffs)]
    lead = den**d
    q = reduce(gcd, scaled, lead)
    return (*(v // q for v in scaled), lead // q)


_KEYS = {"trace": _trace_key, "charpoly": _charpoly_key}


def count_series(ball: BallLevels, kind: Kind) -> GrowthSeries:
    """Distinct elements, traces or characteristic polynomials in B(n) for each n."""
    digest = ball.gens.digest()
    if kind == "element":
        return GrowthSeries(kind, tuple(ball.counts), digest)
    if kind not in _KEYS:
        raise ValueError(f"unknown series kind {kind!r}")
    cached = ball.cache.get(kind)
    if cached is not None and len(cached.counts) == ball.radius + 1:
        return cached
    key = _KEYS[kind]
    seen: set = set()
    counts = []
    for n in range(ball.radius + 1):
        seen.update(map(key, ball.sphere(n)))
        counts.append(len(seen))
    series = GrowthSeries(kind, tuple(counts), digest)
    ball.cache[kind] = series
    return series


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and RMS residual of y against x."""
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))


def estimate_rate(series: GrowthSeries, window: tuple[int, int]) -> RateEstimate:
    """Slope of log count against radius over the inclusive window (nats per radius)."""
    lo, hi = window
    if lo < series.start or hi > series.radii[-1] or hi - lo + 1 < 3:
        raise ValueError(f"window {window} invalid for radii {series.radii[0]}..{series.radii[-1]}")
    n = np.arange(lo, hi + 1, dtype=float)
    y = np.log([series.at(int(r)) for r in range(lo, hi + 1)])
    slope, resid = _fit(n, y)
    return RateEstimate(slope, (lo, hi), resid)


def classify_growth(series: GrowthSeries) -> GrowthClass:
    """Label a series bounded, polynomial or exponential from its tail.

    Bounded: last four counts equal.  Otherwise fit log c against n and against
    log n on the tail half; the smaller residual wins if it is below 0.7 times
    the other, else the series is exponential iff c(n) / c(n - 3) >= 1.5 at the
    last radius.
    """
    c = series.counts
    if len(c) < MIN_LEVELS:
        raise TooFewLevelsError(f"need at least {MIN_LEVELS} levels, got {len(c)}")
    if len(set(c[-BOUNDED_RUN:])) == 1:
        return GrowthClass("bounded", degree_estimate=0.0)
    radii = list(series.radii)
    half = max(3, len(c) // 2)
    tail = [r for r in radii[-half:] if r > 0]
    n = np.array(tail, dtype=float)
    y = np.log([series.at(r) for r in tail])
    rate, exp_res = _fit(n, y)
    degree, poly_res = _fit(np.log(n), y)
    rate_est = RateEstimate(rate, (tail[0], tail[-1]), exp_res)
    if exp_res < WIN_RATIO * poly_res:
        exponential = True
    elif poly_res < WIN_RATIO * exp_res:
        exponential = False
    else:
        exponential = c[-1] / c[-4] >= FALLBACK_GROWTH
    if exponential:
        return GrowthClass("exponential", rate_estimate=rate_est)
    return GrowthClass("polynomial", degree_estimate=degree)
