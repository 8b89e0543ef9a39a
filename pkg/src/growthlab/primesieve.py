"""Rational primes: segmented sieving, prime counting, kappa counts and injective primes."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from math import gcd, isqrt, log

import numpy as np

from growthlab.cayley import BallLevels
from growthlab.exact_linalg import ExactMatrix, identity

MAX_HI = 2**40
MAX_SPAN = 2_000_000_000
SEGMENT = 1 << 22
TRIAL_BOUND = 1 << 20
DEFAULT_SAMPLE_CAP = 2000


class FactorizationIncomplete(ArithmeticError):
    """A cofactor left after trial division could not be resolved."""


class NoCleanPrimeError(LookupError):
    def __init__(self, window: "PrimeWindow", bad_primes: list[tuple[int, int]]):
        super().__init__(
            f"every prime in [{window.lo}, {window.hi}] divides some pair gcd; window too low"
        )
        self.window = window
        self.bad_primes = bad_primes


@lru_cache(maxsize=8)
def _small_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.flatnonzero(sieve)


def _segments(lo: int, hi: int):
    base = _small_primes(max(2, isqrt(hi)))
    for start in range(lo, hi + 1, SEGMENT):
        stop = min(hi, start + SEGMENT - 1)
        seg = np.ones(stop - start + 1, dtype=bool)
        for q in base:
            q = int(q)
            if q * q > stop:
                break
            first = max(q * q, -(-start // q) * q)
            seg[first - start::q] = False
        if start < 2:
            seg[: 2 - start] = False
        yield start, seg


@dataclass(frozen=True)
class PrimeWindow:
    lo: int
    hi: int
    primes: tuple[int, ...]

    def __len__(self):
        return len(self.primes)


def primes_in(lo: int, hi: int, max_span: int = MAX_SPAN) -> PrimeWindow:
    if not 2 <= lo or hi > MAX_HI:
        raise ValueError(f"need 2 <= lo <= hi <= 2^40, got [{lo}, {hi}]")
    if hi < lo:
        return PrimeWindow(lo, hi, ())
    if hi - lo + 1 > max_span:
        raise MemoryError(f"window of {hi - lo + 1} integers exceeds the configured span {max_span}")
    out = []
    for start, seg in _segments(lo, hi):
        out.extend((np.flatnonzero(seg) + start).tolist())
    return PrimeWindow(lo, hi, tuple(out))


def prime_count(x: int) -> tuple[int, float]:
    """pi(x) by segmented sieve, and the Chebyshev ratio pi(x) ln(x) / x."""
    if x < 2:
        raise ValueError("x must be >= 2")
    if x > MAX_HI:
        raise ValueError("x exceeds 2^40")
    n = sum(int(np.count_nonzero(seg)) for _, seg in _segments(2, x))
    return n, n * log(x) / x


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981  # bases above are deterministic below this


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin below 3.3e24; larger inputs raise."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= _MR_LIMIT:
        raise FactorizationIncomplete(f"primality of {n} outside the deterministic range")
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


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of |n| > 0, trial division to 2^20 then a primality test."""
    n = abs(n)
    if n == 0:
        raise ValueError("0 has no finite factorization")
    out = []
    for q in _small_primes(TRIAL_BOUND):
        q = int(q)
        if q * q > n:
            break
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
    if n > 1:
        if n >= TRIAL_BOUND * TRIAL_BOUND and not is_prime(n):
            raise FactorizationIncomplete(f"composite cofactor {n} has no factor below {TRIAL_BOUND}")
        out.append(n)
    return out


def content(a: ExactMatrix) -> int:
    """gcd of the numerators of a (over its common denominator)."""
    return reduce(gcd, a.num, 0)


def kappa(gamma: ExactMatrix, threshold: int, excluded: int = 1) -> int:
    """Number of primes p >= threshold with gamma = I mod p.

    Primes dividing ``excluded`` (the declared denominator s) are never counted.
    """
    if threshold < 2:
        raise ValueError("threshold must be >= 2")
    diff = gamma - identity(gamma.dim)
    g = content(diff)
    if g == 0:
        raise ValueError("kappa is undefined for the identity")
    return sum(1 for q in prime_factors(g) if q >= threshold and excluded % q and diff.den % q)


def kappa_bound(gamma: ExactMatrix, threshold: int) -> int:
    """floor(log sup|gamma - I| / log threshold), computed without floating point."""
    diff = gamma - identity(gamma.dim)
    bound = max(abs(x) for x in diff.num)
    k, power = 0, threshold
    while power <= bound:
        k += 1
        power *= threshold
    return k


def pair_content(g: ExactMatrix, h: ExactMatrix) -> int:
    """Content of g - h.

    For a prime p not dividing either denominator, p divides this number iff
    g = h mod p, i.e. iff p divides every entry of g h^-1 - I.
    """
    return reduce(gcd, (a * h.den - b * g.den for a, b in zip(g.num, h.num)), 0)


@dataclass
class InjectivePrimeCertificate:
    prime: int
    radius: int
    checked_pairs: int
    examined: int
    sampled: bool
    seed: int | None
    bad_primes_seen: list[tuple[int, int]] = field(default_factory=list)
    window_lo: int = 0
    window_hi: int = 0
    window_primes: int = 0
    window_bad: int = 0

    @property
    def good_fraction(self) -> float:
        if not self.window_primes:
            return 0.0
        return 1 - self.window_bad / self.window_primes

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "prime": self.prime,
            "radius": self.radius,
            "checked_pairs": self.checked_pairs,
            "examined": self.examined,
            "sampled": self.sampled,
            "seed": self.seed,
            "bad_primes_seen": [{"prime": q, "pair_gcd": g} for q, g in self.bad_primes_seen],
            "window": {"lo": self.window_lo, "hi": self.window_hi,
                       "primes": self.window_primes, "bad": self.window_bad},
            "good_prime_fraction": self.good_fraction,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "InjectivePrimeCertificate":
        w = obj["window"]
        return cls(
            obj["prime"], obj["radius"], obj["checked_pairs"], obj["examined"], obj["sampled"],
            obj["seed"], [(b["prime"], b["pair_gcd"]) for b in obj["bad_primes_seen"]],
            w["lo"], w["hi"], w["primes"], w["bad"],
        )


def examined_subset(ball: BallLevels, k: int, sample_cap: int, seed: int) -> tuple[list[ExactMatrix], bool]:
    level = ball.level(k)
    if len(level) <= sample_cap:
        return level, False
    idx = sorted(random.Random(seed).sample(range(len(level)), sample_cap))
    return [level[i] for i in idx], True


def find_injective_prime(
    ball: BallLevels,
    k: int,
    window: PrimeWindow,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
) -> InjectivePrimeCertificate:
    """Smallest window prime on which reduction is injective over (a sample of) B(k).

    A window prime is bad when it divides the content of g - h for some pair
    of distinct examined elements.  Primes dividing the declared denominator
    are excluded up front and recorded as bad with pair gcd 0.
    """
    if not window.primes:
        raise ValueError("empty prime window")
    subset, sampled = examined_subset(ball, k, sample_cap, seed)
    s = ball.gens.denominator
    contents: set[int] = set()
    pairs = 0
    for i, g in enumerate(subset):
        for h in subset[i + 1:]:
            contents.add(pair_content(g, h))
            pairs += 1
    contents.discard(1)
    witness: dict[int, int] = {}
    for q in window.primes:
        if s % q == 0:
            witness[q] = 0
    for c in sorted(contents):
        for q in window.primes:
            if q > c:
                break
            if c % q == 0 and q not in witness:
                witness[q] = c
    cert = InjectivePrimeCertificate(
        prime=0, radius=k, checked_pairs=pairs, examined=len(subset), sampled=sampled,
        seed=seed if sampled else None, window_lo=window.lo, window_hi=window.hi,
        window_primes=len(window.primes), window_bad=len(witness),
    )
    for q in window.primes:
        if q not in witness:
            cert.prime = q
            cert.bad_primes_seen = [(b, witness[b]) for b in window.primes if b < q and b in witness]
            return cert
    raise NoCleanPrimeError(window, [(b, witness[b]) for b in window.primes])


def replay_certificate(ball: BallLevels, cert: InjectivePrimeCertificate) -> bool:
    """Recheck a certificate by reducing the examined subset mod p and counting images."""
    from growthlab.finitegrp import image_mod_p

    subset, _ = examined_subset(ball, cert.radius, max(cert.examined, 1), cert.seed or 0)
    if len(subset) != cert.examined:
        return False
    if ball.gens.denominator % cert.prime == 0:
        return False
    if image_mod_p(subset, cert.prime).size != len(subset):
        return False
    return all(c % q == 0 for q, c in cert.bad_primes_seen if c)
