"""Word balls in finitely generated matrix groups, by level-synchronous BFS."""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import islice
from math import gcd
from typing import Iterator, Sequence

from growthlab.exact_linalg import (
    DimensionMismatchError,
    ExactMatrix,
    SingularMatrixError,
    canonical_key,
    determinant,
    identity,
    mat_inverse,
    mat_mul,
)

DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class GeneratorSet:
    dim: int
    gens: tuple[ExactMatrix, ...]
    symmetric: bool = False
    labels: tuple[str, ...] | None = None
    denominator: int = 1

    def __post_init__(self):
        for i, g in enumerate(self.gens):
            if g.dim != self.dim:
                raise DimensionMismatchError(f"generator {i} has dim {g.dim}, expected {self.dim}")
        if self.labels is not None and len(self.labels) != len(self.gens):
            raise ValueError("labels and gens differ in length")

    @classmethod
    def of(cls, *gens: ExactMatrix, labels: Sequence[str] | None = None) -> "GeneratorSet":
        den = 1
        for g in gens:
            den = den * g.den // gcd(den, g.den)
        return cls(gens[0].dim, tuple(gens), labels=tuple(labels) if labels else None, denominator=den)

    def digest(self) -> str:
        """Order-independent content hash of the generator matrices (16 hex chars)."""
        h = hashlib.sha256(self.dim.to_bytes(4, "big"))
        for k in sorted(canonical_key(g) for g in self.gens):
            h.update(len(k).to_bytes(8, "big"))
            h.update(k)
        return h.hexdigest()[:16]


def symmetrize(gens: GeneratorSet) -> GeneratorSet:
    """Return gens together with their inverses, exact duplicates removed, order kept."""
    seen: dict[ExactMatrix, str] = {}
    labels = gens.labels or tuple(f"g{i}" for i in range(len(gens.gens)))
    for i, g in enumerate(gens.gens):
        if determinant(g) == 0:
            raise SingularMatrixError(f"singular generator at index {i}")
        seen.setdefault(g, labels[i])
    for i, g in enumerate(gens.gens):
        seen.setdefault(mat_inverse(g), labels[i] + "^-1")
    return replace(gens, gens=tuple(seen), labels=tuple(seen.values()), symmetric=True)


@dataclass
class BallLevels:
    """Nested balls B(0) <= B(1) <= ... stored once, in discovery order.

    ``elements`` lists every distinct element, ordered by radius of first
    appearance; ``counts[n]`` is |B(n)|, so ``levels(n)`` is a prefix.
    """

    gens: GeneratorSet
    elements: list[ExactMatrix]
    counts: list[int]
    keys: dict[bytes, int] = field(repr=False)
    partial: bool = False
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def radius(self) -> int:
        return len(self.counts) - 1

    def level(self, n: int) -> list[ExactMatrix]:
        if not 0 <= n <= self.radius:
            raise IndexError(f"radius {n} not enumerated (max {self.radius})")
        return self.elements[: self.counts[n]]

    def sphere(self, n: int) -> list[ExactMatrix]:
        lo = self.counts[n - 1] if n > 0 else 0
        return self.elements[lo: self.counts[n]]

    @property
    def frontier(self) -> list[ExactMatrix]:
        return self.sphere(self.radius)

    def __contains__(self, g: ExactMatrix) -> bool:
        return canonical_key(g) in self.keys

    def radius_of(self, g: ExactMatrix) -> int | None:
        idx = self.keys.get(canonical_key(g))
        if idx is None:
            return None
        return next(n for n, c in enumerate(self.counts) if idx < c)

    def level_keys(self, n: int) -> Iterator[bytes]:
        return islice(self.keys, self.counts[n])


def _expand(chunk: list[ExactMatrix], gens: tuple[ExactMatrix, ...]) -> list[tuple[bytes, ExactMatrix]]:
    out = []
    for x in chunk:
        for s in gens:
            y = mat_mul(x, s)
            out.append((canonical_key(y), y))
    return out


def enumerate_ball(
    gens: GeneratorSet,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> BallLevels:
    """Enumerate B(0..n_max) exhaustively.

    If the element count would exceed ``budget`` the levels completed so far
    are returned with ``partial=True``; a level is never half-recorded.
    Results do not depend on ``workers``: products are merged in frontier
    order, generator order.
    """
    if n_max < 0 or budget < 1:
        raise ValueError("n_max must be >= 0 and budget >= 1")
    if not gens.symmetric:
        raise ValueError("generator set must be symmetrized first")
    e = identity(gens.dim)
    elements = [e]
    keys = {canonical_key(e): 0}
    counts = [1]
    ball = BallLevels(gens, elements, counts, keys)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for _ in range(n_max):
            frontier = ball.frontier
            if pool is not None and len(frontier) > 4 * workers:
                size = -(-len(frontier) // workers)
                chunks = [frontier[i:i + size] for i in range(0, len(frontier), size)]
                results = pool.map(_expand, chunks, [gens.gens] * len(chunks))
            else:
                results = [_expand(frontier, gens.gens)]
            new: dict[bytes, ExactMatrix] = {}
            for res in results:
                for k, y in res:
                    if k not in keys and k not in new:
                        new[k] = y
            if len(elements) + len(new) > budget:
                ball.partial = True
                break
            for k, y in new.items():
                keys[k] = len(elements)
                elements.append(y)
            counts.append(len(elements))
    finally:
        if pool is not None:
            pool.shutdown()
    return ball
