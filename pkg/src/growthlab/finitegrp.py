"""Matrix groups over F_p: reduction, BFS closure, product sets and value censuses.

Sets of d x d matrices over F_p are held as 1-D numpy arrays of packed keys,
sorted and deduplicated.  Each entry takes ``ceil(log2 p)`` bits; when all d^2
fields fit in 64 bits the keys are ``uint64``, otherwise they are Python ints
in an object array (same packing, no width limit).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from growthlab.cayley import BallLevels, GeneratorSet
from growthlab.exact_linalg import ExactMatrix, berkowitz

DEFAULT_GROUP_CAP = 10_000_000
DEFAULT_PRODUCT_CAP = 50_000_000


class InadmissiblePrimeError(ValueError):
    """The prime divides a denominator, so reduction mod p is undefined."""


class CapExceededError(RuntimeError):
    def __init__(self, msg: str, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class FiniteMatrix:
    p: int
    dim: int
    entries: tuple[int, ...]  # row-major residues in [0, p)

    def __post_init__(self):
        if not 2 <= self.p < 2**31:
            raise ValueError("p must be a prime below 2^31")
        if len(self.entries) != self.dim * self.dim or any(not 0 <= x < self.p for x in self.entries):
            raise ValueError("entries must be d*d reduced residues")

    @classmethod
    def from_rows(cls, rows, p: int) -> "FiniteMatrix":
        rows = [list(r) for r in rows]
        return cls(p, len(rows), tuple(int(x) % p for r in rows for x in r))

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.dim, self.dim)

    def __matmul__(self, other: "FiniteMatrix") -> "FiniteMatrix":
        return _from_array(_mul(self.array()[None], other.array(), self.p)[0], self.p)

    def det(self) -> int:
        return berkowitz(self.entries, self.dim)[-1] * (-1) ** self.dim % self.p

    def inverse(self) -> "FiniteMatrix":
        return _from_array(_inverse_mod(self.array(), self.p), self.p)


def _from_array(a: np.ndarray, p: int) -> FiniteMatrix:
    return FiniteMatrix(p, a.shape[0], tuple(int(x) for x in a.ravel()))


def _inverse_mod(a: np.ndarray, p: int) -> np.ndarray:
    d = a.shape[0]
    m = [[int(a[i, j]) % p for j in range(d)] + [int(i == j) for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col]), None)
        if piv is None:
            raise ValueError("matrix is singular mod p")
        m[col], m[piv] = m[piv], m[col]
        inv = pow(m[col][col], -1, p)
        m[col] = [x * inv % p for x in m[col]]
        for r in range(d):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[col])]
    return np.array([row[d:] for row in m], dtype=np.int64)


def reduce_mod_p(a: ExactMatrix, p: int) -> FiniteMatrix:
    if a.den % p == 0:
        raise InadmissiblePrimeError(f"denominator {a.den} is divisible by {p}")
    inv = pow(a.den, -1, p)
    return FiniteMatrix(p, a.dim, tuple(x * inv % p for x in a.num))


def slm_order(m: int, p: int) -> int:
    """|SL_m(F_p)| = p^(m(m-1)/2) * prod_{i=2..m} (p^i - 1)."""
    order = p ** (m * (m - 1) // 2)
    for i in range(2, m + 1):
        order *= p**i - 1
    return order


# -- packed keys -------------------------------------------------------------

def _bits(p: int) -> int:
    return max(1, (p - 1).bit_length())


def _narrow(p: int, d: int) -> bool:
    return d * d * _bits(p) <= 64


def pack(arr: np.ndarray, p: int) -> np.ndarray:
    """Pack an (N, d, d) array of residues into N keys."""
    n, d, _ = arr.shape
    b = _bits(p)
    flat = arr.reshape(n, d * d)
    if _narrow(p, d):
        keys = np.zeros(n, dtype=np.uint64)
        for i in range(d * d):
            keys = (keys << np.uint64(b)) | flat[:, i].astype(np.uint64)
        return keys
    out = np.empty(n, dtype=object)
    for r in range(n):
        k = 0
        for x in flat[r]:
            k = (k << b) | int(x)
        out[r] = k
    return out


def unpack(keys: np.ndarray, p: int, d: int) -> np.ndarray:
    b = _bits(p)
    n = len(keys)
    out = np.empty((n, d * d), dtype=np.int64)
    if keys.dtype == np.uint64:
        mask = np.uint64((1 << b) - 1)
        k = keys.copy()
        for i in range(d * d - 1, -1, -1):
            out[:, i] = (k & mask).astype(np.int64)
            k >>= np.uint64(b)
    else:
        mask = (1 << b) - 1
        for r, key in enumerate(keys):
            key = int(key)
            for i in range(d * d - 1, -1, -1):
                out[r, i] = key & mask
                key >>= b
    return out.reshape(n, d, d)


def _mul(x: np.ndarray, g: np.ndarray, p: int) -> np.ndarray:
    """Right-multiply each matrix of x (N, d, d) by g (d, d) mod p."""
    d = g.shape[0]
    acc = np.zeros_like(x)
    for k in range(d):
        acc = (acc + x[:, :, k, None] * g[None, k, :]) % p
    return acc


def _empty_keys(p: int, d: int) -> np.ndarray:
    return np.empty(0, dtype=np.uint64 if _narrow(p, d) else object)


@dataclass(frozen=True)
class FiniteSet:
    p: int
    dim: int
    keys: np.ndarray = field(repr=False)  # sorted, unique

    @property
    def size(self) -> int:
        return len(self.keys)

    def __len__(self):
        return len(self.keys)

    @classmethod
    def from_arrays(cls, arr: np.ndarray, p: int) -> "FiniteSet":
        return cls(p, arr.shape[1], np.unique(pack(arr % p, p)))

    @classmethod
    def from_matrices(cls, mats: Iterable[FiniteMatrix], p: int, dim: int) -> "FiniteSet":
        mats = list(mats)
        if not mats:
            return cls(p, dim, _empty_keys(p, dim))
        return cls.from_arrays(np.stack([m.array() for m in mats]), p)

    def arrays(self) -> np.ndarray:
        return unpack(self.keys, self.p, self.dim)

    def matrices(self) -> list[FiniteMatrix]:
        return [_from_array(a, self.p) for a in self.arrays()]

    def __contains__(self, m: FiniteMatrix) -> bool:
        k = pack(m.array()[None], self.p)[0]
        i = np.searchsorted(self.keys, k)
        return bool(i < len(self.keys) and self.keys[i] == k)

    def inverses(self) -> "FiniteSet":
        return FiniteSet.from_arrays(np.stack([_inverse_mod(a, self.p) for a in self.arrays()]), self.p)

    def union(self, other: "FiniteSet") -> "FiniteSet":
        return FiniteSet(self.p, self.dim, np.union1d(self.keys, other.keys))

    def with_identity(self) -> "FiniteSet":
        e = np.eye(self.dim, dtype=np.int64)[None]
        return FiniteSet(self.p, self.dim, np.union1d(self.keys, pack(e, self.p)))


@dataclass(frozen=True)
class Closure:
    """BFS closure of a generating set: the subgroup and its sphere structure."""

    group: FiniteSet
    ball_sizes: tuple[int, ...]  # |(S u S^-1 u {I})^n| for n = 0..diameter
    partial: bool = False

    @property
    def order(self) -> int:
        return self.group.size

    @property
    def diameter(self) -> int:
        return len(self.ball_sizes) - 1


def _symmetric_arrays(gens: Sequence[FiniteMatrix]) -> list[np.ndarray]:
    out: dict[tuple, np.ndarray] = {}
    for g in gens:
        for h in (g.array(), _inverse_mod(g.array(), g.p)):
            out.setdefault(tuple(h.ravel()), h)
    return list(out.values())


def closure(gens: Sequence[FiniteMatrix], cap: int = DEFAULT_GROUP_CAP) -> Closure:
    """Subgroup generated by ``gens`` via BFS from the identity over gens and their inverses.

    ``ball_sizes[n]`` is the number of elements of word length <= n, so the
    last index is the BFS depth at stabilization.  Exceeding ``cap`` raises
    CapExceededError carrying the partial Closure.
    """
    if not gens:
        raise ValueError("need at least one generator")
    p, d = gens[0].p, gens[0].dim
    for g in gens:
        if g.det() == 0:
            raise ValueError("generator not invertible mod p")
    sym = _symmetric_arrays(gens)
    frontier = np.eye(d, dtype=np.int64)[None]
    visited = pack(frontier, p)
    sizes = [1]
    while len(frontier):
        cand = np.unique(np.concatenate([pack(_mul(frontier, g, p), p) for g in sym]))
        new = cand[~np.isin(cand, visited, assume_unique=True)]
        if not len(new):
            break
        visited = np.union1d(visited, new)
        sizes.append(len(visited))
        if len(visited) > cap:
            part = Closure(FiniteSet(p, d, visited), tuple(sizes), partial=True)
            raise CapExceededError(f"closure exceeded cap {cap}", part)
        frontier = unpack(new, p, d)
    return Closure(FiniteSet(p, d, visited), tuple(sizes))


def reduce_gens(gens: GeneratorSet, p: int) -> list[FiniteMatrix]:
    if gens.denominator % p == 0:
        raise InadmissiblePrimeError(f"p = {p} divides the declared denominator {gens.denominator}")
    return [reduce_mod_p(g, p) for g in gens.gens]


def surjectivity_radius(gens: GeneratorSet, p: int, cap: int = DEFAULT_GROUP_CAP) -> tuple[int, Closure]:
    """Minimal n with pi_p(B(n)) equal to the closure of the reduced generators.

    Computed by BFS over reduced words, which visits exactly pi_p(B(n)) at
    depth n.  Returns the radius with the closure it reached.
    """
    cl = closure(reduce_gens(gens, p), cap)
    return cl.diameter, cl


def image_mod_p(mats: Sequence[ExactMatrix], p: int) -> FiniteSet:
    d = mats[0].dim
    arr = np.array([reduce_mod_p(m, p).entries for m in mats], dtype=np.int64).reshape(-1, d, d)
    return FiniteSet.from_arrays(arr, p)


def is_injective_mod_p(ball: BallLevels, k: int, p: int) -> bool:
    if ball.gens.denominator % p == 0:
        raise InadmissiblePrimeError(f"p = {p} divides the declared denominator {ball.gens.denominator}")
    level = ball.level(k)
    return image_mod_p(level, p).size == len(level)


def set_product(x: FiniteSet, y: FiniteSet, cap: int = DEFAULT_PRODUCT_CAP) -> FiniteSet:
    """{a b : a in x, b in y}, deduplicated."""
    if x.p != y.p or x.dim != y.dim:
        raise ValueError("sets live in different groups")
    if x.size * y.size > cap:
        raise CapExceededError(f"product expansion of {x.size} x {y.size} exceeds cap {cap}")
    p = x.p
    xa = x.arrays()
    acc = _empty_keys(p, x.dim)
    batch = []
    pending = 0
    for g in y.arrays():
        batch.append(pack(_mul(xa, g, p), p))
        pending += len(xa)
        if pending > 2_000_000:
            acc = np.union1d(acc, np.concatenate(batch))
            batch, pending = [], 0
    if batch:
        acc = np.union1d(acc, np.concatenate(batch))
    return FiniteSet(p, x.dim, acc)


def triple_product_size(a: FiniteSet, cap: int = DEFAULT_PRODUCT_CAP) -> int:
    if not a.size:
        raise ValueError("A must be nonempty")
    return set_product(set_product(a, a, cap), a, cap).size


def tripling_exponent(a: FiniteSet) -> float:
    """log|AAA| / log|A|; undefined (nan) for |A| = 1."""
    if a.size < 2:
        return float("nan")
    return float(np.log(triple_product_size(a)) / np.log(a.size))


def power_cover_exponent(a: FiniteSet, cap_d: int = 64, group_cap: int = DEFAULT_GROUP_CAP) -> int | None:
    """Minimal D with (A u A^-1 u {I})^D = <A>; None when D would exceed cap_d."""
    target = closure(a.matrices(), group_cap).order
    b = a.union(a.inverses()).with_identity()
    power, exp = b, 1
    while power.size < target:
        if exp >= cap_d:
            return None
        power = set_product(power, b)
        exp += 1
    return exp


# -- censuses ----------------------------------------------------------------

def _charpoly_rows(arr: np.ndarray, p: int) -> np.ndarray:
    """Charpoly coefficients (without the leading 1) of each matrix mod p."""
    n, d, _ = arr.shape
    tr = np.trace(arr, axis1=1, axis2=2) % p
    if d == 2:
        det = (arr[:, 0, 0] * arr[:, 1, 1] % p - arr[:, 0, 1] * arr[:, 1, 0] % p) % p
        return np.stack([(-tr) % p, det], axis=1)
    if d == 3:
        def m2(i, j):
            return (arr[:, i, i] * arr[:, j, j] % p - arr[:, i, j] * arr[:, j, i] % p) % p
        e2 = (m2(0, 1) + m2(0, 2) + m2(1, 2)) % p
        a = arr
        det = (
            a[:, 0, 0] * ((a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1]) % p) % p
            - a[:, 0, 1] * ((a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0]) % p) % p
            + a[:, 0, 2] * ((a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0]) % p) % p
        ) % p
        return np.stack([(-tr) % p, e2, (-det) % p], axis=1)
    rows = [[c % p for c in berkowitz([int(x) for x in m.ravel()], d)[1:]] for m in arr]
    return np.array(rows, dtype=np.int64)


@dataclass(frozen=True)
class Census:
    key: str
    counts: dict  # value -> number of elements attaining it

    @property
    def distinct(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def max_level(self) -> int:
        return max(self.counts.values())

    def rows(self) -> list[tuple[str, int]]:
        def fmt(v):
            return " ".join(map(str, v)) if isinstance(v, tuple) else str(v)
        return [(fmt(v), c) for v, c in sorted(self.counts.items())]


def value_census(s: FiniteSet, key: str = "trace") -> Census:
    """Level-set sizes of the trace (values in F_p) or charpoly (monic coefficient tuples)."""
    p = s.p
    counts: Counter = Counter()
    step = 1_000_000
    for lo in range(0, s.size, step):
        arr = unpack(s.keys[lo:lo + step], p, s.dim)
        if key == "trace":
            vals, cnt = np.unique(np.trace(arr, axis1=1, axis2=2) % p, return_counts=True)
            counts.update({int(v): int(c) for v, c in zip(vals, cnt)})
        elif key == "charpoly":
            vals, cnt = np.unique(_charpoly_rows(arr, p), axis=0, return_counts=True)
            counts.update({(1, *map(int, v)): int(c) for v, c in zip(vals, cnt)})
        else:
            raise ValueError(f"unknown census key {key!r}")
    return Census(key, dict(counts))
