"""Exact rational matrices over Q.

An :class:`ExactMatrix` is stored as an integer numerator matrix together with
one positive common denominator, normalized so that the gcd of the denominator
and all numerators is 1.  Every entry is then recoverable in lowest terms, and
two equal matrices always have identical internal representations.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

__all__ = [
    "ExactMatrix",
    "SingularMatrixError",
    "DimensionMismatchError",
    "identity",
    "mat_mul",
    "mat_inverse",
    "charpoly",
    "trace",
    "determinant",
    "sup_norm",
    "canonical_key",
    "berkowitz",
]


class SingularMatrixError(ValueError):
    """Raised when an inverse is requested for a matrix with zero determinant."""


class DimensionMismatchError(ValueError):
    pass


class ExactMatrix:
    """Immutable d x d matrix with exact rational entries.

    ``num`` is the row-major tuple of integer numerators, ``den`` the common
    positive denominator.
    """

    __slots__ = ("dim", "num", "den", "_hash")

    def __init__(self, dim: int, num: Sequence[int], den: int = 1, *, _normalized: bool = False):
        if not _normalized:
            if dim < 1 or len(num) != dim * dim:
                raise ValueError(f"expected {dim * dim} entries for dim {dim}, got {len(num)}")
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            num = tuple(int(x) for x in num)
            den = int(den)
            if den < 0:
                num = tuple(-x for x in num)
                den = -den
            g = reduce(gcd, num, den)
            if g != 1:
                num = tuple(x // g for x in num)
                den //= g
        self.dim = dim
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "ExactMatrix":
        """Build from nested rows of ints, Fractions or numeric strings like ``"1/2"``."""
        rows = [[Fraction(x) for x in row] for row in rows]
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise DimensionMismatchError("matrix rows must form a nonempty square")
        den = 1
        for r in rows:
            for x in r:
                den = den * x.denominator // gcd(den, x.denominator)
        num = [int(x * den) for r in rows for x in r]
        return cls(d, num, den)

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(self.num[i * self.dim + j], self.den)

    def rows(self) -> list[list[Fraction]]:
        d = self.dim
        return [[self.entry(i, j) for j in range(d)] for i in range(d)]

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.dim == other.dim and self.den == other.den and self.num == other.num

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.den, self.num))
        return self._hash

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return mat_mul(self, other)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.dim, tuple(-x for x in self.num), self.den, _normalized=True)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        _check_dims(self, other)
        num = [a * other.den - b * self.den for a, b in zip(self.num, other.num)]
        return ExactMatrix(self.dim, num, self.den * other.den)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        _check_dims(self, other)
        num = [a * other.den + b * self.den for a, b in zip(self.num, other.num)]
        return ExactMatrix(self.dim, num, self.den * other.den)

    def __repr__(self):
        body = ", ".join(
            "[" + ", ".join(str(x) for x in row) + "]" for row in self.rows()
        )
        return f"ExactMatrix([{body}])"


def _check_dims(a: ExactMatrix, b: ExactMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(dim: int) -> ExactMatrix:
    return ExactMatrix(dim, [int(i == j) for i in range(dim) for j in range(dim)])


def mat_mul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    _check_dims(a, b)
    d = a.dim
    an, bn = a.num, b.num
    if d == 2:
        a0, a1, a2, a3 = an
        b0, b1, b2, b3 = bn
        num = (a0 * b0 + a1 * b2, a0 * b1 + a1 * b3, a2 * b0 + a3 * b2, a2 * b1 + a3 * b3)
    else:
        num = tuple(
            sum(an[i * d + k] * bn[k * d + j] for k in range(d))
            for i in range(d)
            for j in range(d)
        )
    den = a.den * b.den
    if den == 1:
        return ExactMatrix(d, num, 1, _normalized=True)
    return ExactMatrix(d, num, den)


def _bareiss_det(num: Sequence[int], d: int) -> int:
    m = [list(num[i * d:(i + 1) * d]) for i in range(d)]
    sign, prev = 1, 1
    for k in range(d - 1):
        if m[k][k] == 0:
            for r in range(k + 1, d):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[d - 1][d - 1]


def determinant(a: ExactMatrix) -> Fraction:
    return Fraction(_bareiss_det(a.num, a.dim), a.den ** a.dim)


def mat_inverse(a: ExactMatrix) -> ExactMatrix:
    """Exact inverse by Gauss-Jordan elimination over Q.

    Raises SingularMatrixError for a zero determinant.
    """
    d = a.dim
    m = [[Fraction(a.num[i * d + j]) for j in range(d)] + [Fraction(int(i == j)) for j in range(d)]
         for i in range(d)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(d):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    # inverse of num/den is den * inverse(num)
    return ExactMatrix.from_rows([[x * a.den for x in row[d:]] for row in m])


def berkowitz(num: Sequence[int], d: int) -> list[int]:
    """Characteristic polynomial coefficients of an integer matrix, division free.

    Returns ``[1, c1, ..., cd]`` with det(X I - M) = X^d + c1 X^(d-1) + ... + cd.
    Works over any commutative ring, so callers may reduce the result mod p.
    """
    m = [list(num[i * d:(i + 1) * d]) for i in range(d)]
    # vect holds the charpoly of the leading r x r block, highest degree first
    vect = [1, -m[0][0]]
    for r in range(1, d):
        R = m[r][:r]                       # row r, columns < r
        C = [m[i][r] for i in range(r)]    # column r, rows < r
        A = [row[:r] for row in m[:r]]
        a = m[r][r]
        # Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        col = [1, -a]
        v = C
        for _ in range(r):
            col.append(-sum(x * y for x, y in zip(R, v)))
            v = [sum(A[i][j] * v[j] for j in range(r)) for i in range(r)]
        new = []
        for i in range(r + 2):
            s = 0
            for j in range(max(0, i - len(col) + 1), min(i, len(vect) - 1) + 1):
                s += col[i - j] * vect[j]
            new.append(s)
        vect = new
    return vect


def charpoly(a: ExactMatrix) -> tuple[Fraction, ...]:
    """Coefficients of det(X I - a), monic, ordered from X^d down to X^0."""
    coeffs = berkowitz(a.num, a.dim)
    den = a.den
    return tuple(Fraction(c, den ** k) for k, c in enumerate(coeffs))


def trace(a: ExactMatrix) -> Fraction:
    d = a.dim
    return Fraction(sum(a.num[i * d + i] for i in range(d)), a.den)


def sup_norm(a: ExactMatrix) -> Fraction:
    return Fraction(max(abs(x) for x in a.num), a.den)


def _encode_int(x: int) -> bytes:
    mag = abs(x)
    body = mag.to_bytes((mag.bit_length() + 7) // 8, "big")
    return (b"-" if x < 0 else b"+") + len(body).to_bytes(4, "big") + body


def canonical_key(a: ExactMatrix) -> bytes:
    """Deterministic byte encoding: dim, then per entry (numerator, denominator) in lowest terms.

    Integers are written sign byte, 4-byte big-endian length, big-endian magnitude.
    """
    parts = [a.dim.to_bytes(4, "big")]
    den = a.den
    for x in a.num:
        if den == 1:
            n, q = x, 1
        else:
            g = gcd(x, den)
            n, q = x // g, den // g
        parts.append(_encode_int(n))
        parts.append(_encode_int(q))
    return b"".join(parts)
