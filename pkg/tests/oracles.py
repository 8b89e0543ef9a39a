"""Independent brute-force oracles.  Nothing here imports the code under test."""

from __future__ import annotations

import itertools
from fractions import Fraction


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_add(a, b):
    n = max(len(a), len(b))
    a = [Fraction(0)] * (n - len(a)) + list(a)
    b = [Fraction(0)] * (n - len(b)) + list(b)
    return [x + y for x, y in zip(a, b)]


def cofactor_det_poly(m):
    """Determinant of a matrix of polynomials (coefficient lists, highest degree first)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = [Fraction(0)]
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = poly_mul(m[0][j], cofactor_det_poly(minor))
        if j % 2:
            term = [-c for c in term]
        total = poly_add(total, term)
    return total


def charpoly_oracle(rows):
    """det(X I - A) by cofactor expansion along the first row."""
    n = len(rows)
    m = [[[Fraction(1), -Fraction(rows[i][j])] if i == j else [-Fraction(rows[i][j])]
          for j in range(n)] for i in range(n)]
    coeffs = cofactor_det_poly(m)
    while len(coeffs) > n + 1 and coeffs[0] == 0:
        coeffs = coeffs[1:]
    return tuple(coeffs)


def frac_mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def word_ball_oracle(gens, n):
    """Sizes of B(0..n) by multiplying out every word of length <= n (exponential cost)."""
    d = len(gens[0])
    eye = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    gens = [tuple(tuple(Fraction(x) for x in row) for row in g) for g in gens]
    seen = {eye}
    sizes = [1]
    for length in range(1, n + 1):
        for word in itertools.product(gens, repeat=length):
            m = eye
            for g in word:
                m = frac_mul(m, g)
            seen.add(m)
        sizes.append(len(seen))
    return sizes, seen


def sl_brute_force(m, p):
    """All m x m matrices over F_p with determinant 1, as row-major tuples."""
    def det(a):
        if len(a) == 1:
            return a[0][0]
        return sum((-1) ** j * a[0][j] * det([r[:j] + r[j + 1:] for r in a[1:]]) for j in range(len(a)))

    out = []
    for flat in itertools.product(range(p), repeat=m * m):
        rows = [list(flat[i * m:(i + 1) * m]) for i in range(m)]
        if det(rows) % p == 1 % p:
            out.append(flat)
    return out


def primes_trial(lo, hi):
    def isp(n):
        if n < 2:
            return False
        k = 2
        while k * k <= n:
            if n % k == 0:
                return False
            k += 1
        return True

    return [n for n in range(lo, hi + 1) if isp(n)]


def modp_mul(a, b, p, d):
    return tuple(sum(a[i * d + k] * b[k * d + j] for k in range(d)) % p for i in range(d) for j in range(d))


def bfs_distances(gens, p, d):
    """Word-length function on the group generated by gens (flat tuples), from the identity."""
    eye = tuple(int(i == j) for i in range(d) for j in range(d))
    dist = {eye: 0}
    frontier = [eye]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = modp_mul(x, g, p, d)
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return dist
