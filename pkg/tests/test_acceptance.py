"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines are repeated in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import functools
import json
import math
import random
import sys
import tempfile
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from growthlab.cayley import GeneratorSet, enumerate_ball, symmetrize  # noqa: E402
from growthlab.exact_linalg import ExactMatrix, charpoly, identity, sup_norm  # noqa: E402
from growthlab.finitegrp import (  # noqa: E402
    FiniteMatrix,
    FiniteSet,
    closure,
    image_mod_p,
    is_injective_mod_p,
    reduce_mod_p,
    triple_product_size,
    value_census,
)
from growthlab.growth import classify_growth, count_series, estimate_rate  # noqa: E402
from growthlab.harness.pipeline import ExperimentManifest, run_pipeline, strip_timings  # noqa: E402
from growthlab.primesieve import (  # noqa: E402
    find_injective_prime,
    kappa,
    prime_count,
    primes_in,
    replay_certificate,
)
from oracles import charpoly_oracle, primes_trial  # noqa: E402

RESULTS: list[str] = []
PRIMES = (3, 5, 7, 11, 13)

S = ExactMatrix.from_rows([[0, -1], [1, 0]])
T = ExactMatrix.from_rows([[1, 1], [0, 1]])
D = ExactMatrix(2, [4, 0, 0, 1], 2)  # diag(2, 1/2)
ST = symmetrize(GeneratorSet.of(S, T, labels=["S", "T"]))


def criterion(number: int, title: str, limit: float | None = None):
    """Time the body, enforce the wall-clock limit and record one result line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            detail, ok = "", False
            try:
                detail = fn(*args, **kwargs) or ""
                elapsed = time.perf_counter() - t0
                ok = limit is None or elapsed < limit
                if not ok:
                    detail = f"took {elapsed:.1f}s, limit {limit:.0f}s"
            except AssertionError as exc:
                detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
                raise
            finally:
                elapsed = time.perf_counter() - t0
                line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title} ({elapsed:.2f}s)"
                if detail:
                    line += f": {detail}"
                RESULTS.append(line)
                print(line)
            assert ok, detail

        return run

    return wrap


def _sl2_order(p):
    return p * (p * p - 1)


@criterion(1, "charpoly matches cofactor expansion on 1000 random matrices", 10)
def test_c01_exactness():
    rng = random.Random(1)
    for i in range(1000):
        d = (2, 3, 4)[i % 3]
        rows = [[rng.randint(-9, 9) for _ in range(d)] for _ in range(d)]
        got = charpoly(ExactMatrix.from_rows(rows))
        assert tuple(got) == tuple(charpoly_oracle(rows)), f"mismatch on {rows}"
    return "1000/1000 agree"


@criterion(2, "closure of {S,T} mod p has order p(p^2-1)", 30)
def test_c02_group_orders():
    orders = {}
    for p in PRIMES:
        orders[p] = closure([reduce_mod_p(S, p), reduce_mod_p(T, p)]).order
        assert orders[p] == _sl2_order(p), f"p={p}: {orders[p]}"
    return ", ".join(f"{p}:{o}" for p, o in orders.items())


def _sl2(p):
    return closure([reduce_mod_p(S, p), reduce_mod_p(T, p)]).group


@criterion(3, "SL2(F_p) realizes exactly p traces")
def test_c03_trace_surjectivity():
    for p in PRIMES:
        n = value_census(_sl2(p), "trace").distinct
        assert n == p, f"p={p}: {n} traces"
    return "p traces for every p"


@criterion(4, "trace level sets <= 2p^2 and |SL2(F_p)| >= p^3/2")
def test_c04_level_sets():
    worst = []
    for p in PRIMES:
        g = _sl2(p)
        level = value_census(g, "trace").max_level
        assert level <= 2 * p * p, f"p={p}: level {level}"
        assert 2 * g.size >= p**3, f"p={p}: order {g.size}"
        worst.append(f"{p}:{level}")
    return "max levels " + ", ".join(worst)


def _floor_log(n: int, base: int) -> int:
    k, power = 0, base
    while power <= n:
        k, power = k + 1, power * base
    return k


@criterion(5, "kappa(g, T) <= floor(log |g - I| / log T) on B(6)", 60)
def test_c05_kappa_bound():
    ball = enumerate_ball(ST, 6)
    e = identity(2)
    checked = 0
    for g in ball.level(6):
        if g == e:
            continue
        norm = int(sup_norm(g - e))
        for thr in (10, 100):
            k = kappa(g, thr)
            assert k <= _floor_log(norm, thr), f"{g.rows()} T={thr}: kappa {k}"
            checked += 1
    return f"{checked} checks over |B(6)| = {ball.counts[6]}"


@criterion(6, "pigeonhole prime: p=5 on B(1); a confirmed prime on B(5)", 120)
def test_c06_pigeonhole():
    b1 = enumerate_ball(ST, 1)
    cert = find_injective_prime(b1, 1, primes_in(5, 50))
    assert cert.prime == 5, f"B(1) gave {cert.prime}"
    assert replay_certificate(b1, cert), "B(1) certificate does not replay"
    b5 = enumerate_ball(ST, 5)
    cert5 = find_injective_prime(b5, 5, primes_in(100, 1000))
    assert is_injective_mod_p(b5, 5, cert5.prime), f"p={cert5.prime} not injective on B(5)"
    assert replay_certificate(b5, cert5)
    return f"B(1): p=5, B(5): p={cert5.prime}"


_RUNS: dict[str, object] = {}


def _pipeline_run(tag: str):
    if tag not in _RUNS:
        out = Path(tempfile.mkdtemp(prefix=f"accept_{tag}_"))
        m = ExperimentManifest("sl2_st", k=5, window=(100, 1000), out=str(out))
        t0 = time.perf_counter()
        _RUNS[tag] = (run_pipeline(m), out, time.perf_counter() - t0)
    return _RUNS[tag]


@criterion(7, "pipeline on sl2_st, k=5, window (100,1000)", 600)
def test_c07_pipeline():
    report, _, _ = _pipeline_run("a")
    assert report.status == "ok", f"{report.failure}"
    p = report.prime
    assert report.surjectivity_radius is not None
    assert report.modp_distinct_traces == p, f"{report.modp_distinct_traces} traces mod {p}"
    assert report.integer_trace_count >= p, f"{report.integer_trace_count} integer traces < {p}"
    assert report.passed, f"invariants {report.invariants}"
    exact = "" if report.integer_trace_exact else " (lower bound from B(%d))" % report.integer_trace_radius
    return (f"p={p}, n*={report.surjectivity_radius}, mod-p traces={p}, "
            f"integer traces={report.integer_trace_count}{exact}")


@criterion(8, "trichotomy: bounded, polynomial and exponential charpoly growth")
def test_c08_trichotomy():
    t_series = count_series(enumerate_ball(symmetrize(GeneratorSet.of(T)), 12), "charpoly")
    assert set(t_series.counts) == {1}, f"{{T}} charpoly counts {t_series.counts}"
    assert classify_growth(t_series).label == "bounded"
    solv = count_series(enumerate_ball(symmetrize(GeneratorSet.of(D, T)), 14), "charpoly")
    assert all(c <= 2 * n + 2 for n, c in enumerate(solv.counts)), f"solvable counts {solv.counts}"
    assert classify_growth(solv).label == "polynomial"
    st = count_series(enumerate_ball(ST, 12), "charpoly")
    assert classify_growth(st).label == "exponential"
    rate = estimate_rate(st, (6, 12)).slope
    assert rate > 0.1, f"rate {rate}"
    return f"{{S,T}} rate on [6,12] = {rate:.4f}"


@criterion(9, "tripling dichotomy: |AAA| = 61 for a progression, >= |A|^1.1 for B(2)", 60)
def test_c09_tripling_dichotomy():
    p = 101
    prog = FiniteSet.from_matrices([FiniteMatrix.from_rows([[1, i % p], [0, 1]], p) for i in range(-10, 11)], p, 2)
    aaa = triple_product_size(prog)
    assert prog.size == 21 and aaa == 61 <= 3 * prog.size, f"progression |A|={prog.size} |AAA|={aaa}"
    a = image_mod_p(enumerate_ball(ST, 2).level(2), p)
    big = triple_product_size(a)
    assert big >= a.size**1.1, f"|A|={a.size} |AAA|={big}"
    return f"progression 61, ball |A|={a.size} |AAA|={big}"


@criterion(10, "pi(10^6) = 78498 and pi(x) ln x / x in [0.9, 1.3]", 30)
def test_c10_chebyshev():
    sieve = bytearray([1]) * (10**6 + 1)
    sieve[:2] = b"\0\0"
    for i in range(2, 1001):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(range(i * i, 10**6 + 1, i)))
    assert prime_count(10**6)[0] == 78498 == sum(sieve)
    assert len(primes_in(2, 10**4).primes) == len(primes_trial(2, 10**4))
    ratios = []
    for x in (10**4, 10**5, 10**6):
        pi, ratio = prime_count(x)
        assert ratio == pytest.approx(pi * math.log(x) / x)
        assert 0.9 <= ratio <= 1.3, f"x={x}: {ratio}"
        ratios.append(f"{ratio:.4f}")
    return "ratios " + ", ".join(ratios)


@criterion(11, "two pipeline runs give byte-identical reports modulo timings")
def test_c11_determinism():
    first, out_a, _ = _pipeline_run("a")
    second, out_b, _ = _pipeline_run("b")

    def canon(out):
        rep = json.loads(next(out.glob("*_report.json")).read_text())
        rep = strip_timings(rep)
        rep["manifest"]["out"] = None
        return json.dumps(rep, sort_keys=True).encode()

    assert canon(out_a) == canon(out_b), "reports differ"
    for path in out_a.iterdir():
        if path.name.endswith(("_report.json", "_manifest.json")):
            continue
        assert (out_b / path.name).read_bytes() == path.read_bytes(), f"{path.name} differs"
    return f"{len(list(out_a.iterdir()))} artifacts identical"


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    failed = 0
    for t in tests:
        try:
            t()
        except Exception:
            failed += 1
    print(f"\n{len(tests) - failed}/{len(tests)} criteria passed")
    sys.exit(1 if failed else 0)
