import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.cayley import GeneratorSet, enumerate_ball, symmetrize
from growthlab.exact_linalg import ExactMatrix, identity, mat_inverse, mat_mul, sup_norm
from growthlab.finitegrp import is_injective_mod_p, reduce_mod_p
from growthlab.primesieve import (
    FactorizationIncomplete,
    InjectivePrimeCertificate,
    NoCleanPrimeError,
    find_injective_prime,
    is_prime,
    kappa,
    kappa_bound,
    pair_content,
    prime_count,
    prime_factors,
    primes_in,
    replay_certificate,
)
from oracles import primes_trial

M = ExactMatrix.from_rows


def test_primes_in_examples():
    assert primes_in(10, 20).primes == (11, 13, 17, 19)
    assert primes_in(90, 96).primes == ()
    assert len(primes_in(2, 100)) == 25


def test_primes_in_matches_trial_division():
    rng = random.Random(5)
    for _ in range(40):
        lo = rng.randint(2, 50_000)
        hi = lo + rng.randint(0, 3000)
        assert list(primes_in(lo, hi).primes) == primes_trial(lo, hi)


def test_primes_in_crosses_segments(monkeypatch):
    import growthlab.primesieve as ps

    monkeypatch.setattr(ps, "SEGMENT", 97)
    assert list(ps.primes_in(2, 5000).primes) == primes_trial(2, 5000)


def test_primes_in_range_errors():
    with pytest.raises(ValueError):
        primes_in(1, 10)
    with pytest.raises(ValueError):
        primes_in(2, 2**40 + 1)
    with pytest.raises(MemoryError):
        primes_in(2, 10**6, max_span=1000)


def test_primes_near_upper_limit():
    w = primes_in(2**40 - 2000, 2**40)
    assert w.primes and all(is_prime(p) for p in w.primes)
    assert w.primes[-1] == 1099511627689


def test_prime_count_examples():
    n, ratio = prime_count(100)
    assert n == 25 and ratio == pytest.approx(1.151, abs=1e-3)
    assert prime_count(10)[0] == 4
    assert prime_count(10**6)[0] == 78498


def test_prime_count_window_consistency():
    rng = random.Random(9)
    for _ in range(100):
        lo = rng.randint(3, 20_000)
        hi = rng.randint(lo, lo + 5000)
        assert prime_count(hi)[0] - prime_count(lo - 1)[0] == len(primes_in(lo, hi))


@pytest.mark.parametrize("x", [10**4, 10**5, 10**6])
def test_chebyshev_ratio(x):
    _, ratio = prime_count(x)
    assert 0.9 <= ratio <= 1.3


def test_is_prime_against_sieve():
    small = set(primes_trial(2, 20_000))
    assert all(is_prime(n) == (n in small) for n in range(20_000))
    assert is_prime(2**61 - 1) and not is_prime((2**31 - 1) * 1099511627689)
    with pytest.raises(FactorizationIncomplete):
        is_prime((2**31 - 1) * (2**61 - 1))


def test_prime_factors():
    assert prime_factors(25) == [5]
    assert prime_factors(-360) == [2, 3, 5]
    big = (2**61 - 1) * 3
    assert prime_factors(big) == [3, 2**61 - 1]
    with pytest.raises(FactorizationIncomplete):
        prime_factors((2**31 - 1) * 1099511627689)


def test_kappa_examples(T):
    assert kappa(T, 10) == 0
    assert kappa(M([[1, 25], [0, 1]]), 5) == 1
    g = M([[7, 12], [4, 7]])
    assert kappa(g, 3) == 0
    assert kappa(g, 2) == 1
    with pytest.raises(ValueError):
        kappa(identity(2), 2)


def test_kappa_excludes_declared_denominator():
    g = M([[1, 30], [0, 1]])
    assert kappa(g, 2) == 3
    assert kappa(g, 2, excluded=2) == 2


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=4, max_size=4), st.integers(2, 1000))
def test_kappa_bound_property(entries, threshold):
    g = ExactMatrix(2, entries)
    if g == identity(2):
        return
    assert kappa(g, threshold) <= kappa_bound(g, threshold)
    norm = sup_norm(g - identity(2))
    assert kappa_bound(g, threshold) == math.floor(math.log(norm) / math.log(threshold) + 1e-12)


def test_pair_content_matches_literal_definition(st_gens):
    ball = enumerate_ball(st_gens, 3)
    window = primes_in(2, 60).primes
    level = ball.level(3)
    for i, g in enumerate(level):
        for h in level[i + 1:]:
            lit = mat_mul(g, mat_inverse(h)) - identity(2)
            c = pair_content(g, h)
            for p in window:
                assert (c % p == 0) == all(x % p == 0 for x in lit.num)


def test_find_injective_prime_examples(t_gens, st_gens):
    cert = find_injective_prime(enumerate_ball(t_gens, 1), 1, primes_in(3, 100))
    assert cert.prime == 3 and cert.bad_primes_seen == []
    trivial = enumerate_ball(symmetrize(GeneratorSet.of(identity(2))), 1)
    assert find_injective_prime(trivial, 1, primes_in(10, 20)).prime == 11
    b1 = enumerate_ball(st_gens, 1)
    cert = find_injective_prime(b1, 1, primes_in(5, 50))
    assert cert.prime == 5 and cert.checked_pairs == 10


def test_st_ball_one_pair_oracle(st_gens):
    level = enumerate_ball(st_gens, 1).level(1)
    gcds = []
    for i, g in enumerate(level):
        for h in level[i + 1:]:
            diff = mat_mul(g, mat_inverse(h)) - identity(2)
            assert max(abs(x) for x in diff.num) <= 3
            gcds.append(math.gcd(*diff.num))
    assert max(gcds) <= 3
    assert all(len({reduce_mod_p(g, 5) for g in level}) == 5 for _ in [0])


def test_bad_primes_recorded(t_gens):
    ball = enumerate_ball(t_gens, 3)  # T^-3 .. T^3: differences up to T^6 - I
    cert = find_injective_prime(ball, 3, primes_in(2, 50))
    assert cert.prime == 7
    assert [p for p, _ in cert.bad_primes_seen] == [2, 3, 5]
    assert all(c % p == 0 for p, c in cert.bad_primes_seen)
    assert replay_certificate(ball, cert)
    assert is_injective_mod_p(ball, 3, 7)


def test_no_clean_prime_error(t_gens):
    ball = enumerate_ball(t_gens, 3)
    with pytest.raises(NoCleanPrimeError) as info:
        find_injective_prime(ball, 3, primes_in(2, 5))
    assert [p for p, _ in info.value.bad_primes] == [2, 3, 5]


def test_denominator_primes_excluded(solv_gens):
    ball = enumerate_ball(solv_gens, 2)
    cert = find_injective_prime(ball, 2, primes_in(2, 50))
    assert cert.prime != 2
    assert (2, 0) in cert.bad_primes_seen
    assert replay_certificate(ball, cert)


def test_sampling_is_seeded(st_gens):
    ball = enumerate_ball(st_gens, 6)
    a = find_injective_prime(ball, 6, primes_in(100, 1000), sample_cap=50, seed=3)
    b = find_injective_prime(ball, 6, primes_in(100, 1000), sample_cap=50, seed=3)
    assert a.sampled and a.seed == 3 and a.examined == 50 and a.checked_pairs == 50 * 49 // 2
    assert a.to_json() == b.to_json()
    assert replay_certificate(ball, a)


def test_certificate_json_roundtrip(st_gens):
    ball = enumerate_ball(st_gens, 5)
    cert = find_injective_prime(ball, 5, primes_in(100, 1000))
    again = InjectivePrimeCertificate.from_json(cert.to_json())
    assert again == cert
    assert cert.to_json()["schema"] == 1


def test_certificate_soundness_full_level(st_gens):
    ball = enumerate_ball(st_gens, 5)
    cert = find_injective_prime(ball, 5, primes_in(100, 1000))
    assert replay_certificate(ball, cert)
    assert is_injective_mod_p(ball, 5, cert.prime)
    tampered = InjectivePrimeCertificate.from_json(cert.to_json() | {"prime": 2})
    assert not replay_certificate(ball, tampered)
