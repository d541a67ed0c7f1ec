import math

import numpy as np
import pytest

from fpcount.errors import CapacityError, DomainError
from fpcount.services import arith, oracles
from fpcount.services.arith import (
    build_sieve,
    chebyshev_psi,
    chebyshev_psi_ap,
    chebyshev_theta,
    coprime_weight_deltas,
    coprime_weight_sum,
    euler_phi,
    factorize,
    iroot,
    iter_segments,
    moebius,
    prime_pi,
    prime_pi_streaming,
)


def test_small_table_values(tables):
    assert prime_pi(1, tables) == 0
    assert prime_pi(10, tables) == 4
    assert chebyshev_psi(1, tables) == 0
    assert chebyshev_psi(10, tables) == pytest.approx(math.log(2**3 * 3**2 * 5 * 7), rel=1e-12)
    assert chebyshev_theta(10, tables) == pytest.approx(math.log(2 * 3 * 5 * 7), rel=1e-12)


def test_prime_pi_matches_bit_sieve(tables):
    assert prime_pi(200_000, tables) == oracles.bit_sieve_prime_count(200_000)
    flags = np.frombuffer(bytes(oracles.bit_sieve(200_000)), dtype=np.uint8).astype(bool)
    assert np.array_equal(flags, tables.is_prime)


def test_prime_pi_million():
    assert prime_pi(10**6, build_sieve(10**6)) == 78498


def test_mangoldt_matches_trial_division(tables):
    for n in range(3000):
        assert tables.lam[n] == pytest.approx(oracles.trial_division_mangoldt(n), abs=1e-12)


def test_mangoldt_nonzero_only_on_prime_powers(tables):
    for n in np.flatnonzero(tables.lam[:5000]).tolist():
        assert len(factorize(n, tables)) == 1


def test_psi_prime_number_theorem(tables):
    assert chebyshev_psi(200_000, tables) / 200_000 == pytest.approx(1.0, abs=0.01)


def test_psi_ap_class_one_mod_four(tables):
    expected = math.fsum(oracles.trial_division_mangoldt(n) for n in range(1, 21) if n % 4 == 1)
    assert chebyshev_psi_ap(20, 4, 1, tables) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(math.log(5 * 9 * 13 * 17) - math.log(3), rel=1e-12)


@pytest.mark.parametrize("q", [1, 2, 7, 30, 97, 100])
def test_psi_ap_partition(tables, q):
    total = chebyshev_psi(10**4, tables)
    parts = math.fsum(chebyshev_psi_ap(10**4, q, a, tables) for a in range(q))
    assert parts == pytest.approx(total, rel=1e-9)


def test_psi_nondecreasing_with_jumps(tables):
    values = [chebyshev_psi(t, tables) for t in range(0, 200)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    for t in range(1, 200):
        assert values[t] - values[t - 1] == pytest.approx(tables.lam[t], abs=1e-12)


def test_real_arguments_floor(tables):
    assert chebyshev_psi(10.9, tables) == chebyshev_psi(10, tables)
    assert prime_pi(2.5, tables) == 1


def test_errors(tables):
    with pytest.raises(CapacityError):
        chebyshev_psi(200_001, tables)
    with pytest.raises(DomainError):
        chebyshev_psi(-1, tables)
    with pytest.raises(DomainError):
        chebyshev_psi_ap(10, 4, 4, tables)
    with pytest.raises(CapacityError):
        build_sieve(1)
    with pytest.raises(DomainError):
        euler_phi(0, tables)
    with pytest.raises(DomainError):
        moebius(0, tables)


def test_table_size_cap(monkeypatch):
    monkeypatch.setattr(arith, "MAX_TABLE_BYTES", 1000)
    with pytest.raises(CapacityError):
        build_sieve(10_000)


def test_tables_are_read_only(tables):
    with pytest.raises(ValueError):
        tables.lam[5] = 0.0


def test_segmented_build_matches_single_block(monkeypatch):
    plain = build_sieve(50_000)
    monkeypatch.setattr(arith, "SEGMENT_THRESHOLD", 1000)
    segmented = build_sieve(50_000, block_size=4099, threads=3)
    assert np.array_equal(plain.is_prime, segmented.is_prime)
    assert np.array_equal(plain.lam, segmented.lam)
    assert np.array_equal(plain.spf, segmented.spf)


def test_iter_segments_cover_the_range(tables):
    segments = list(iter_segments(30_000, block_size=1000, threads=2))
    assert segments[0].start == 0
    assert segments[-1].stop == 30_001
    assert all(a.stop == b.start for a, b in zip(segments, segments[1:]))
    lam = np.concatenate([s.lam for s in segments])
    assert np.array_equal(lam, tables.lam[:30_001])
    assert np.array_equal(segments[3].numbers(), np.arange(3000, 4000))


def test_prime_pi_streaming(tables):
    assert prime_pi_streaming(123_456, block_size=10_000) == prime_pi(123_456, tables)
    assert prime_pi_streaming(1) == 0


def test_multiplicative_functions(tables):
    assert euler_phi(10, tables) == 4
    assert moebius(10, tables) == 1
    assert moebius(12, tables) == 0
    assert moebius(1, tables) == 1
    assert sum(moebius(d, tables) for d in range(1, 31) if 30 % d == 0) == 0
    assert factorize(360, tables) == {2: 3, 3: 2, 5: 1}


def test_spf_rebuilt_when_missing(tables):
    bare = arith.SieveTables(limit=tables.limit, is_prime=tables.is_prime, lam=tables.lam)
    assert factorize(9991, bare) == {97: 1, 103: 1}
    assert np.array_equal(bare.spf, tables.spf)


@pytest.mark.parametrize("n,k,expected", [
    (0, 3, 0), (1, 5, 1), (7, 1, 7), (7, 2, 2), (8, 3, 2), (26, 3, 2), (27, 3, 3),
    (10**18, 2, 10**9), (10**18 - 1, 2, 10**9 - 1), (10**18, 3, 10**6), (10**18 - 1, 3, 10**6 - 1),
])
def test_iroot(n, k, expected):
    assert iroot(n, k) == expected


def test_coprime_weight_sum_examples(tables):
    assert coprime_weight_sum(10, 1, tables) == pytest.approx((5.0, 5.0, 0.0))
    assert coprime_weight_sum(2, 1, tables) == pytest.approx((1.0, 1.0, 0.0))
    assert abs(coprime_weight_sum(10**4, 2, tables)[2]) <= 2
    with pytest.raises(DomainError):
        coprime_weight_sum(1, 1, tables)


def test_coprime_weight_batch_matches_direct(tables):
    for k in (1, 2, 3):
        deltas = coprime_weight_deltas(500, k, tables)
        assert np.isnan(deltas[:2]).all()
        for c in (2, 3, 10, 30, 97, 210, 360, 500):
            assert deltas[c] == pytest.approx(coprime_weight_sum(c, k, tables)[2], abs=1e-9)


def test_coprime_weight_envelope(tables):
    for k in (1, 2, 3):
        assert np.abs(coprime_weight_deltas(20_000, k, tables)[2:]).max() <= 2.0
