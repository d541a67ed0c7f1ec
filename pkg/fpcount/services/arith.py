"""
Sieve-backed elementary arithmetic

Smallest-prime-factor, von Mangoldt and primality tables, Chebyshev functions
(also restricted to arithmetic progressions) and the multiplicative functions
phi and mu read off the spf column.
"""
import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from fpcount.config import (
    MAX_SIEVE_LIMIT,
    MAX_TABLE_BYTES,
    PROGRESS_EVERY,
    SEGMENT_THRESHOLD,
    SIEVE_BLOCK_SIZE,
    THREADS,
)
from fpcount.errors import CapacityError, DomainError

logger = logging.getLogger(__name__)

# spf (uint32) + lambda (float64) + is_prime (bool)
BYTES_PER_ENTRY = 13


@dataclass(frozen=True)
class SieveTables:
    """Immutable per-limit tables indexed directly by n, 0 <= n <= limit.

    ``lam`` holds the von Mangoldt function in natural logs. ``spf`` is zero for
    n < 2. Tables restored from the disk cache carry no spf column; it is rebuilt
    on first access.
    """
    limit: int
    is_prime: np.ndarray
    lam: np.ndarray
    spf_table: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def spf(self) -> np.ndarray:
        if self.spf_table is None:
            logger.debug(f"Rebuilding spf column for limit {self.limit}")
            spf = _spf_block(0, self.limit + 1, base_primes(math.isqrt(self.limit)))
            spf.flags.writeable = False
            object.__setattr__(self, "spf_table", spf)
        return self.spf_table


@dataclass(frozen=True)
class SieveSegment:
    """One block [start, start + len) of a streamed sieve."""
    start: int
    is_prime: np.ndarray
    lam: np.ndarray

    @property
    def stop(self) -> int:
        return self.start + len(self.lam)

    def numbers(self) -> np.ndarray:
        return np.arange(self.start, self.stop, dtype=np.int64)


def iroot(n: int, k: int) -> int:
    """Exact floor of n ** (1/k)."""
    if n < 0 or k < 1:
        raise DomainError(f"iroot needs n >= 0 and k >= 1, got n={n}, k={k}")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def base_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain Eratosthenes sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _prime_powers(limit: int, primes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Prime powers p^a <= limit with a >= 2, sorted, with their log p."""
    values, logs = [], []
    a = 2
    while 2 ** a <= limit:
        pp = primes[primes <= iroot(limit, a)]
        values.append(pp ** a)
        logs.append(np.log(pp.astype(np.float64)))
        a += 1
    if not values:
        return np.array([], dtype=np.int64), np.array([], dtype=np.float64)
    values = np.concatenate(values)
    logs = np.concatenate(logs)
    order = np.argsort(values)
    return values[order], logs[order]


def _spf_block(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    """Smallest prime factor for every n in [lo, hi); primes must cover sqrt(hi - 1)."""
    dtype = np.uint32 if hi <= 2**32 else np.uint64
    spf = np.zeros(hi - lo, dtype=dtype)
    for p in primes.tolist():
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        view = spf[start - lo::p]
        view[view == 0] = p
    numbers = np.arange(lo, hi, dtype=np.int64)
    unmarked = (spf == 0) & (numbers >= 2)
    spf[unmarked] = numbers[unmarked]
    return spf


def _fill_block(lo: int, hi: int, primes: np.ndarray, powers: Tuple[np.ndarray, np.ndarray],
                spf_out: Optional[np.ndarray], is_prime_out: np.ndarray, lam_out: np.ndarray) -> None:
    """Sieve [lo, hi) into the given output slices (all of length hi - lo)."""
    spf = _spf_block(lo, hi, primes)
    numbers = np.arange(lo, hi, dtype=np.int64)
    flags = (spf == numbers) & (numbers >= 2)
    is_prime_out[:] = flags
    lam_out[:] = 0.0
    lam_out[flags] = np.log(numbers[flags].astype(np.float64))
    pp_values, pp_logs = powers
    left, right = np.searchsorted(pp_values, [lo, hi])
    lam_out[pp_values[left:right] - lo] = pp_logs[left:right]
    if spf_out is not None:
        spf_out[:] = spf


def _check_limit(limit: int) -> None:
    if limit < 2 or limit > MAX_SIEVE_LIMIT:
        raise CapacityError(f"sieve limit {limit} outside [2, {MAX_SIEVE_LIMIT}]")


def build_sieve(limit: int, block_size: Optional[int] = None,
                threads: Optional[int] = None) -> SieveTables:
    """Build immutable sieve tables for 0..limit.

    Limits above the segment threshold are sieved block by block, blocks spread
    over a thread pool; each block writes a disjoint slice of the output arrays.
    """
    limit = int(limit)
    _check_limit(limit)
    needed = (limit + 1) * BYTES_PER_ENTRY
    if needed > MAX_TABLE_BYTES:
        raise CapacityError(
            f"tables for limit {limit} need {needed} bytes (max {MAX_TABLE_BYTES}); "
            f"stream with iter_segments instead"
        )
    block_size = block_size or SIEVE_BLOCK_SIZE
    threads = threads or THREADS

    primes = base_primes(math.isqrt(limit))
    powers = _prime_powers(limit, primes)
    spf = np.zeros(limit + 1, dtype=np.uint32 if limit < 2**32 else np.uint64)
    is_prime = np.zeros(limit + 1, dtype=bool)
    lam = np.zeros(limit + 1, dtype=np.float64)

    if limit <= SEGMENT_THRESHOLD:
        _fill_block(0, limit + 1, primes, powers, spf, is_prime, lam)
    else:
        bounds = [(lo, min(lo + block_size, limit + 1)) for lo in range(0, limit + 1, block_size)]
        logger.info(f"Segmented sieve to {limit}: {len(bounds)} blocks on {threads} threads")
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_fill_block, lo, hi, primes, powers,
                            spf[lo:hi], is_prime[lo:hi], lam[lo:hi])
                for lo, hi in bounds
            ]
            reported = 0
            for (lo, hi), future in zip(bounds, futures):
                future.result()
                if hi // PROGRESS_EVERY > reported:
                    reported = hi // PROGRESS_EVERY
                    logger.info(f"Sieved {hi:,} / {limit + 1:,}")

    for array in (spf, is_prime, lam):
        array.flags.writeable = False
    logger.info(f"Sieve tables built for limit {limit}")
    return SieveTables(limit=limit, is_prime=is_prime, lam=lam, spf_table=spf)


def iter_segments(upper: int, block_size: Optional[int] = None,
                  threads: Optional[int] = None) -> Iterator[SieveSegment]:
    """Stream sieve segments covering 0..upper without materialising whole tables.

    Up to ``threads`` blocks are sieved ahead of the consumer.
    """
    upper = int(upper)
    _check_limit(max(upper, 2))
    block_size = block_size or SIEVE_BLOCK_SIZE
    threads = threads or THREADS
    primes = base_primes(math.isqrt(upper))
    powers = _prime_powers(upper, primes)

    def sieve(lo: int, hi: int) -> SieveSegment:
        is_prime = np.empty(hi - lo, dtype=bool)
        lam = np.empty(hi - lo, dtype=np.float64)
        _fill_block(lo, hi, primes, powers, None, is_prime, lam)
        return SieveSegment(start=lo, is_prime=is_prime, lam=lam)

    bounds = deque((lo, min(lo + block_size, upper + 1)) for lo in range(0, upper + 1, block_size))
    pending = deque()
    reported = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while bounds or pending:
            while bounds and len(pending) < threads:
                pending.append(pool.submit(sieve, *bounds.popleft()))
            segment = pending.popleft().result()
            if segment.stop // PROGRESS_EVERY > reported:
                reported = segment.stop // PROGRESS_EVERY
                logger.info(f"Streamed sieve {segment.stop:,} / {upper + 1:,}")
            yield segment


def _fsum(values: np.ndarray) -> float:
    """Correctly rounded sum of the nonzero entries."""
    return math.fsum(values[values != 0].tolist())


def _index_upto(t: float, tables: SieveTables) -> int:
    if t < 0:
        raise DomainError(f"argument must be >= 0, got {t}")
    n = math.floor(t)
    if n > tables.limit:
        raise CapacityError(f"{t} exceeds sieve limit {tables.limit}")
    return n


def chebyshev_psi(t: float, tables: SieveTables) -> float:
    """psi(t) = sum of Lambda(n) over n <= t."""
    n = _index_upto(t, tables)
    return _fsum(tables.lam[1:n + 1])


def chebyshev_psi_ap(t: float, q: int, a: int, tables: SieveTables) -> float:
    """psi(t; q, a) = sum of Lambda(n) over n <= t with n = a (mod q), by striding the table."""
    if q < 1 or not 0 <= a < q:
        raise DomainError(f"need q >= 1 and 0 <= a < q, got q={q}, a={a}")
    n = _index_upto(t, tables)
    start = a if a else q
    return _fsum(tables.lam[start:n + 1:q])


def chebyshev_theta(t: float, tables: SieveTables) -> float:
    """theta(t) = sum of log p over primes p <= t."""
    n = _index_upto(t, tables)
    return math.fsum(tables.lam[:n + 1][tables.is_prime[:n + 1]].tolist())


def prime_pi(t: float, tables: SieveTables) -> int:
    n = _index_upto(t, tables)
    return int(np.count_nonzero(tables.is_prime[:n + 1]))


def prime_pi_streaming(t: float, block_size: Optional[int] = None) -> int:
    """pi(t) from streamed segments, for t beyond materialisable tables."""
    if t < 2:
        return 0
    return sum(int(np.count_nonzero(s.is_prime)) for s in iter_segments(math.floor(t), block_size))


def factorize(n: int, tables: SieveTables) -> Dict[int, int]:
    """Prime factorisation of n by repeated spf lookups."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    if n > tables.limit:
        raise CapacityError(f"{n} exceeds sieve limit {tables.limit}")
    spf = tables.spf
    factors: Dict[int, int] = {}
    while n > 1:
        p = int(spf[n])
        factors[p] = factors.get(p, 0) + 1
        n //= p
    return factors


def euler_phi(n: int, tables: SieveTables) -> int:
    result = n
    for p in factorize(n, tables):
        result = result // p * (p - 1)
    return result


def moebius(n: int, tables: SieveTables) -> int:
    factors = factorize(n, tables)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def coprime_weight_sum(c: int, k: int, tables: SieveTables) -> Tuple[float, float, float]:
    """Average of y^(1/k) over reduced residues 1 <= y <= c against k/(k+1) * c^(1/k).

    Returns (lhs, rhs, lhs - rhs); the difference stays bounded as c grows.
    """
    if c < 2 or k < 1:
        raise DomainError(f"need c >= 2 and k >= 1, got c={c}, k={k}")
    y = np.arange(1, c + 1, dtype=np.int64)
    coprime = y[np.gcd(y, c) == 1]
    lhs = math.fsum(np.power(coprime.astype(np.float64), 1.0 / k).tolist()) / euler_phi(c, tables)
    rhs = k / (k + 1) * c ** (1.0 / k)
    return lhs, rhs, lhs - rhs


def coprime_weight_deltas(c_max: int, k: int, tables: SieveTables) -> np.ndarray:
    """lhs - rhs of coprime_weight_sum for every 2 <= c <= c_max (entries 0, 1 are nan).

    Uses sum over (y, c) = 1 of y^(1/k) = sum over squarefree e | c of
    mu(e) e^(1/k) P(c/e), where P(m) = sum over j <= m of j^(1/k).
    """
    if c_max < 2 or k < 1:
        raise DomainError(f"need c_max >= 2 and k >= 1, got c_max={c_max}, k={k}")
    if c_max > tables.limit:
        raise CapacityError(f"{c_max} exceeds sieve limit {tables.limit}")
    prefix = np.concatenate(([0.0], np.cumsum(np.arange(1, c_max + 1, dtype=np.float64) ** (1.0 / k))))
    deltas = np.full(c_max + 1, np.nan)
    for c in range(2, c_max + 1):
        primes = list(factorize(c, tables))
        divisors = [(1, 1)]
        for p in primes:
            divisors += [(e * p, -mu) for e, mu in divisors]
        total = math.fsum(mu * e ** (1.0 / k) * prefix[c // e] for e, mu in divisors)
        phi = c
        for p in primes:
            phi = phi // p * (p - 1)
        deltas[c] = total / phi - k / (k + 1) * c ** (1.0 / k)
    return deltas
