"""
Counting functions over <c, d>: representable prime powers, k-th powers and their
von Mangoldt / log p weighted versions, with the residue-class decomposition and
the Stieltjes transition from theta back to the prime count.

Functions whose ``tables`` is Optional accept ``None``; the sieve is then streamed
segment by segment up to floor(g^(1/k)) instead of read from materialised tables.
residue_decomposition reads psi in progressions and needs materialised tables.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Tuple

import numpy as np

from fpcount.config import SIEVE_BLOCK_SIZE
from fpcount.errors import CapacityError, DomainError
from fpcount.models.reports import CountReport
from fpcount.services import arith
from fpcount.services.arith import SieveTables, iroot
from fpcount.services.semigroup import Semigroup, new_semigroup, representable_power_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CountQuery:
    sg: Semigroup
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")

    @property
    def root(self) -> int:
        """floor(g^(1/k))"""
        return iroot(self.sg.g, self.k)


def new_query(c: int, d: int, k: int) -> CountQuery:
    return CountQuery(sg=new_semigroup(c, d), k=k)


class _Totals(NamedTuple):
    pi: int
    psi: float
    theta: float
    primes: int


def _require(tables: SieveTables, upper: int) -> None:
    if tables.limit < upper:
        raise CapacityError(f"sieve limit {tables.limit} below required {upper}")


def prime_power_blocks(q: CountQuery, tables: Optional[SieveTables]
                       ) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(n, Lambda(n), n is prime) for 2 <= n <= root with Lambda(n) != 0."""
    root = q.root
    if root < 2:
        return
    if tables is not None:
        _require(tables, root)
        lam = tables.lam[:root + 1]
        n = np.flatnonzero(lam)
        yield n, lam[n], tables.is_prime[n]
        return
    for segment in arith.iter_segments(root):
        idx = np.flatnonzero(segment.lam)
        yield segment.start + idx, segment.lam[idx], segment.is_prime[idx]


def _aggregate(q: CountQuery, tables: Optional[SieveTables]) -> _Totals:
    pi, primes = 0, 0
    psi_parts, theta_parts = [], []
    for n, lam, prime in prime_power_blocks(q, tables):
        hit = representable_power_mask(q.sg, n, q.k)
        prime_hit = hit & prime
        pi += int(np.count_nonzero(prime_hit))
        primes += int(np.count_nonzero(prime))
        psi_parts.append(math.fsum(lam[hit].tolist()))
        theta_parts.append(math.fsum(lam[prime_hit].tolist()))
    return _Totals(pi=pi, psi=math.fsum(psi_parts), theta=math.fsum(theta_parts), primes=primes)


def count_prime_powers(q: CountQuery, tables: Optional[SieveTables] = None) -> int:
    """pi_{c,d,k}: primes p with p^k <= g and p^k representable."""
    return _aggregate(q, tables).pi


def count_kth_powers(q: CountQuery) -> int:
    """N: integers n >= 0 with n^k <= g and n^k representable (n = 0 included)."""
    root = q.root
    total = 0
    for lo in range(0, root + 1, SIEVE_BLOCK_SIZE):
        n = np.arange(lo, min(lo + SIEVE_BLOCK_SIZE, root + 1), dtype=np.int64)
        total += int(np.count_nonzero(representable_power_mask(q.sg, n, q.k)))
    return total


def weighted_psi(q: CountQuery, tables: Optional[SieveTables] = None) -> float:
    """psi_{c,d}: sum of Lambda(n) over 1 <= n <= root with n^k representable."""
    return _aggregate(q, tables).psi


def weighted_theta(q: CountQuery, tables: Optional[SieveTables] = None) -> float:
    """theta_{c,d}: sum of log p over primes p <= root with p^k representable."""
    return _aggregate(q, tables).theta


def chebyshev_gap(q: CountQuery, tables: Optional[SieveTables] = None) -> Tuple[float, float]:
    """(psi_{c,d} - theta_{c,d}, sqrt(g^(1/k))), the quantity and its Chebyshev scale."""
    totals = _aggregate(q, tables)
    return totals.psi - totals.theta, math.sqrt(q.sg.g ** (1.0 / q.k))


def _power_residues(c: int, k: int) -> np.ndarray:
    r = np.arange(c, dtype=np.int64)
    out = np.ones_like(r)
    for _ in range(k):
        out = out * r % c
    return out


def residue_decomposition(q: CountQuery, tables: SieveTables) -> Tuple[float, float, float]:
    """Compare psi_{c,d} with its split over reduced residues y mod c.

    decomposed = sum over 1 <= y <= c, (y, c) = 1, of
    psi(g^(1/k); c, r) - psi(((d*y)^(1/k))-; c, r) over the classes r with
    r^k = d*y (mod c); at k = 1 that is the single class d*y mod c. The lower
    end is a left limit, so n^k = d*y itself (representable) stays in the sum.
    Classes with d*y > g have an empty range and contribute nothing. What is left
    in the difference are the representable n^k sharing a factor with c.
    Returns (direct, decomposed, direct - decomposed).
    """
    sg, k = q.sg, q.k
    root = q.root
    if tables is None:
        raise CapacityError("residue decomposition needs materialised sieve tables")
    direct = weighted_psi(q, tables)
    if root < 2:
        return direct, 0.0, direct
    _require(tables, root)
    powers = _power_residues(sg.c, k)
    top = {}
    terms = []
    for y in range(1, sg.c + 1):
        if math.gcd(y, sg.c) != 1 or sg.d * y > sg.g:
            continue
        lower = iroot(sg.d * y - 1, k)
        for r in np.flatnonzero(powers == sg.d * y % sg.c).tolist():
            if r not in top:
                top[r] = arith.chebyshev_psi_ap(root, sg.c, r, tables)
            terms.append(top[r] - arith.chebyshev_psi_ap(lower, sg.c, r, tables))
    decomposed = math.fsum(terms)
    return direct, decomposed, direct - decomposed


def transition_pi(q: CountQuery, tables: Optional[SieveTables] = None) -> Tuple[int, float]:
    """pi_{c,d,k} directly and as theta(T)/log T + integral_2^T theta(t)/(t log^2 t) dt.

    theta is a step function jumping by log p at each representable prime p, so
    the integral is summed exactly piece by piece with antiderivative -1/log t.
    """
    sg, k = q.sg, q.k
    if q.root < 2:
        return 0, 0.0
    primes, logs = [], []
    for n, lam, prime in prime_power_blocks(q, tables):
        hit = representable_power_mask(sg, n, k) & prime
        primes.append(n[hit])
        logs.append(lam[hit])
    primes = np.concatenate(primes)
    logs = np.concatenate(logs)
    if len(primes) == 0:
        return 0, 0.0
    log_t = math.log(sg.g) / k
    cumulative = np.cumsum(logs)
    ends = np.append(np.log(primes[1:].astype(np.float64)), log_t)
    pieces = cumulative * (1.0 / logs - 1.0 / ends)
    pi_from_theta = cumulative[-1] / log_t + math.fsum(pieces.tolist())
    return len(primes), pi_from_theta


def count_report(q: CountQuery, tables: Optional[SieveTables] = None) -> CountReport:
    """Every count for (c, d, k) next to its predicted asymptotic value."""
    sg, k = q.sg, q.k
    totals = _aggregate(q, tables)
    n_count = count_kth_powers(q)
    scale = float(sg.g) ** (1.0 / k)
    pred_pi = k / (k + 1) * scale / math.log(sg.g) if sg.g >= 2 else 0.0
    pred_n = scale / (k + 1)

    def ratio(actual: float, predicted: float) -> Optional[float]:
        return actual / predicted if predicted > 0 else None

    conj = totals.primes / (k + 1)
    report = CountReport(
        c=sg.c, d=sg.d, k=k, g=sg.g,
        pi_cdk=totals.pi, n_count=n_count, psi_cd=totals.psi, theta_cd=totals.theta,
        pred_pi=pred_pi, pred_n=pred_n, pred_psi=pred_n,
        ratio_pi=ratio(totals.pi, pred_pi),
        ratio_n=ratio(n_count, pred_n),
        ratio_psi=ratio(totals.psi, pred_n),
        prime_pi_root=totals.primes,
        ratio_pi_conj=ratio(totals.pi, conj),
    )
    logger.debug(f"count_report c={sg.c} d={sg.d} k={k}: pi={totals.pi} N={n_count}")
    return report
