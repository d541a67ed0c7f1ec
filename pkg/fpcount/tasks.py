"""
Sweep tasks: CountReports for every (c, d, k) of a SweepConfig on a worker pool
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

from fpcount.config import STREAM_THRESHOLD
from fpcount.errors import DomainError
from fpcount.models.reports import CountReport, SweepConfig
from fpcount.services.arith import iroot
from fpcount.services.counts import count_report, new_query
from fpcount.services.sieve_cache import get_sieve

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, str], None]


def sweep_pairs(config: SweepConfig) -> List[Tuple[int, int]]:
    """Coprime pairs c < d drawn from the configured ranges, sorted.

    ``random:N`` draws from numpy's PCG64 generator seeded with ``config.seed``;
    draws outside c < d or with gcd > 1 are rejected.
    """
    (c_lo, c_hi), (d_lo, d_hi) = config.c_range, config.d_range
    c_lo = max(c_lo, 2)
    if c_hi < c_lo or d_hi <= c_lo:
        raise DomainError(f"no coprime pairs c < d in c {config.c_range}, d {config.d_range}")

    if config.random_count is None:
        candidates = [
            (c, d)
            for c in range(c_lo, c_hi + 1)
            for d in range(max(d_lo, c + 1), d_hi + 1)
            if math.gcd(c, d) == 1
        ]
        if not candidates:
            raise DomainError(f"no coprime pairs c < d in c {config.c_range}, d {config.d_range}")
        return candidates

    wanted = config.random_count
    rng = np.random.Generator(np.random.PCG64(config.seed))
    chosen = set()
    attempts = 0
    while len(chosen) < wanted:
        attempts += 1
        if attempts > 1000 * wanted:
            raise DomainError(
                f"could not draw {wanted} coprime pairs from c {config.c_range}, d {config.d_range}"
            )
        c = int(rng.integers(c_lo, c_hi + 1))
        d = int(rng.integers(d_lo, d_hi + 1))
        if c < d and math.gcd(c, d) == 1:
            chosen.add((c, d))
    return sorted(chosen)


def sweep_tasks(config: SweepConfig) -> List[Tuple[int, int, int]]:
    """(c, d, k) triples in lexicographic order."""
    return sorted((c, d, k) for c, d in sweep_pairs(config) for k in config.k_list)


class SweepRunner:
    def __init__(self, config: SweepConfig):
        self.config = config
        self._progress_callback: Optional[ProgressCallback] = None

    def register_progress_callback(self, callback: ProgressCallback) -> None:
        """The callback receives: rows_done, rows_total, status_message"""
        self._progress_callback = callback

    def _report_progress(self, current: int, total: int, message: str) -> None:
        if self._progress_callback:
            try:
                self._progress_callback(current, total, message)
            except Exception as e:
                logger.error(f"Error in progress callback: {str(e)}")

    def run(self) -> List[CountReport]:
        """Reports in (c, d, k) order; results do not depend on the thread count."""
        tasks = sweep_tasks(self.config)
        logger.info(f"Sweep of {len(tasks)} rows on {self.config.threads} threads "
                    f"(pairs={self.config.pair_mode}, seed={self.config.seed})")

        max_root = max(iroot(c * d - c - d, k) for c, d, k in tasks)
        tables = get_sieve(max_root) if max_root <= STREAM_THRESHOLD else None
        if tables is None:
            logger.info(f"Largest root {max_root} above {STREAM_THRESHOLD}; streaming segments per row")

        def compute(task: Tuple[int, int, int]) -> CountReport:
            return count_report(new_query(*task), tables)

        reports = []
        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            for i, report in enumerate(pool.map(compute, tasks), start=1):
                reports.append(report)
                self._report_progress(i, len(tasks), f"Row c={report.c} d={report.d} k={report.k}")
        return reports
