"""
Verification service: property suites behind the ``verify`` command

Each suite compares an fpcount computation with an independent oracle or an exact
identity and returns a CheckResult naming the first failing instance.
"""
import json
import logging
import math
import time
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import numpy as np

from fpcount.config import ENVELOPES_PATH
from fpcount.errors import DomainError
from fpcount.models.reports import CheckResult
from fpcount.services import arith, counts, expsum, oracles, semigroup
from fpcount.services.arith import SieveTables, iroot
from fpcount.services.sieve_cache import get_sieve

logger = logging.getLogger(__name__)

SEED = 0


class VerifyLimits(NamedTuple):
    max_product: int
    pairs: int
    sieve_limit: int
    mangoldt_limit: int
    psi_q: int
    psi_t: int
    orth_pairs: int
    orth_g: int
    residue_c: int
    residue_d: int
    weight_c: int
    arc_samples: int
    rationals: int
    h_pairs: int
    h_max_product: int
    h_alphas: int


LEVELS: Dict[str, VerifyLimits] = {
    "quick": VerifyLimits(
        max_product=10**4, pairs=40, sieve_limit=10**5, mangoldt_limit=2000,
        psi_q=30, psi_t=10**4, orth_pairs=10, orth_g=10**4,
        residue_c=20, residue_d=40, weight_c=10**3,
        arc_samples=30, rationals=10**3, h_pairs=10,
        h_max_product=2000, h_alphas=10,
    ),
    "full": VerifyLimits(
        max_product=10**6, pairs=200, sieve_limit=10**6, mangoldt_limit=10**4,
        psi_q=100, psi_t=10**5, orth_pairs=50, orth_g=10**5,
        residue_c=100, residue_d=300, weight_c=10**5,
        arc_samples=100, rationals=10**4, h_pairs=50,
        h_max_product=10**4, h_alphas=100,
    ),
}


@lru_cache(maxsize=None)
def load_envelopes(path: str = ENVELOPES_PATH) -> Dict[str, Any]:
    """Recorded empirical constants (golden file)."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _close(actual: float, expected: float, rel: float) -> bool:
    return abs(actual - expected) <= rel * max(1.0, abs(expected))


class VerificationService:
    def __init__(self, level: str = "quick", seed: int = SEED):
        if level not in LEVELS:
            raise DomainError(f"unknown verify level {level!r}; use one of {sorted(LEVELS)}")
        self.level = level
        self.limits = LEVELS[level]
        self.seed = seed
        self.envelopes = load_envelopes()
        self._progress_callback = None
        self._tables: Optional[SieveTables] = None

    def register_progress_callback(self, callback: Callable[[int, int, str], None]) -> None:
        """The callback receives: current, total, status_message"""
        self._progress_callback = callback

    def _report_progress(self, current: int, total: int, message: str) -> None:
        if self._progress_callback:
            try:
                self._progress_callback(current, total, message)
            except Exception as e:
                logger.error(f"Error in progress callback: {str(e)}")

    @property
    def suites(self) -> List[Callable[[], CheckResult]]:
        return [
            self.check_sieve_oracle,
            self.check_psi_partition,
            self.check_sylvester,
            self.check_residue_oracle,
            self.check_representation_witness,
            self.check_orthogonality,
            self.check_transition,
            self.check_residue_decomposition,
            self.check_coprime_weight,
            self.check_arc_geometry,
            self.check_classify_partition,
            self.check_h_closed_form,
        ]

    def run(self) -> List[CheckResult]:
        start_time = time.time()
        results = []
        suites = self.suites
        for i, suite in enumerate(suites):
            name = suite.__name__.removeprefix("check_")
            self._report_progress(i, len(suites), f"Running {name}")
            try:
                result = suite()
            except Exception as e:
                logger.error(f"Suite {name} raised: {str(e)}", exc_info=True)
                result = CheckResult(name=name, passed=False, detail=f"exception: {e}")
            logger.info(f"{name}: {'PASS' if result.passed else 'FAIL'} ({result.instances} instances)")
            results.append(result)
        self._report_progress(len(suites), len(suites), "Verification finished")
        logger.info(f"Verify level {self.level} finished in {time.time() - start_time:.1f}s")
        return results

    # Shared inputs

    def _rng(self, salt: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64([self.seed, salt]))

    @property
    def tables(self) -> SieveTables:
        if self._tables is None:
            lim = self.limits
            needed = max(lim.sieve_limit, lim.orth_g, lim.weight_c, lim.psi_t,
                         lim.residue_c * lim.residue_d)
            self._tables = get_sieve(needed)
        return self._tables

    def _pairs(self, salt: int, count: int, max_product: int):
        return semigroup.sample_coprime_pairs(self._rng(salt), count, max_product)

    # Suites

    def check_sieve_oracle(self) -> CheckResult:
        """Primality flags against the bytearray sieve; Lambda against trial division."""
        lim = self.limits
        tables = self.tables
        flags = np.frombuffer(bytes(oracles.bit_sieve(lim.sieve_limit)), dtype=np.uint8).astype(bool)
        mismatch = np.flatnonzero(flags != tables.is_prime[:lim.sieve_limit + 1])
        if len(mismatch):
            return CheckResult(name="sieve_oracle", passed=False, instances=lim.sieve_limit,
                               witness={"n": int(mismatch[0])}, detail="is_prime disagrees")
        expected_pi = oracles.bit_sieve_prime_count(lim.sieve_limit)
        if arith.prime_pi(lim.sieve_limit, tables) != expected_pi:
            return CheckResult(name="sieve_oracle", passed=False, instances=lim.sieve_limit,
                               witness={"n": lim.sieve_limit}, detail="prime_pi disagrees")
        # segments of a seventh of the range, so block edges fall inside it
        streamed = arith.prime_pi_streaming(lim.sieve_limit, block_size=lim.sieve_limit // 7 + 1)
        if streamed != expected_pi:
            return CheckResult(name="sieve_oracle", passed=False, instances=lim.sieve_limit,
                               witness={"n": lim.sieve_limit}, detail="streamed prime_pi disagrees")
        for n in range(lim.mangoldt_limit + 1):
            if not math.isclose(tables.lam[n], oracles.trial_division_mangoldt(n), rel_tol=1e-12):
                return CheckResult(name="sieve_oracle", passed=False, instances=n + 1,
                                   witness={"n": n}, detail="Lambda disagrees")
        return CheckResult(name="sieve_oracle", passed=True,
                           instances=lim.sieve_limit + lim.mangoldt_limit + 1)

    def check_psi_partition(self) -> CheckResult:
        """sum over a mod q of psi(t; q, a) equals psi(t)."""
        lim = self.limits
        tables = self.tables
        total = arith.chebyshev_psi(lim.psi_t, tables)
        for q in range(1, lim.psi_q + 1):
            parts = math.fsum(arith.chebyshev_psi_ap(lim.psi_t, q, a, tables) for a in range(q))
            if not _close(parts, total, 1e-9):
                return CheckResult(name="psi_partition", passed=False, instances=q,
                                   witness={"n": lim.psi_t, "q": q},
                                   detail=f"partition {parts} vs psi {total}")
        return CheckResult(name="psi_partition", passed=True, instances=lim.psi_q)

    def check_sylvester(self) -> CheckResult:
        """Antisymmetry, K_g = (g+1)/2, K_l against enumeration, g the largest gap."""
        lim = self.limits
        pairs = self._pairs(1, lim.pairs, lim.max_product)
        rng = self._rng(2)
        for c, d in pairs:
            sg = semigroup.new_semigroup(c, d)
            witness = {"c": c, "d": d, "k": 1}
            if not semigroup.antisymmetry_holds(sg):
                return CheckResult(name="sylvester", passed=False, instances=len(pairs),
                                   witness=witness, detail="antisymmetry fails")
            if semigroup.count_representable_upto(sg, sg.g) != (sg.g + 1) // 2:
                return CheckResult(name="sylvester", passed=False, instances=len(pairs),
                                   witness={**witness, "n": sg.g}, detail="K_g != (g+1)/2")
            flags = oracles.brute_representable_flags(c, d, sg.g)
            running = np.cumsum(flags)
            for l in rng.integers(0, sg.g + 1, size=8).tolist():
                if semigroup.count_representable_upto(sg, l) != int(running[l]):
                    return CheckResult(name="sylvester", passed=False, instances=len(pairs),
                                       witness={**witness, "n": l}, detail="K_l disagrees")
            tail = semigroup.representable_mask(sg, np.arange(sg.g, sg.g + c + 1))
            if tail[0] or not tail[1:].all():
                return CheckResult(name="sylvester", passed=False, instances=len(pairs),
                                   witness={**witness, "n": sg.g}, detail="g is not the largest gap")
        return CheckResult(name="sylvester", passed=True, instances=len(pairs))

    def check_residue_oracle(self) -> CheckResult:
        """Residue test against the brute-force flags for every n <= g.

        quick runs the scalar test on every n; full runs the vectorised test on
        every n and the scalar test on a sample.
        """
        lim = self.limits
        pairs = self._pairs(1, lim.pairs, lim.max_product)
        rng = self._rng(3)
        checked = 0
        for c, d in pairs:
            sg = semigroup.new_semigroup(c, d)
            flags = oracles.brute_representable_flags(c, d, sg.g)
            if self.level == "quick":
                scalar_n = range(sg.g + 1)
            else:
                mask = semigroup.representable_mask(sg, np.arange(sg.g + 1))
                bad = np.flatnonzero(mask != flags)
                if len(bad):
                    return CheckResult(name="residue_oracle", passed=False, instances=checked,
                                       witness={"c": c, "d": d, "k": 1, "n": int(bad[0])},
                                       detail="vectorised residue test disagrees")
                scalar_n = sorted(set(rng.integers(0, sg.g + 1, size=2000).tolist()))
            for n in scalar_n:
                checked += 1
                if semigroup.is_representable(sg, n) != bool(flags[n]):
                    return CheckResult(name="residue_oracle", passed=False, instances=checked,
                                       witness={"c": c, "d": d, "k": 1, "n": n},
                                       detail="residue test disagrees with brute force")
        return CheckResult(name="residue_oracle", passed=True, instances=checked)

    def check_representation_witness(self) -> CheckResult:
        """Witnesses (x, y) re-evaluate to n; None exactly for the gaps."""
        lim = self.limits
        pairs = self._pairs(4, lim.pairs // 4 or 1, lim.max_product)
        checked = 0
        for c, d in pairs:
            sg = semigroup.new_semigroup(c, d)
            flags = oracles.brute_representable_flags(c, d, sg.g)
            for n in range(0, sg.g + 1, max(1, sg.g // 500)):
                checked += 1
                found = semigroup.representation(sg, n)
                ok = (found is None) if not flags[n] else (
                    found is not None and found[0] >= 0 and 0 <= found[1] < c
                    and c * found[0] + d * found[1] == n
                )
                if not ok:
                    return CheckResult(name="representation_witness", passed=False,
                                       instances=checked,
                                       witness={"c": c, "d": d, "k": 1, "n": n},
                                       detail=f"witness {found}")
        return CheckResult(name="representation_witness", passed=True, instances=checked)

    def check_orthogonality(self) -> CheckResult:
        """Frequency matching reproduces psi_{c,d} and N."""
        lim = self.limits
        tol = self.envelopes["orthogonality_rel_tol"]
        tables = self.tables
        pairs = self._pairs(5, lim.orth_pairs, lim.orth_g)
        instances = 0
        for c, d in pairs:
            for k in (1, 2, 3):
                q = counts.new_query(c, d, k)
                instances += 1
                witness = {"c": c, "d": d, "k": k}
                integral = expsum.trig_product_integral(expsum.build_f(q, tables), q.sg)
                direct = counts.weighted_psi(q, tables)
                if not _close(integral, direct, tol):
                    return CheckResult(name="orthogonality", passed=False, instances=instances,
                                       witness=witness, detail=f"{integral} vs psi {direct}")
                if expsum.frequency_matched_count(q) != counts.count_kth_powers(q):
                    return CheckResult(name="orthogonality", passed=False, instances=instances,
                                       witness=witness, detail="integral of F h differs from N")
        return CheckResult(name="orthogonality", passed=True, instances=instances)

    def check_transition(self) -> CheckResult:
        """pi_{c,d,k} recovered from theta_{c,d} by partial summation."""
        lim = self.limits
        tol = self.envelopes["transition_abs_tol"]
        tables = self.tables
        pairs = self._pairs(6, lim.orth_pairs, lim.orth_g)
        instances = 0
        for c, d in pairs:
            for k in (1, 2):
                instances += 1
                direct, from_theta = counts.transition_pi(counts.new_query(c, d, k), tables)
                if abs(direct - from_theta) > tol:
                    return CheckResult(name="transition", passed=False, instances=instances,
                                       witness={"c": c, "d": d, "k": k},
                                       detail=f"{direct} vs {from_theta}")
        return CheckResult(name="transition", passed=True, instances=instances)

    def check_residue_decomposition(self) -> CheckResult:
        """|direct - decomposed| <= factor * log g over c <= C < d <= D, k = 1."""
        lim = self.limits
        factor = self.envelopes["residue_decomposition_log_factor"]
        tables = self.tables
        instances = 0
        for c in range(2, lim.residue_c + 1):
            for d in range(lim.residue_c + 1, lim.residue_d + 1):
                if math.gcd(c, d) != 1:
                    continue
                instances += 1
                q = counts.new_query(c, d, 1)
                _, _, delta = counts.residue_decomposition(q, tables)
                if abs(delta) > factor * math.log(q.sg.g):
                    return CheckResult(name="residue_decomposition", passed=False,
                                       instances=instances, witness={"c": c, "d": d, "k": 1},
                                       detail=f"delta {delta} exceeds {factor} log g")
        return CheckResult(name="residue_decomposition", passed=True, instances=instances)

    def check_coprime_weight(self) -> CheckResult:
        """Mean of y^(1/k) over reduced residues stays within the envelope of k/(k+1) c^(1/k)."""
        lim = self.limits
        bound = self.envelopes["coprime_weight_delta"]
        tables = self.tables
        for k in (1, 2, 3):
            deltas = np.abs(arith.coprime_weight_deltas(lim.weight_c, k, tables)[2:])
            worst = int(np.argmax(deltas))
            if deltas[worst] > bound:
                return CheckResult(name="coprime_weight", passed=False, instances=3 * (lim.weight_c - 1),
                                   witness={"c": worst + 2, "k": k}, detail=f"delta {deltas[worst]}")
        return CheckResult(name="coprime_weight", passed=True, instances=3 * (lim.weight_c - 1))

    def _arc_partitions(self) -> List[expsum.ArcPartition]:
        rng = self._rng(7)
        partitions = []
        for _ in range(self.limits.arc_samples):
            g = int(rng.integers(16, 10**6))
            q_max = int(rng.integers(1, iroot((g - 1) // 2, 3) + 1))
            partitions.append(expsum.build_arcs(q_max, g))
        return partitions

    def check_arc_geometry(self) -> CheckResult:
        """Major arcs are pairwise disjoint and inside the window when 2Q^3 < g."""
        partitions = self._arc_partitions()
        for arcs in partitions:
            if arcs.warning or not arcs.disjoint or not arcs.contained:
                return CheckResult(name="arc_geometry", passed=False, instances=len(partitions),
                                   witness={"Q": arcs.q_max, "g": arcs.g},
                                   detail=f"disjoint={arcs.disjoint} contained={arcs.contained}")
        return CheckResult(name="arc_geometry", passed=True, instances=len(partitions))

    def check_classify_partition(self) -> CheckResult:
        """classify agrees with a scan of every arc; no rational lies on two arcs."""
        lim = self.limits
        rng = self._rng(8)
        partitions = self._arc_partitions()[:5]
        for i in range(lim.rationals):
            arcs = partitions[i % len(partitions)]
            den = int(rng.integers(1, 10**6))
            alpha = Fraction(int(rng.integers(0, den)), den)
            shifted = alpha - math.floor(alpha - arcs.window_start)
            hits = [arc for arc in arcs.arcs if abs(shifted - arc.center) <= arc.half_width]
            verdict = expsum.classify(alpha, arcs)
            expected = expsum.Major(hits[0].q, hits[0].a) if hits else expsum.MINOR
            if len(hits) > 1 or verdict != expected:
                return CheckResult(name="classify_partition", passed=False, instances=i + 1,
                                   witness={"Q": arcs.q_max, "g": arcs.g, "alpha": str(alpha)},
                                   detail=f"{len(hits)} arcs, classify gave {verdict}")
        return CheckResult(name="classify_partition", passed=True, instances=lim.rationals)

    def check_h_closed_form(self) -> CheckResult:
        """Closed-form h against the direct double sum at random rationals."""
        lim = self.limits
        tol = self.envelopes["h_closed_form_rel_tol"]
        rng = self._rng(9)
        pairs = self._pairs(9, lim.h_pairs, lim.h_max_product)
        instances = 0
        for c, d in pairs:
            sg = semigroup.new_semigroup(c, d)
            scale = (c + 1) * (d + 1)
            for _ in range(lim.h_alphas):
                den = int(rng.integers(1, 1000))
                alpha = Fraction(int(rng.integers(-den, den)), den)
                instances += 1
                closed, direct = expsum.eval_h(alpha, sg), oracles.direct_h(c, d, alpha)
                if abs(closed - direct) > tol * scale:
                    return CheckResult(name="h_closed_form", passed=False, instances=instances,
                                       witness={"c": c, "d": d, "alpha": str(alpha)},
                                       detail=f"{closed} vs {direct}")
        return CheckResult(name="h_closed_form", passed=True, instances=instances)
