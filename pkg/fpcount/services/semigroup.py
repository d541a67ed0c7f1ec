"""
The two-generator numerical semigroup <c, d>

Membership uses the residue test: with y0 = n * d^-1 mod c, n = c*x + d*y has a
solution in nonnegative integers exactly when d * y0 <= n. Scalars are Python ints
(no overflow); the array variants stay inside int64 because every intermediate is
bounded by c*d <= 2^62.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from fpcount.errors import CapacityError, DomainError, NotCoprimeError, OrderingError

logger = logging.getLogger(__name__)

MAX_PRODUCT = 2**62
ANTISYMMETRY_BLOCK = 2**20


@dataclass(frozen=True)
class Semigroup:
    c: int
    d: int
    g: int
    d_inv_mod_c: int


def new_semigroup(c: int, d: int) -> Semigroup:
    """Validate a coprime pair 1 < c < d and derive g = cd - c - d and d^-1 mod c."""
    c, d = int(c), int(d)
    if c <= 1 or d <= c:
        raise OrderingError(f"need 1 < c < d, got c={c}, d={d}")
    if math.gcd(c, d) != 1:
        raise NotCoprimeError(f"c={c} and d={d} are not coprime (gcd {math.gcd(c, d)})")
    if c * d > MAX_PRODUCT:
        raise CapacityError(f"c*d = {c * d} exceeds 2^62")
    return Semigroup(c=c, d=d, g=c * d - c - d, d_inv_mod_c=pow(d, -1, c))


def is_representable(sg: Semigroup, n: int) -> bool:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    y0 = n * sg.d_inv_mod_c % sg.c
    return sg.d * y0 <= n


def representable_mask(sg: Semigroup, values: np.ndarray) -> np.ndarray:
    """Vectorised residue test over a nonnegative int64 array."""
    values = np.asarray(values, dtype=np.int64)
    y0 = (values % sg.c) * sg.d_inv_mod_c % sg.c
    return sg.d * y0 <= values


def representable_power_mask(sg: Semigroup, bases: np.ndarray, k: int) -> np.ndarray:
    """Residue test applied to n^k for each n in ``bases``; requires n^k <= 2^62."""
    bases = np.asarray(bases, dtype=np.int64)
    powers = bases ** k
    residue = np.ones_like(bases)
    r = bases % sg.c
    for _ in range(k):
        residue = residue * r % sg.c
    y0 = residue * sg.d_inv_mod_c % sg.c
    return sg.d * y0 <= powers


def representation(sg: Semigroup, n: int) -> Optional[Tuple[int, int]]:
    """The unique witness (x, y) with c*x + d*y = n and 0 <= y < c, if any."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    y = n * sg.d_inv_mod_c % sg.c
    if sg.d * y > n:
        return None
    return (n - sg.d * y) // sg.c, y


def count_representable_upto(sg: Semigroup, l: int) -> int:
    """K_l = #{0 <= n <= l representable} = sum over i = 0..floor(l/d) of floor((l - i*d)/c) + 1.

    The i = 0 term counts the multiples of c; it is required for agreement with
    direct enumeration.
    """
    if l < 0 or l > sg.g:
        raise DomainError(f"l must lie in [0, g={sg.g}], got {l}")
    i = np.arange(l // sg.d + 1, dtype=np.int64)
    return int(((l - i * sg.d) // sg.c + 1).sum())


def antisymmetry_holds(sg: Semigroup) -> bool:
    """True iff exactly one of m and g - m is representable for every 0 <= m <= g."""
    for lo in range(0, sg.g + 1, ANTISYMMETRY_BLOCK):
        m = np.arange(lo, min(lo + ANTISYMMETRY_BLOCK, sg.g + 1), dtype=np.int64)
        if not np.all(representable_mask(sg, m) ^ representable_mask(sg, sg.g - m)):
            return False
    return True


def sample_coprime_pairs(rng: np.random.Generator, count: int, max_product: int,
                         min_product: int = 6) -> List[Tuple[int, int]]:
    """``count`` distinct random coprime pairs 1 < c < d with min_product <= cd <= max_product."""
    if max_product < max(min_product, 6):
        raise DomainError(f"no pairs with cd <= {max_product}")
    seen, pairs = set(), []
    attempts = 0
    while len(pairs) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise DomainError(f"could not draw {count} coprime pairs with cd <= {max_product}")
        c = int(rng.integers(2, math.isqrt(max_product) + 1))
        top = max_product // c
        if top <= c:
            continue
        d = int(rng.integers(c + 1, top + 1))
        if c * d < min_product or math.gcd(c, d) != 1 or (c, d) in seen:
            continue
        seen.add((c, d))
        pairs.append((c, d))
    return pairs
