"""
Independent brute-force oracles

Nothing here shares code with the sieve or the residue test; these are the
reference answers the property suites compare against.
"""
import math
from fractions import Fraction
from typing import List, Set

import numpy as np


def bit_sieve(limit: int) -> bytearray:
    """Primality flags 0..limit from a bytearray Eratosthenes sieve."""
    flags = bytearray([1]) * (limit + 1)
    flags[0] = 0
    if limit >= 1:
        flags[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i::i] = bytearray((limit - i * i) // i + 1)
    return flags


def bit_sieve_prime_count(limit: int) -> int:
    if limit < 2:
        return 0
    return sum(bit_sieve(limit))


def trial_division_mangoldt(n: int) -> float:
    """Lambda(n) by trial division."""
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


def brute_representable(c: int, d: int, n: int) -> bool:
    """Search x = 0..n/c for (n - c*x) divisible by d."""
    for x in range(n // c + 1):
        if (n - c * x) % d == 0:
            return True
    return False


def brute_representable_set(c: int, d: int, upper: int) -> Set[int]:
    """All c*x + d*y <= upper by a double loop over (x, y)."""
    found = set()
    for y in range(upper // d + 1):
        for x in range((upper - d * y) // c + 1):
            found.add(c * x + d * y)
    return found


def brute_representable_flags(c: int, d: int, upper: int) -> np.ndarray:
    """Flags 0..upper marked by striding c through each start d*y."""
    flags = np.zeros(upper + 1, dtype=bool)
    for y in range(upper // d + 1):
        flags[d * y::c] = True
    return flags


def brute_count_upto(c: int, d: int, l: int) -> int:
    return sum(1 for n in range(l + 1) if brute_representable(c, d, n))


def brute_prime_powers(c: int, d: int, k: int) -> List[int]:
    """Primes p with p^k <= g and p^k in <c, d>, found from the double-loop set."""
    g = c * d - c - d
    if g < 2:
        return []
    representable = brute_representable_set(c, d, g)
    flags = bit_sieve(math.isqrt(g) if k >= 2 else g)
    return [p for p in range(2, len(flags)) if flags[p] and p ** k <= g and p ** k in representable]


def direct_h(c: int, d: int, alpha: Fraction) -> complex:
    """h(alpha) as the plain double sum over 0 <= x <= d, 0 <= y <= c.

    Phases are reduced exactly in integers: (cx + dy) * P mod D for alpha = P/D.
    """
    alpha = Fraction(alpha)
    den = alpha.denominator
    num = alpha.numerator % den
    exponents = (c * np.arange(d + 1, dtype=np.int64)[:, None]
                 + d * np.arange(c + 1, dtype=np.int64)[None, :])
    residues = (exponents % den) * num % den
    return complex(np.exp(2j * np.pi * residues / den).sum())
