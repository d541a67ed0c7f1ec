"""
Exponential sums attached to <c, d> and the major/minor arc apparatus

f(alpha) = sum Lambda(n) e(alpha n^k) and F(alpha) = sum e(alpha n^k) over n^k <= g
are sparse trigonometric polynomials; h(alpha) = sum over 0 <= x <= d, 0 <= y <= c of
e(alpha (cx + dy)) is evaluated in closed form as a product of two geometric sums.
Arc geometry is exact (Fraction / integer arithmetic); only sums use floating point.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from fpcount.config import (
    ABS_H_LIMIT,
    DEFAULT_STEP_DIVISOR,
    QUADRATURE_LIMIT,
    THREADS,
    V_DIRECT_LIMIT,
)
from fpcount.errors import CapacityError, DomainError
from fpcount.services.arith import SieveTables
from fpcount.services.counts import CountQuery, prime_power_blocks
from fpcount.services.semigroup import Semigroup

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# complex entries per evaluation chunk
CHUNK_ENTRIES = 2**22
DEGENERATE_TOLERANCE = 1e-12

Real = Union[int, float, Fraction]


@dataclass(frozen=True)
class TrigPoly:
    """Finite exponential sum: value(alpha) = sum coeffs[j] * e(alpha * freqs[j])."""
    freqs: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_dict(cls, mapping: Dict[int, complex]) -> "TrigPoly":
        items = sorted((int(m), complex(v)) for m, v in mapping.items() if v != 0)
        freqs = np.array([m for m, _ in items], dtype=np.int64)
        coeffs = np.array([v for _, v in items], dtype=np.complex128)
        return cls(freqs=freqs, coeffs=coeffs)

    def as_dict(self) -> Dict[int, complex]:
        return {int(m): complex(v) for m, v in zip(self.freqs, self.coeffs)}

    def __len__(self) -> int:
        return len(self.freqs)

    def scaled(self, factor: complex) -> "TrigPoly":
        return TrigPoly(freqs=self.freqs, coeffs=self.coeffs * factor)

    def __call__(self, alpha) -> Union[complex, np.ndarray]:
        return self.evaluate(alpha)

    def evaluate(self, alpha, threads: Optional[int] = None) -> Union[complex, np.ndarray]:
        """Value at a scalar (float or exact Fraction) or at an array of floats."""
        if len(self) == 0:
            return 0j if np.ndim(alpha) == 0 else np.zeros(np.shape(alpha), dtype=np.complex128)
        if isinstance(alpha, (Fraction, int)):
            alpha = Fraction(alpha)
            num, den = alpha.numerator % alpha.denominator, alpha.denominator
            residues = self.freqs.astype(object) * num % den
            phase = residues.astype(np.float64) / den
            return complex(np.exp(1j * TWO_PI * phase) @ self.coeffs)
        if np.ndim(alpha) == 0:
            return complex(self._evaluate_chunk(np.array([float(alpha)]))[0])
        alphas = np.asarray(alpha, dtype=np.float64)
        step = max(1, CHUNK_ENTRIES // len(self))
        chunks = [alphas[i:i + step] for i in range(0, len(alphas), step)]
        if len(chunks) <= 1:
            return self._evaluate_chunk(alphas)
        with ThreadPoolExecutor(max_workers=threads or THREADS) as pool:
            return np.concatenate(list(pool.map(self._evaluate_chunk, chunks)))

    def _evaluate_chunk(self, alphas: np.ndarray) -> np.ndarray:
        phase = np.mod(np.outer(alphas, self.freqs), 1.0)
        return np.exp(1j * TWO_PI * phase) @ self.coeffs


@dataclass(frozen=True)
class Arc:
    q: int
    a: int
    center: Fraction
    half_width: Fraction

    @property
    def left(self) -> Fraction:
        return self.center - self.half_width

    @property
    def right(self) -> Fraction:
        return self.center + self.half_width


@dataclass(frozen=True)
class ArcPartition:
    """Major arcs |alpha - a/q| <= Q/(q g), 1 <= a <= q <= Q, (a, q) = 1, and
    the minor set: the rest of the window [(Q+1)/g, 1 + (Q+1)/g)."""
    q_max: int
    g: int
    arcs: Tuple[Arc, ...]
    warning: bool
    disjoint: bool
    contained: bool

    @property
    def window_start(self) -> Fraction:
        return Fraction(self.q_max + 1, self.g)


@dataclass(frozen=True)
class Major:
    q: int
    a: int


@dataclass(frozen=True)
class Minor:
    pass


MINOR = Minor()


class MinorProbe(NamedTuple):
    sup_abs: float
    ratio_to_f0: float
    minor_points: int


def build_f(q: CountQuery, tables: Optional[SieveTables] = None) -> TrigPoly:
    """f: coefficient Lambda(n) at frequency n^k for n^k <= g."""
    freqs, coeffs = [], []
    for n, lam, _ in prime_power_blocks(q, tables):
        freqs.append(n ** q.k)
        coeffs.append(lam)
    if not freqs:
        return TrigPoly.from_dict({})
    return TrigPoly(freqs=np.concatenate(freqs),
                    coeffs=np.concatenate(coeffs).astype(np.complex128))


def build_F(q: CountQuery) -> TrigPoly:
    """F: unit coefficient at every n^k <= g, n >= 0."""
    n = np.arange(q.root + 1, dtype=np.int64)
    return TrigPoly(freqs=n ** q.k, coeffs=np.ones(len(n), dtype=np.complex128))


def _geometric(theta: np.ndarray, count: int) -> np.ndarray:
    """sum over x = 0..count-1 of e(theta x), with theta already reduced mod 1."""
    t = theta - np.round(theta)
    degenerate = np.abs(t) < DEGENERATE_TOLERANCE / count
    safe = np.where(degenerate, 0.5, t)
    value = np.exp(1j * np.pi * safe * (count - 1)) * np.sin(np.pi * count * safe) / np.sin(np.pi * safe)
    return np.where(degenerate, complex(count), value)


def _reduced_multiple(alpha, m: int):
    """frac(m * alpha); exact for Fractions, float otherwise."""
    if isinstance(alpha, (Fraction, int)):
        x = Fraction(alpha) * m
        return np.float64(x - math.floor(x))
    return np.mod(np.asarray(alpha, dtype=np.float64) * m, 1.0)


def eval_h(alpha, sg: Semigroup) -> Union[complex, np.ndarray]:
    """h(alpha) as the product of the x-sum over 0..d and the y-sum over 0..c."""
    value = (_geometric(_reduced_multiple(alpha, sg.c), sg.d + 1)
             * _geometric(_reduced_multiple(alpha, sg.d), sg.c + 1))
    return complex(value) if np.ndim(value) == 0 else value


def gauss_S(q: int, a: int, k: int) -> complex:
    """S(q, a) = (1/q) sum over n = 1..q of e(a n^k / q)."""
    if q < 1 or math.gcd(a, q) != 1:
        raise DomainError(f"need q >= 1 and gcd(a, q) = 1, got q={q}, a={a}")
    residues = np.array([a * pow(n, k, q) % q for n in range(1, q + 1)], dtype=np.float64)
    return complex(np.exp(1j * TWO_PI * residues / q).sum() / q)


def eval_v(beta: float, q: CountQuery) -> complex:
    """v(beta) = (1/k) sum over 1 <= n <= g of n^(1/k - 1) e(beta n), summed directly."""
    g, k = q.sg.g, q.k
    if g > V_DIRECT_LIMIT:
        raise CapacityError(f"direct v(beta) needs g <= {V_DIRECT_LIMIT}, got {g}")
    parts = []
    step = CHUNK_ENTRIES
    for lo in range(1, g + 1, step):
        n = np.arange(lo, min(lo + step, g + 1), dtype=np.float64)
        weights = n ** (1.0 / k - 1.0)
        parts.append(complex((weights * np.exp(1j * TWO_PI * np.mod(beta * n, 1.0))).sum()))
    return sum(parts, 0j) / k


def v_bound_ratio(q: CountQuery, betas: Sequence[float]) -> float:
    """max over betas of |v(beta)| / min(g^(1/k), |beta|^(-1/k))."""
    scale = float(q.sg.g) ** (1.0 / q.k)
    worst = 0.0
    for beta in betas:
        bound = scale if beta == 0 else min(scale, abs(beta) ** (-1.0 / q.k))
        worst = max(worst, abs(eval_v(beta, q)) / bound)
    return worst


def box_representation_count(sg: Semigroup, m) -> np.ndarray:
    """r(m) = #{(x, y): 0 <= x <= d, 0 <= y <= c, cx + dy = m}; 0, 1 or 2."""
    m = np.asarray(m, dtype=np.int64)
    y0 = (m % sg.c) * sg.d_inv_mod_c % sg.c
    first = (sg.d * y0 <= m) & ((m - sg.d * y0) // sg.c <= sg.d)
    top = sg.d * sg.c
    second = (y0 == 0) & (top <= m) & ((m - top) // sg.c <= sg.d)
    return first.astype(np.int64) + second.astype(np.int64)


def trig_product_integral(f_poly: TrigPoly, sg: Semigroup) -> float:
    """Integral over [0, 1] of f(alpha) h(-alpha), by matching frequencies.

    Only the m-th coefficient of f pairs with the m-th coefficient r(m) of h, so the
    integral is sum coeff(m) r(m); no quadrature. Returns the real part.
    """
    if len(f_poly) == 0:
        return 0.0
    if f_poly.freqs.min() < 0 or f_poly.freqs.max() > sg.g:
        raise DomainError(f"frequencies must lie in [0, g={sg.g}]")
    r = box_representation_count(sg, f_poly.freqs)
    return math.fsum((f_poly.coeffs.real * r).tolist())


def frequency_matched_count(q: CountQuery) -> int:
    """Integral of F(alpha) h(-alpha) by frequency matching; equals N."""
    return int(round(trig_product_integral(build_F(q), q.sg)))


def build_arcs(q_max: int, g: int) -> ArcPartition:
    if q_max < 1 or g < 1:
        raise DomainError(f"need Q >= 1 and g >= 1, got Q={q_max}, g={g}")
    arcs = tuple(
        Arc(q=q, a=a, center=Fraction(a, q), half_width=Fraction(q_max, q * g))
        for q in range(1, q_max + 1)
        for a in range(1, q + 1)
        if math.gcd(a, q) == 1
    )
    warning = 2 * q_max ** 3 >= g
    lower, upper = Fraction(q_max, g), 1 + Fraction(q_max, g)
    contained = all(arc.left >= lower and arc.right <= upper for arc in arcs)
    partition = ArcPartition(q_max=q_max, g=g, arcs=arcs, warning=warning,
                             disjoint=_pairwise_disjoint(arcs), contained=contained)
    if warning:
        logger.warning(f"Q={q_max} violates Q < (g/2)^(1/3) for g={g}; arcs may overlap")
    return partition


def _pairwise_disjoint(arcs: Sequence[Arc]) -> bool:
    """Closed intervals sorted by left end; any overlap shows against the running right end."""
    reach = None
    for arc in sorted(arcs, key=lambda arc: arc.left):
        if reach is not None and arc.left <= reach:
            return False
        reach = arc.right if reach is None else max(reach, arc.right)
    return True


def classify(alpha: Real, arcs: ArcPartition) -> Union[Major, Minor]:
    """Major(q, a) for the first arc (by q, then a) containing alpha, else MINOR.

    alpha is first shifted by an integer into [(Q+1)/g, 1 + (Q+1)/g). With
    alpha = P/D the test |alpha - a/q| <= Q/(q g) becomes |P q - a D| g <= Q D.
    """
    alpha = Fraction(alpha)
    start = arcs.window_start
    alpha -= math.floor(alpha - start)
    num, den = alpha.numerator, alpha.denominator
    bound = arcs.q_max * den
    for q in range(1, arcs.q_max + 1):
        base = num * q // den
        for a in (base, base + 1):
            if 1 <= a <= q and abs(num * q - a * den) * arcs.g <= bound and math.gcd(a, q) == 1:
                return Major(q, a)
    return MINOR


def _minor_samples(arcs: ArcPartition, samples: int) -> np.ndarray:
    """Golden-ratio points of the window kept when classify says minor."""
    start = float(arcs.window_start)
    u = np.mod(np.arange(1, samples + 1, dtype=np.float64) * GOLDEN, 1.0)
    points = start + u
    keep = [isinstance(classify(Fraction(float(p)), arcs), Minor) for p in points]
    return points[np.array(keep, dtype=bool)]


def minor_sup_probe(q: CountQuery, arcs: ArcPartition, samples: int,
                    tables: Optional[SieveTables] = None,
                    poly: Optional[TrigPoly] = None) -> MinorProbe:
    """Largest sampled |f| on the minor arcs, absolute and relative to f(0).

    ``poly`` replaces f (for instance with F) when given.
    """
    if q.sg.g > V_DIRECT_LIMIT:
        raise CapacityError(f"minor-arc probe needs g <= {V_DIRECT_LIMIT}, got {q.sg.g}")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    poly = poly if poly is not None else build_f(q, tables)
    points = _minor_samples(arcs, samples)
    if len(points) == 0:
        raise DomainError(f"no minor-arc points among {samples} samples")
    peak = abs(poly.evaluate(0.0))
    if peak == 0:
        raise DomainError("polynomial vanishes at 0")
    sup_abs = float(np.abs(poly.evaluate(points)).max())
    return MinorProbe(sup_abs=sup_abs, ratio_to_f0=sup_abs / peak, minor_points=len(points))


def _trapezoid(values: np.ndarray, width: float) -> complex:
    intervals = len(values) - 1
    return complex((values.sum() - 0.5 * (values[0] + values[-1])) * width / intervals)


def _check_quadrature(sg: Semigroup, step_divisor: int, limit: int) -> None:
    if sg.g > limit:
        raise CapacityError(f"quadrature needs g <= {limit}, got {sg.g}")
    if step_divisor < 4:
        raise DomainError(f"step_divisor must be >= 4, got {step_divisor}")


def major_integral_quadrature(q: CountQuery, arcs: ArcPartition,
                              step_divisor: int = DEFAULT_STEP_DIVISOR,
                              tables: Optional[SieveTables] = None,
                              poly: Optional[TrigPoly] = None) -> float:
    """Composite trapezoid of f(alpha) h(-alpha) over every major arc, step <= 1/(step_divisor g)."""
    sg = q.sg
    _check_quadrature(sg, step_divisor, QUADRATURE_LIMIT)
    poly = poly if poly is not None else build_f(q, tables)
    step = 1.0 / (step_divisor * sg.g)
    pieces = []
    for arc in arcs.arcs:
        left, right = float(arc.left), float(arc.right)
        intervals = max(1, math.ceil((right - left) / step))
        grid = np.linspace(left, right, intervals + 1)
        values = poly.evaluate(grid) * eval_h(-grid, sg)
        pieces.append(_trapezoid(values, right - left))
    return math.fsum(p.real for p in pieces)


def window_integral_quadrature(q: CountQuery, step_divisor: int = DEFAULT_STEP_DIVISOR,
                               tables: Optional[SieveTables] = None,
                               poly: Optional[TrigPoly] = None,
                               start: float = 0.0) -> float:
    """Rectangle rule for f(alpha) h(-alpha) over one full period starting at ``start``.

    The integrand has frequencies in [2 - 2cd, g], so any grid of more than 2cd - 2
    points is exact. The grid has max(step_divisor * g, 2cd) points.
    """
    sg = q.sg
    _check_quadrature(sg, step_divisor, QUADRATURE_LIMIT)
    poly = poly if poly is not None else build_f(q, tables)
    points = max(step_divisor * sg.g, 2 * sg.c * sg.d)
    grid = start + np.arange(points, dtype=np.float64) / points
    values = poly.evaluate(grid) * eval_h(-grid, sg)
    return float(values.real.sum() / points)


def minor_integral_quadrature(q: CountQuery, arcs: ArcPartition,
                              step_divisor: int = DEFAULT_STEP_DIVISOR,
                              tables: Optional[SieveTables] = None) -> Tuple[float, float, float]:
    """(major, minor, window): the minor part is the full window minus the major arcs."""
    poly = build_f(q, tables)
    window = window_integral_quadrature(q, step_divisor, poly=poly, start=float(arcs.window_start))
    major = major_integral_quadrature(q, arcs, step_divisor, poly=poly)
    return major, window - major, window


def integral_abs_h(sg: Semigroup, step_divisor: int = DEFAULT_STEP_DIVISOR,
                   threads: Optional[int] = None) -> float:
    """Rectangle-rule integral of |h(-alpha)| over [0, 1) with step_divisor * g points.

    Chunks are reduced in a fixed order so the value does not depend on ``threads``.
    """
    if sg.g > ABS_H_LIMIT:
        raise CapacityError(f"integral of |h| needs g <= {ABS_H_LIMIT}, got {sg.g}")
    if step_divisor < 4:
        raise DomainError(f"step_divisor must be >= 4, got {step_divisor}")
    points = step_divisor * max(sg.g, 1)
    bounds = [(lo, min(lo + CHUNK_ENTRIES, points)) for lo in range(0, points, CHUNK_ENTRIES)]

    def chunk(bound: Tuple[int, int]) -> float:
        grid = np.arange(*bound, dtype=np.float64) / points
        return float(np.abs(eval_h(-grid, sg)).sum())

    with ThreadPoolExecutor(max_workers=threads or THREADS) as pool:
        partials = list(pool.map(chunk, bounds))
    return math.fsum(partials) / points


def major_h_probe(sg: Semigroup, arcs: ArcPartition, samples: int = 16) -> float:
    """max |h(-a/q - beta)| / (q d) over arcs with q >= 2 and sampled |beta| <= Q/(q g)."""
    worst = 0.0
    for arc in arcs.arcs:
        if arc.q < 2:
            continue
        beta = np.linspace(-float(arc.half_width), float(arc.half_width), samples)
        values = np.abs(eval_h(-(float(arc.center) + beta), sg))
        worst = max(worst, float(values.max()) / (arc.q * sg.d))
    return worst


def rho(k: int) -> Fraction:
    """Minor-arc saving exponent: 1/8 at k = 2, 1/14 at k = 3, (2/3) 2^-k beyond."""
    if k < 2:
        raise DomainError(f"rho needs k >= 2, got {k}")
    if k == 2:
        return Fraction(1, 8)
    if k == 3:
        return Fraction(1, 14)
    return Fraction(2, 3) / 2 ** k


def arc_entries(arcs: ArcPartition) -> List[Dict[str, Union[int, str]]]:
    return [
        {"q": arc.q, "a": arc.a, "center": f"{arc.a}/{arc.q}",
         "half_width": f"{arcs.q_max}/{arc.q * arcs.g}"}
        for arc in arcs.arcs
    ]
