from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Optional, Dict, Any, Tuple, Literal

CSV_HEADER = "c,d,k,g,pi,pred_pi,ratio_pi,N,pred_N,ratio_N,psi,pred_psi,ratio_psi,theta"


def format_number(value: Optional[float]) -> str:
    """12 significant digits, '.' decimal, empty for undefined."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".12g")


class CountReport(BaseModel):
    """All counting functions for one (c, d, k) with their predicted values."""
    c: int
    d: int
    k: int
    g: int
    pi_cdk: int
    n_count: int
    psi_cd: float
    theta_cd: float
    pred_pi: float
    pred_n: float
    pred_psi: float
    ratio_pi: Optional[float] = None
    ratio_n: Optional[float] = None
    ratio_psi: Optional[float] = None
    prime_pi_root: int = 0
    ratio_pi_conj: Optional[float] = None

    def csv_row(self) -> str:
        fields = [
            self.c, self.d, self.k, self.g,
            self.pi_cdk, self.pred_pi, self.ratio_pi,
            self.n_count, self.pred_n, self.ratio_n,
            self.psi_cd, self.pred_psi, self.ratio_psi,
            self.theta_cd,
        ]
        return ",".join(format_number(v) for v in fields)


class SweepConfig(BaseModel):
    """Parameters of a (c, d, k) sweep."""
    c_range: Tuple[int, int]
    d_range: Tuple[int, int]
    k_list: List[int] = Field(default_factory=lambda: [1])
    pair_mode: str = "all-coprime"  # "all-coprime" or "random:N"
    seed: int = 0
    output_format: Literal["csv", "json"] = "csv"
    output_path: Optional[str] = None
    threads: int = 1

    @field_validator("c_range", "d_range")
    @classmethod
    def _nonempty(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] > value[1]:
            raise ValueError(f"empty range {value[0]}..{value[1]}")
        return value

    @field_validator("k_list")
    @classmethod
    def _positive_k(cls, value: List[int]) -> List[int]:
        if not value or any(k < 1 for k in value):
            raise ValueError("k_list needs at least one k >= 1")
        return sorted(set(value))

    @field_validator("pair_mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value == "all-coprime":
            return value
        kind, _, count = value.partition(":")
        if kind != "random" or not count.isdigit() or int(count) < 1:
            raise ValueError(f"pair_mode must be 'all-coprime' or 'random:N', got {value!r}")
        return value

    @model_validator(mode="after")
    def _threads_positive(self) -> "SweepConfig":
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return self

    @property
    def random_count(self) -> Optional[int]:
        if self.pair_mode.startswith("random:"):
            return int(self.pair_mode.split(":", 1)[1])
        return None


class ArcEntry(BaseModel):
    q: int
    a: int
    center: str
    half_width: str


class SupProbe(BaseModel):
    samples: int
    minor_points: int
    sup_abs: float
    ratio: float


class QuadratureReport(BaseModel):
    step_divisor: int
    major: float
    minor: float
    window: float
    psi: float


class ArcReport(BaseModel):
    """Arc partition plus the optional probes run against it."""
    c: int
    d: int
    k: int
    Q: int
    g: int
    warning: bool
    disjoint: bool
    contained: bool
    arcs: List[ArcEntry]
    sup_probe: Optional[SupProbe] = None
    quadrature: Optional[QuadratureReport] = None
    major_h_ratio: Optional[float] = None


class CheckResult(BaseModel):
    """Outcome of one verification property over its instances."""
    name: str
    passed: bool
    instances: int = 0
    witness: Optional[Dict[str, Any]] = None
    detail: str = ""
