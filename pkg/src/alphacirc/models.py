from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .core import MultiIndex
from .errors import DomainError


class MatrixKind(str, Enum):
    ALPHA_CIRCULANT = "alpha_circulant"
    ALPHA_TOEPLITZ = "alpha_toeplitz"
    CIRCULANT = "circulant"
    TOEPLITZ = "toeplitz"
    SHIFT = "shift"
    FOURIER = "fourier"
    OTHER = "other"


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"
    REDUCTION = "reduction"


@dataclass(frozen=True, eq=False)
class StructuredMatrix:
    matrix: np.ndarray
    kind: MatrixKind
    n: MultiIndex
    alpha: Optional[MultiIndex] = None

    def __post_init__(self) -> None:
        square = self.kind not in (MatrixKind.SHIFT, MatrixKind.OTHER)
        if square and self.matrix.shape != (self.n.size, self.n.size):
            raise DomainError(
                f"{self.kind.value} matrix has shape {self.matrix.shape}, expected {self.n.size}x{self.n.size}"
            )

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    values: np.ndarray
    structural_zero_count: int
    provenance: Provenance

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DomainError("singular values must form a vector")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise DomainError("singular values must be finite and nonnegative")
        object.__setattr__(self, "values", np.sort(values)[::-1].copy())

    @classmethod
    def padded(cls, nonzero_candidates, total: int, provenance: Provenance) -> "SpectrumResult":
        """Candidates followed by total - len(candidates) structural zeros."""
        candidates = np.asarray(nonzero_candidates, dtype=np.float64)
        zeros = total - candidates.size
        if zeros < 0:
            raise DomainError(f"{candidates.size} candidates exceed total size {total}")
        return cls(np.concatenate([candidates, np.zeros(zeros)]), zeros, provenance)

    @property
    def min_dim(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "provenance": self.provenance.value,
            "min_dim": self.min_dim,
            "structural_zero_count": self.structural_zero_count,
            "values": [float(v) for v in self.values],
        }


@dataclass
class CheckRecord:
    check: str
    n: int
    alpha: int
    seed: int
    residual: float
    tolerance: float
    passed: bool


@dataclass
class LoggingSettings:
    level: str = "INFO"
    dir: str = "./logs"
    to_file: bool = False


@dataclass
class OracleSettings:
    method: str = "jacobi"
    tolerance: float = 1e-14
    max_sweeps: int = 60
    max_dim: int = 2048


@dataclass
class VerifySettings:
    max_n: int = 20
    max_alpha: int = 5
    closed_form_max_n: int = 24
    seeds_per_case: int = 5
    tolerance: float = 1e-10
    identity_tolerance: float = 1e-12
    workers: int = 4


@dataclass
class QuadratureSettings:
    initial_points: int = 4096
    max_points: int = 65536
    tolerance: float = 1e-9
    max_total_points: int = 1 << 24
    initial_points_per_level: int = 256


@dataclass
class DistributionSettings:
    test_functions: List[Dict[str, Any]] = field(
        default_factory=lambda: [
            {"kind": "hat", "center": 1.4142135623730951, "half_width": 0.5},
            {"kind": "gaussian_bump", "center": 1.0, "scale": 0.5, "radius": 1.5},
            {"kind": "clamp", "cap": 5.0},
        ]
    )
    threshold: float = 0.02
    oracle_method: str = "lapack"


@dataclass
class MultigridSettings:
    psd_tolerance: float = 1e-10
    structure_tolerance: float = 1e-10
    alternative_alpha: int = 3


@dataclass
class OutputSettings:
    float_format: str = ".17g"


@dataclass
class AppConfig:
    logging: LoggingSettings = field(default_factory=LoggingSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    distribution: DistributionSettings = field(default_factory=DistributionSettings)
    multigrid: MultigridSettings = field(default_factory=MultigridSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
