"""Singular value distribution experiments.

Sigma(F, A) = mean of F over the singular values of A is compared with the
limit (1/alpha-hat) (2 pi)^-d int F(theta-hat(x)) dx + (1 - 1/alpha-hat) F(0),
where theta-hat is the square root of the folded square of the symbol.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core import IndexLike, MultiIndex, as_multi_index, shift_vector, size_vector
from .errors import ConfigurationError, DomainError, QuadratureError
from .logger import get_logger
from .models import MatrixKind, Provenance, SpectrumResult
from .spectra import alpha_circulant_singvals, closed_form_singvals, svd_oracle, zero_alpha_reduction
from .structured import alpha_circulant, alpha_toeplitz, gcd_data, reduce_alpha
from .symbols import SymbolSpec, ThetaSymbol, circulant_column, folded_values, iter_points, symbol_from_vector

logger = get_logger(__name__)

TREND_SLACK = 1e-12
DEFAULT_THRESHOLD = 0.02


class FunctionKind(str, Enum):
    HAT = "hat"
    GAUSSIAN_BUMP = "gaussian_bump"
    CLAMP = "clamp"


class SpectrumMode(str, Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    kind: FunctionKind
    center: float = 0.0
    width: float = 1.0
    radius: float = 3.0
    cap: float = 1.0

    def __post_init__(self) -> None:
        params = (self.center, self.width, self.radius, self.cap)
        if any(p < 0 for p in params):
            raise ConfigurationError(f"test function parameters must be nonnegative: {self}")
        if self.kind is not FunctionKind.CLAMP and self.width <= 0:
            raise ConfigurationError(f"{self.kind.value} needs a positive width")

    @classmethod
    def hat(cls, center: float, half_width: float) -> "TestFunction":
        return cls(FunctionKind.HAT, center=center, width=half_width)

    @classmethod
    def gaussian_bump(cls, center: float, scale: float, radius: float) -> "TestFunction":
        return cls(FunctionKind.GAUSSIAN_BUMP, center=center, width=scale, radius=radius)

    @classmethod
    def clamp(cls, cap: float) -> "TestFunction":
        return cls(FunctionKind.CLAMP, cap=cap)

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> "TestFunction":
        kind = str(raw.get("kind", "")).lower()
        try:
            if kind == "hat":
                return cls.hat(float(raw["center"]), float(raw["half_width"]))
            if kind in ("gaussian_bump", "gauss"):
                return cls.gaussian_bump(float(raw["center"]), float(raw["scale"]), float(raw.get("radius", 3.0)))
            if kind == "clamp":
                return cls.clamp(float(raw["cap"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid {kind} test function {dict(raw)}: {exc}") from None
        raise ConfigurationError(f"unknown test function kind {kind!r}")

    @classmethod
    def parse(cls, token: str) -> "TestFunction":
        """Parse ``hat:c,w``, ``gauss:c,s,r`` or ``clamp:c``."""
        kind, _, args = token.partition(":")
        try:
            values = [float(v) for v in args.split(",") if v.strip()]
        except ValueError:
            raise ConfigurationError(f"malformed test function {token!r}") from None
        names = {"hat": ["center", "half_width"], "gauss": ["center", "scale", "radius"], "clamp": ["cap"]}
        keys = names.get(kind.strip().lower())
        if keys is None or len(values) != len(keys):
            raise ConfigurationError(f"malformed test function {token!r}; use hat:c,w gauss:c,s,r or clamp:c")
        return cls.from_mapping({"kind": kind.strip().lower(), **dict(zip(keys, values))})

    @property
    def label(self) -> str:
        if self.kind is FunctionKind.HAT:
            return f"hat({self.center:g},{self.width:g})"
        if self.kind is FunctionKind.GAUSSIAN_BUMP:
            return f"gauss({self.center:g},{self.width:g},{self.radius:g})"
        return f"clamp({self.cap:g})"

    @property
    def sup_norm(self) -> float:
        return self.cap if self.kind is FunctionKind.CLAMP else 1.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind is FunctionKind.HAT:
            return np.maximum(0.0, 1.0 - np.abs(x - self.center) / self.width)
        if self.kind is FunctionKind.CLAMP:
            return np.minimum(x, self.cap)
        # bump shifted and rescaled so that it reaches 0 continuously at the truncation radius
        edge = math.exp(-0.5 * (self.radius / self.width) ** 2)
        bump = np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        inside = np.abs(x - self.center) < self.radius
        return np.where(inside, np.maximum(bump - edge, 0.0) / (1.0 - edge), 0.0)


@dataclass
class DistributionRecord:
    n: MultiIndex
    n_hat: int
    values: Dict[str, float]
    errors: Dict[str, float]
    provenance: Provenance


@dataclass
class DistributionReport:
    family: str
    alpha: MultiIndex
    functions: List[str]
    records: List[DistributionRecord]
    limits: Dict[str, float]
    limit_converged: Dict[str, bool]
    trend: Dict[str, bool]
    threshold: float = DEFAULT_THRESHOLD

    @property
    def decreasing(self) -> bool:
        return all(self.trend.values())

    @property
    def passed(self) -> Dict[str, bool]:
        """Error decreased over the sweep and ended below the threshold."""
        final = self.final_errors()
        return {label: self.trend[label] and final.get(label, math.inf) < self.threshold for label in self.functions}

    def final_errors(self) -> Dict[str, float]:
        return dict(self.records[-1].errors) if self.records else {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "alpha": list(self.alpha),
            "limits": self.limits,
            "limit_converged": self.limit_converged,
            "trend": self.trend,
            "decreasing": self.decreasing,
            "threshold": self.threshold,
            "passed": self.passed,
            "records": [
                {
                    "n": list(r.n),
                    "n_hat": r.n_hat,
                    "provenance": r.provenance.value,
                    "sigma_functional": r.values,
                    "error": r.errors,
                }
                for r in self.records
            ],
        }


@dataclass
class GcdProbeRecord:
    n: int
    g: int
    n_alpha: int
    structural_zeros: int
    values: Dict[str, float]

    @property
    def coprime(self) -> bool:
        return self.g == 1


@dataclass
class GcdProbeReport:
    alpha: int
    functions: List[str]
    records: List[GcdProbeRecord] = field(default_factory=list)

    def trajectory(self, coprime: bool) -> List[GcdProbeRecord]:
        return [r for r in self.records if r.coprime == coprime]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "records": [
                {
                    "n": r.n,
                    "gcd": r.g,
                    "n_alpha": r.n_alpha,
                    "structural_zeros": r.structural_zeros,
                    "coprime": r.coprime,
                    "sigma_functional": r.values,
                }
                for r in self.records
            ],
        }


def sigma_functional(F: TestFunction, spectrum: SpectrumResult, min_dim: int) -> float:
    if spectrum.min_dim != min_dim:
        raise DomainError(f"spectrum has {spectrum.min_dim} values, expected {min_dim}")
    if min_dim == 0:
        raise DomainError("empty spectrum")
    return float(np.mean(F(spectrum.values)))


def equal_distribution_gap(spectrum_a: SpectrumResult, spectrum_b: SpectrumResult, F: TestFunction) -> float:
    if spectrum_a.min_dim != spectrum_b.min_dim:
        raise DomainError(f"spectra differ in size: {spectrum_a.min_dim} vs {spectrum_b.min_dim}")
    return abs(sigma_functional(F, spectrum_a, spectrum_a.min_dim) - sigma_functional(F, spectrum_b, spectrum_b.min_dim))


def degenerate_bound(F: TestFunction, m: int) -> Tuple[float, float]:
    """Two-sided bound on Sigma(F) when at most n-hat/m singular values can be nonzero."""
    centre = (1.0 - 1.0 / m) * float(F(0.0))
    slack = F.sup_norm / m
    return centre - slack, centre + slack


def _grid_mean(F: TestFunction, th: ThetaSymbol, points_per_level: int) -> float:
    axis = -np.pi + 2.0 * np.pi * np.arange(points_per_level) / points_per_level
    points = iter_points([axis] * th.alpha.d)
    return float(np.mean(F(np.sqrt(folded_values(th, points)))))


def analytic_limit_estimate(
    F: TestFunction,
    th: ThetaSymbol,
    initial_points: int = 4096,
    max_points: int = 65536,
    tolerance: float = 1e-9,
    max_total_points: int = 1 << 24,
    initial_points_per_level: int = 256,
) -> Tuple[float, bool, int]:
    """(value, converged, points per level) of the limit functional under grid doubling.

    One-level grids start at ``initial_points``; multilevel grids start at
    ``initial_points_per_level`` per level and stop at ``max_total_points`` overall.
    """
    d = th.alpha.d
    weight = 1.0 / th.alpha.size
    if d == 1:
        points, cap = initial_points, max_points
    else:
        cap = int(round(max_total_points ** (1.0 / d)))
        while cap ** d > max_total_points:
            cap -= 1
        points = min(initial_points_per_level, cap)

    def limit_at(m: int) -> float:
        return weight * _grid_mean(F, th, m) + (1.0 - weight) * float(F(0.0))

    previous = limit_at(points)
    while 2 * points <= cap:
        points *= 2
        current = limit_at(points)
        if abs(current - previous) < tolerance:
            return current, True, points
        previous = current
    return previous, False, points


def analytic_limit(
    F: TestFunction,
    th: ThetaSymbol,
    initial_points: int = 4096,
    max_points: int = 65536,
    tolerance: float = 1e-9,
    max_total_points: int = 1 << 24,
    initial_points_per_level: int = 256,
) -> float:
    value, converged, points = analytic_limit_estimate(
        F, th, initial_points, max_points, tolerance, max_total_points, initial_points_per_level
    )
    if not converged:
        raise QuadratureError(f"limit of {F.label} did not settle to {tolerance:g} with {points} points per level")
    return value


def _spectrum_for_size(
    s: SymbolSpec,
    n: MultiIndex,
    alpha: MultiIndex,
    family: str,
    mode: SpectrumMode,
    oracle: Mapping[str, Any],
) -> SpectrumResult:
    has_zero = not alpha.is_positive()
    max_dim = int(oracle.get("max_dim", 2048))
    options = {k: oracle[k] for k in ("tolerance", "max_sweeps") if k in oracle}
    method = oracle.get("method", "jacobi")

    if family == "circulant":
        a = circulant_column(s, n)
        if mode is SpectrumMode.CLOSED_FORM:
            return closed_form_singvals(a, n, alpha, **options)
        matrix = alpha_circulant(a, n, alpha).matrix
    else:
        if has_zero and mode is SpectrumMode.CLOSED_FORM:
            return zero_alpha_reduction(s, n, alpha, MatrixKind.TOEPLITZ, **options)
        matrix = alpha_toeplitz(s, n, alpha).matrix

    if n.size > max_dim:
        raise DomainError(f"oracle SVD capped at n-hat <= {max_dim}, got {n.size}")
    return svd_oracle(matrix, method=method, **options)


def distribution_experiment(
    s: SymbolSpec,
    alpha: IndexLike,
    sizes: Sequence[IndexLike],
    functions: Sequence[TestFunction],
    mode: Union[SpectrumMode, str] = SpectrumMode.ORACLE,
    family: str = "toeplitz",
    quadrature: Optional[Mapping[str, Any]] = None,
    oracle: Optional[Mapping[str, Any]] = None,
    workers: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
) -> DistributionReport:
    mode = SpectrumMode(mode)
    alpha = as_multi_index(alpha)
    sizes = [size_vector(n) for n in sizes]
    if not sizes:
        raise DomainError("distribution experiment needs at least one size")
    if not functions:
        raise DomainError("distribution experiment needs at least one test function")
    for n in sizes:
        if n.d != s.d:
            raise DomainError(f"size ({n}) does not match the {s.d}-level symbol")
    shift_vector(alpha, s.d)
    if any(b.size <= a.size for a, b in zip(sizes, sizes[1:])):
        raise DomainError("sizes must be strictly increasing in n-hat")
    if family not in ("toeplitz", "circulant"):
        raise ConfigurationError(f"unknown matrix family {family!r}")

    degenerate = not alpha.is_positive()
    if family == "circulant" and not degenerate and any(a != 1 for a in alpha):
        raise ConfigurationError(
            f"alpha-circulant family with alpha=({alpha}) has no joint distribution; use the gcd regime probe"
        )

    labels = [F.label for F in functions]
    limits: Dict[str, float] = {}
    converged: Dict[str, bool] = {}
    if degenerate:
        for F in functions:
            limits[F.label], converged[F.label] = float(F(0.0)), True
    else:
        theta = ThetaSymbol.from_symbol(s, alpha)
        for F in functions:
            value, ok, points = analytic_limit_estimate(F, theta, **dict(quadrature or {}))
            if not ok:
                logger.warning(f"Limit of {F.label} not settled at {points} points per level; using finest estimate")
            limits[F.label], converged[F.label] = value, ok

    logger.info(f"Distribution experiment: {family}, alpha=({alpha}), {len(sizes)} sizes, mode={mode.value}")

    def run(n: MultiIndex) -> DistributionRecord:
        spectrum = _spectrum_for_size(s, n, alpha, family, mode, dict(oracle or {}))
        values = {F.label: sigma_functional(F, spectrum, n.size) for F in functions}
        errors = {label: abs(values[label] - limits[label]) for label in labels}
        logger.debug(f"n=({n}): {values}")
        return DistributionRecord(n=n, n_hat=n.size, values=values, errors=errors, provenance=spectrum.provenance)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(pool.map(run, sizes))

    trend = {label: records[-1].errors[label] <= records[0].errors[label] + TREND_SLACK for label in labels}
    family_text = f"{family} symbol={dict(s.coeffs)} alpha=({alpha})"
    return DistributionReport(family_text, alpha, labels, records, limits, converged, trend, threshold)


def gcd_regime_probe(
    a: Union[SymbolSpec, Sequence[complex], np.ndarray],
    alpha: int,
    sizes: Sequence[int],
    functions: Sequence[TestFunction],
) -> GcdProbeReport:
    """Closed-form spectra of C_{n,alpha} along a size sweep, tagged by gcd(n, alpha)."""
    if alpha < 1:
        raise DomainError(f"gcd regime probe needs alpha >= 1, got {alpha}")
    if not isinstance(a, SymbolSpec):
        vector = np.asarray(a, dtype=np.complex128).ravel()
        a = symbol_from_vector(vector, MultiIndex.of(vector.size))
    report = GcdProbeReport(alpha=alpha, functions=[F.label for F in functions])
    for n in sizes:
        column = circulant_column(a, MultiIndex.of(n))
        spectrum = alpha_circulant_singvals(column, n, alpha)
        reduced = reduce_alpha(alpha, n)
        data = gcd_data(n, reduced) if reduced else None
        g = data.g if data else n
        n_alpha = data.n_alpha if data else 1
        report.records.append(
            GcdProbeRecord(
                n=n,
                g=g,
                n_alpha=n_alpha,
                structural_zeros=spectrum.structural_zero_count,
                values={F.label: sigma_functional(F, spectrum, n) for F in functions},
            )
        )
    return report
