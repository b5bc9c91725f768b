"""Coarse-grid operators of circulant systems.

A_k = Z^T P* A P Z with A = C_n(a), P = C_n(p) and Z the first n_alpha columns
of the shift matrix Z_{n,alpha}. The symbol of P* A P is g = |q|^2 f, and the
coarse operator stays circulant with eigenvalues given by the gcd fold of g.
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy import fft as sp_fft
from scipy import linalg

from .core import DenseMatrix, MultiIndex, max_abs_diff, multiset_gap
from .errors import DomainError
from .jacobi import DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE
from .logger import get_logger
from .models import MatrixKind, Provenance, SpectrumResult, StructuredMatrix
from .spectra import circulant_eigs, gram_sqrt, svd_oracle
from .structured import ShiftPattern, ShiftVariant, circulant, gcd_data, shift_matrix
from .symbols import (
    SymbolSpec,
    autocorrelate,
    circulant_column,
    eval_symbol_grid,
    multiply,
)

logger = get_logger(__name__)

PSD_TOLERANCE = 1e-10
STRUCTURE_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class ProjectionSetup:
    n: int
    alpha: int
    a_fine: np.ndarray
    p_coeffs: np.ndarray
    f_symbol: Optional[SymbolSpec] = None
    q_symbol: Optional[SymbolSpec] = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise DomainError(f"projection needs n >= 2, got {self.n}")
        if not 1 <= self.alpha < self.n:
            raise DomainError(f"projection needs 1 <= alpha < n, got alpha={self.alpha}, n={self.n}")
        for name in ("a_fine", "p_coeffs"):
            value = np.asarray(getattr(self, name), dtype=np.complex128).ravel()
            if value.size != self.n:
                raise DomainError(f"{name} needs {self.n} entries, got {value.size}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_symbols(cls, f: SymbolSpec, q: SymbolSpec, n: int, alpha: int = 2) -> "ProjectionSetup":
        """Wrap the symbols of A and P modulo n into circulant columns."""
        if f.d != 1 or q.d != 1:
            raise DomainError("coarse-grid projection is defined for one-level symbols")
        size = MultiIndex.of(n)
        return cls(
            n=n,
            alpha=alpha,
            a_fine=circulant_column(f, size),
            p_coeffs=circulant_column(q, size),
            f_symbol=f,
            q_symbol=q,
        )

    def symbols(self):
        """(f, q); columns without stored symbols are read on the centred index range."""
        f = self.f_symbol if self.f_symbol is not None else centred_symbol(self.a_fine)
        q = self.q_symbol if self.q_symbol is not None else centred_symbol(self.p_coeffs)
        return f, q

    @property
    def divisible(self) -> bool:
        return self.n % self.alpha == 0

    @property
    def g(self) -> int:
        return math.gcd(self.n, self.alpha)

    @property
    def coarse_size(self) -> int:
        return self.n // self.g

    @property
    def coarsening(self) -> bool:
        return self.coarse_size < self.n


@dataclass
class FoldProbe:
    x0: float
    f_at_x0: float
    f_at_x0_plus_pi: float
    fold_minima: Dict[int, float]
    fold_has_zero: Dict[int, bool]
    tolerance: float = PSD_TOLERANCE

    @property
    def mirrored_zero(self) -> bool:
        """Both x0 and x0 + pi are zeros of f."""
        return self.f_at_x0 <= self.tolerance and self.f_at_x0_plus_pi <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x0": self.x0,
            "f_at_x0": self.f_at_x0,
            "f_at_x0_plus_pi": self.f_at_x0_plus_pi,
            "mirrored_zero": self.mirrored_zero,
            "fold_minima": {str(k): v for k, v in self.fold_minima.items()},
            "fold_has_zero": {str(k): v for k, v in self.fold_has_zero.items()},
        }


@dataclass
class MultigridReport:
    setup: ProjectionSetup
    structure_defect: float
    eig_formula: np.ndarray
    eig_direct: np.ndarray
    eig_gap: float
    singvals_formula: SpectrumResult
    singvals_oracle: SpectrumResult
    singval_gap: float
    probe: FoldProbe

    def to_dict(self) -> Dict[str, Any]:
        return {
            "setup": {
                "n": self.setup.n,
                "alpha": self.setup.alpha,
                "coarse_size": self.setup.coarse_size,
                "divisible": self.setup.divisible,
                "coarsening": self.setup.coarsening,
            },
            "structure_defect": self.structure_defect,
            "projected_eigs": [float(v) for v in self.eig_formula],
            "direct_eigs": [float(v) for v in self.eig_direct],
            "eig_gap": self.eig_gap,
            "projector_singvals": self.singvals_formula.to_dict(),
            "oracle_singvals": self.singvals_oracle.to_dict(),
            "singval_gap": self.singval_gap,
            "fold_probe": self.probe.to_dict(),
        }


def check_psd(setup: ProjectionSetup, tolerance: float = PSD_TOLERANCE) -> np.ndarray:
    """Eigenvalues of A_n as real numbers; DomainError unless A_n is Hermitian PSD."""
    eigs = circulant_eigs(setup.a_fine, setup.n)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if np.max(np.abs(eigs.imag)) > tolerance * scale:
        raise DomainError("A_n is not Hermitian: its circulant eigenvalues are not real")
    if eigs.real.min() < -tolerance:
        raise DomainError(f"A_n is not positive semidefinite: smallest eigenvalue {eigs.real.min():.3e}")
    return eigs.real


def centred_symbol(column) -> SymbolSpec:
    """Circulant column a_0..a_{n-1} as coefficients on -(n-1)//2 .. n//2."""
    column = np.asarray(column, dtype=np.complex128).ravel()
    n = column.size
    keys = [(j if j <= n // 2 else j - n,) for j in range(n)]
    return SymbolSpec(1, dict(zip(keys, column)))


def projected_symbol(setup: ProjectionSetup) -> SymbolSpec:
    """g = |q|^2 f, computed on coefficients."""
    f, q = setup.symbols()
    return multiply(autocorrelate(q), f)


def _coarse_selection(setup: ProjectionSetup) -> DenseMatrix:
    pattern = ShiftPattern(MultiIndex.of(setup.n), MultiIndex.of(setup.alpha), ShiftVariant.FIRST_N_ALPHA)
    return shift_matrix(pattern)


def _galerkin(setup: ProjectionSetup) -> DenseMatrix:
    a = circulant(setup.a_fine, setup.n).matrix
    p = circulant(setup.p_coeffs, setup.n).matrix
    z = _coarse_selection(setup)
    return z.T @ (p.conj().T @ a @ p) @ z


def structure_defect(matrix: DenseMatrix) -> float:
    """Largest deviation from the circulant built on the first column."""
    matrix = np.asarray(matrix)
    return max_abs_diff(matrix, circulant(matrix[:, 0], matrix.shape[0]).matrix)


def project(setup: ProjectionSetup) -> StructuredMatrix:
    if not setup.divisible:
        raise DomainError(f"alpha={setup.alpha} does not divide n={setup.n}; use project_general")
    return project_general(setup)


def project_general(
    setup: ProjectionSetup,
    structure_tolerance: float = STRUCTURE_TOLERANCE,
    psd_tolerance: float = PSD_TOLERANCE,
) -> StructuredMatrix:
    check_psd(setup, psd_tolerance)
    coarse = _galerkin(setup)
    defect = structure_defect(coarse)
    if not setup.coarsening:
        logger.warning(f"gcd(n={setup.n}, alpha={setup.alpha}) = 1: projection keeps the full size")
    kind = MatrixKind.CIRCULANT
    if defect > structure_tolerance:
        logger.warning(f"Projected operator is not circulant: defect {defect:.3e}")
        kind = MatrixKind.OTHER
    logger.debug(f"Projected n={setup.n} alpha={setup.alpha} to size {setup.coarse_size}, defect {defect:.3e}")
    return StructuredMatrix(coarse, kind, MultiIndex.of(setup.coarse_size), MultiIndex.of(setup.alpha))


def projected_eigs(setup: ProjectionSetup) -> np.ndarray:
    """(1/G) sum_{l<G} g((x_j + 2 pi l) / G) with G = gcd(n, alpha), x_j = 2 pi j / n_alpha."""
    data = gcd_data(setup.n, setup.alpha)
    x = 2.0 * np.pi * np.arange(data.n_alpha) / data.n_alpha
    shifts = 2.0 * np.pi * np.arange(data.g)
    points = ((x[None, :] + shifts[:, None]) / data.g).ravel()
    values = eval_symbol_grid(projected_symbol(setup), points).real
    return values.reshape(data.g, data.n_alpha).sum(axis=0) / data.g


def projector_singvals(setup: ProjectionSetup, psd_tolerance: float = PSD_TOLERANCE) -> SpectrumResult:
    """Singular values of (P* A P)^(1/2) Z from the folded eigenvalues."""
    check_psd(setup, psd_tolerance)
    eigs = projected_eigs(setup)
    return SpectrumResult.padded(np.sqrt(np.maximum(eigs, 0.0)), setup.coarse_size, Provenance.CLOSED_FORM)


def circulant_sqrt(a, n: int) -> DenseMatrix:
    """Circulant square root of a PSD circulant, taken on its eigenvalues."""
    eigs = np.maximum(circulant_eigs(a, n).real, 0.0)
    return circulant(sp_fft.fft(np.sqrt(eigs), norm="forward"), n).matrix


def projector_matrix(
    setup: ProjectionSetup,
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    psd_tolerance: float = PSD_TOLERANCE,
) -> DenseMatrix:
    """(P* A P)^(1/2) Z formed explicitly as the Gram root of A^(1/2) P."""
    check_psd(setup, psd_tolerance)
    root_a = circulant_sqrt(setup.a_fine, setup.n)
    p = circulant(setup.p_coeffs, setup.n).matrix
    root = gram_sqrt([root_a @ p], tolerance=tolerance, max_sweeps=max_sweeps)
    return root @ _coarse_selection(setup)


def alpha_fold_min(f: SymbolSpec, alpha: int, n: int) -> float:
    """Minimum of (1/alpha) sum_l f((x + 2 pi l) / alpha) over x_j = 2 pi j / k, k = max(1, n // alpha)."""
    k = max(1, n // alpha)
    x = 2.0 * np.pi * np.arange(k) / k
    shifts = 2.0 * np.pi * np.arange(alpha)
    points = ((x[None, :] + shifts[:, None]) / alpha).ravel()
    values = eval_symbol_grid(f, points).real.reshape(alpha, k).sum(axis=0) / alpha
    return float(values.min())


def pathological_symmetry_probe(
    f: SymbolSpec,
    x0: float,
    n: int,
    alt_alpha: int = 3,
    tolerance: float = PSD_TOLERANCE,
) -> FoldProbe:
    """Compare the alpha=2 fold of f with the alt_alpha fold on the coarse grid."""
    if f.d != 1:
        raise DomainError("fold probe is defined for one-level symbols")
    if alt_alpha < 1 or n < 1:
        raise DomainError(f"fold probe needs n >= 1 and alpha >= 1, got n={n}, alpha={alt_alpha}")
    at = eval_symbol_grid(f, np.array([x0, x0 + np.pi])).real
    minima = {alpha: alpha_fold_min(f, alpha, n) for alpha in (2, alt_alpha)}
    has_zero = {alpha: value <= tolerance for alpha, value in minima.items()}
    return FoldProbe(
        x0=float(x0),
        f_at_x0=float(at[0]),
        f_at_x0_plus_pi=float(at[1]),
        fold_minima=minima,
        fold_has_zero=has_zero,
        tolerance=tolerance,
    )


def multigrid_report(
    setup: ProjectionSetup,
    structure_tolerance: float = STRUCTURE_TOLERANCE,
    alt_alpha: int = 3,
    x0: float = 0.0,
    oracle: Optional[Dict[str, Any]] = None,
    psd_tolerance: float = PSD_TOLERANCE,
) -> MultigridReport:
    oracle = dict(oracle or {})
    options = {k: oracle[k] for k in ("tolerance", "max_sweeps") if k in oracle}
    coarse = project_general(setup, structure_tolerance, psd_tolerance)
    eig_formula = np.sort(projected_eigs(setup))
    eig_direct = linalg.eigvalsh((coarse.matrix + coarse.matrix.conj().T) / 2.0)
    singvals = projector_singvals(setup, psd_tolerance)
    root = projector_matrix(setup, psd_tolerance=psd_tolerance, **options)
    oracle_values = svd_oracle(root, method=oracle.get("method", "jacobi"), **options)
    probe = pathological_symmetry_probe(setup.symbols()[0], x0, setup.n, alt_alpha, psd_tolerance)
    report = MultigridReport(
        setup=setup,
        structure_defect=structure_defect(coarse.matrix),
        eig_formula=eig_formula,
        eig_direct=np.sort(eig_direct),
        eig_gap=multiset_gap(eig_formula, eig_direct),
        singvals_formula=singvals,
        singvals_oracle=oracle_values,
        singval_gap=multiset_gap(singvals.values, oracle_values.values),
        probe=probe,
    )
    logger.info(
        f"Multigrid n={setup.n} alpha={setup.alpha}: defect {report.structure_defect:.3e}, "
        f"eig gap {report.eig_gap:.3e}, singular value gap {report.singval_gap:.3e}"
    )
    return report
