"""Singular values of alpha-circulant matrices.

Closed forms fold the squared circulant eigenvalue moduli d_s = |p(2 pi s / n)|^2
over the (n, alpha) cosets of n_alpha. Shift vectors with zero components go
through the Gram square-root reduction, and every closed form can be checked
against :func:`svd_oracle`, a one-sided Jacobi SVD.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sp_fft
from scipy import linalg

from .core import (
    DenseMatrix,
    IndexLike,
    MultiIndex,
    as_dense,
    as_multi_index,
    max_abs_diff,
    shift_vector,
    size_vector,
)
from .errors import DomainError
from .jacobi import DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE, column_norms, orthogonalize_columns
from .logger import get_logger
from .models import MatrixKind, Provenance, SpectrumResult, StructuredMatrix
from .structured import (
    ShiftPattern,
    SymbolLike,
    alpha_circulant,
    alpha_toeplitz,
    fourier_matrix,
    gcd_data,
    reduce_alpha,
    shift_matrix,
)
from .symbols import as_symbol, eval_symbol_grid, symbol_from_vector

logger = get_logger(__name__)

ORACLE_METHODS = ("jacobi", "lapack")


@dataclass(frozen=True, eq=False)
class DiagonalFold:
    d_values: np.ndarray
    g: int
    n_alpha: int

    def folded(self) -> np.ndarray:
        """Sum of the (n, alpha) slices of length n_alpha."""
        return self.d_values.reshape(self.g, self.n_alpha).sum(axis=0)


def _vector(a, length: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size != length:
        raise DomainError(f"expected {length} coefficients, got {a.size}")
    return a


def circulant_eigs(a, n: int) -> np.ndarray:
    """p(2 pi j / n), j = 0..n-1, with p(t) = sum_k a_k exp(ikt)."""
    return sp_fft.ifft(_vector(a, n), norm="forward")


def multilevel_circulant_eigs(a, n: IndexLike) -> np.ndarray:
    """sum_j a_j exp(2 pi i <j, k/n>) over the index box, lexicographic in k."""
    n = size_vector(n)
    grid = _vector(a, n.size).reshape(n.entries)
    return sp_fft.ifftn(grid, norm="forward").ravel()


def diagonal_fold(a, n: int, alpha: int) -> DiagonalFold:
    data = gcd_data(n, reduce_alpha(alpha, n))
    d_values = np.abs(circulant_eigs(a, n)) ** 2
    return DiagonalFold(d_values=d_values, g=data.g, n_alpha=data.n_alpha)


def alpha_circulant_singvals(a, n: int, alpha: int) -> SpectrumResult:
    a = _vector(a, n)
    reduced = reduce_alpha(alpha, n)
    if reduced == 0:
        return zero_alpha_reduction(a, MultiIndex.of(n), MultiIndex.of(0), MatrixKind.CIRCULANT)
    fold = diagonal_fold(a, n, reduced)
    return SpectrumResult.padded(np.sqrt(fold.folded()), n, Provenance.CLOSED_FORM)


def alpha_circulant_singvals_symbol(a, n: int, alpha: int) -> SpectrumResult:
    a = _vector(a, n)
    reduced = reduce_alpha(alpha, n)
    if reduced == 0:
        return zero_alpha_reduction(a, MultiIndex.of(n), MultiIndex.of(0), MatrixKind.CIRCULANT)
    data = gcd_data(n, reduced)
    p = symbol_from_vector(a, MultiIndex.of(n))
    x = 2.0 * np.pi * np.arange(data.n_alpha) / data.n_alpha
    shifts = 2.0 * np.pi * np.arange(data.g)
    points = ((x[None, :] + shifts[:, None]) / data.g).ravel()
    squared = np.abs(eval_symbol_grid(p, points)) ** 2
    values = np.sqrt(squared.reshape(data.g, data.n_alpha).sum(axis=0))
    return SpectrumResult.padded(values, n, Provenance.CLOSED_FORM)


def svd_oracle(
    a,
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    method: str = "jacobi",
) -> SpectrumResult:
    if isinstance(a, StructuredMatrix):
        a = a.matrix
    matrix = as_dense(a)
    if method not in ORACLE_METHODS:
        raise DomainError(f"unknown oracle method {method!r}")
    rows, cols = matrix.shape
    if min(rows, cols) == 0:
        return SpectrumResult(np.zeros(0), 0, Provenance.ORACLE)
    if method == "lapack":
        return SpectrumResult(linalg.svdvals(matrix), 0, Provenance.ORACLE)
    if rows < cols:
        matrix = matrix.conj().T
    # A P = Q R with column pivoting; R* shares the singular values of A
    r, _ = linalg.qr(matrix, mode="r", pivoting=True)
    u, _, _ = orthogonalize_columns(r[: matrix.shape[1]].conj().T, tolerance=tolerance, max_sweeps=max_sweeps)
    return SpectrumResult(column_norms(u), 0, Provenance.ORACLE)


def gram_sqrt(
    blocks: Sequence[DenseMatrix],
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> DenseMatrix:
    """(sum_j C_j* C_j)^(1/2), from the Jacobi SVD of the stacked blocks."""
    if not blocks:
        raise DomainError("gram_sqrt needs at least one block")
    blocks = [as_dense(b, "block") for b in blocks]
    cols = {b.shape[1] for b in blocks}
    if len(cols) != 1:
        raise DomainError(f"blocks disagree on column count: {sorted(cols)}")
    u, v, _ = orthogonalize_columns(np.vstack(blocks), tolerance=tolerance, max_sweeps=max_sweeps, accumulate_v=True)
    root = (v * column_norms(u)[None, :]) @ v.conj().T
    return (root + root.conj().T) / 2.0


def _zero_blocks(source, n: MultiIndex, alpha: MultiIndex, kind: MatrixKind, zero_levels, positive_levels) -> List[DenseMatrix]:
    n_zero = MultiIndex(n.take(zero_levels)) if zero_levels else None
    n_plus = MultiIndex(n.take(positive_levels)) if positive_levels else None
    alpha_plus = MultiIndex(alpha.take(positive_levels)) if positive_levels else None
    count = n_zero.size

    blocks = []
    if kind is MatrixKind.CIRCULANT:
        grid = _vector(source, n.size).reshape(n.entries)
        grid = np.transpose(grid, list(zero_levels) + list(positive_levels)).reshape((count,) + tuple(n.take(positive_levels)))
        for j in range(count):
            if n_plus is None:
                blocks.append(np.array([[grid[j]]], dtype=np.complex128))
            else:
                blocks.append(alpha_circulant(grid[j].ravel(), n_plus, alpha_plus).matrix)
        return blocks

    s = as_symbol(source, n.d)
    for j in np.ndindex(*n_zero.entries):
        if n_plus is None:
            blocks.append(np.array([[s.get(j)]], dtype=np.complex128))
        else:
            blocks.append(alpha_toeplitz(s.restrict(zero_levels, j), n_plus, alpha_plus).matrix)
    return blocks


def zero_alpha_reduction(
    source: Union[np.ndarray, Sequence[complex], SymbolLike],
    n: IndexLike,
    alpha: IndexLike,
    kind: MatrixKind = MatrixKind.CIRCULANT,
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SpectrumResult:
    """sqrt(n-hat[0]) times the singular values of (sum_j C_j* C_j)^(1/2), padded with zeros.

    ``source`` is the lexicographic first column for circulant kinds and a
    coefficient map for Toeplitz kinds. Zero-shift levels are moved outermost
    and each block C_j is the structured matrix over the remaining levels.
    """
    n = size_vector(n)
    alpha = shift_vector(alpha, n.d)
    if kind in (MatrixKind.CIRCULANT, MatrixKind.ALPHA_CIRCULANT):
        kind = MatrixKind.CIRCULANT
        alpha = MultiIndex(tuple(reduce_alpha(ak, nk) for ak, nk in zip(alpha, n)))
    elif kind in (MatrixKind.TOEPLITZ, MatrixKind.ALPHA_TOEPLITZ):
        kind = MatrixKind.TOEPLITZ
    else:
        raise DomainError(f"zero-shift reduction does not apply to {kind.value} matrices")

    zero_levels = [k for k in range(n.d) if alpha[k] == 0]
    positive_levels = [k for k in range(n.d) if alpha[k] > 0]
    if not zero_levels:
        raise DomainError(f"alpha ({alpha}) has no zero component; use the closed form")

    blocks = _zero_blocks(source, n, alpha, kind, zero_levels, positive_levels)
    root = gram_sqrt(blocks, tolerance=tolerance, max_sweeps=max_sweeps)
    inner = svd_oracle(root, tolerance=tolerance, max_sweeps=max_sweeps).values
    scale = math.sqrt(MultiIndex(n.take(zero_levels)).size)
    logger.debug(f"zero-shift reduction: {len(blocks)} blocks of order {root.shape[0]}, n=({n}), alpha=({alpha})")
    return SpectrumResult.padded(scale * inner, n.size, Provenance.REDUCTION)


def single_nonzero_level(alpha: IndexLike) -> Tuple[int, int]:
    """(k, alpha_k) for a shift vector with exactly one nonzero component."""
    alpha = as_multi_index(alpha)
    nonzero = [k for k in range(alpha.d) if alpha[k] != 0]
    if len(nonzero) != 1:
        raise DomainError(f"alpha ({alpha}) must have exactly one nonzero component")
    return nonzero[0], alpha[nonzero[0]]


def single_nonzero_alpha_singvals(a, n: IndexLike, k: int, alpha_k: int) -> SpectrumResult:
    n = size_vector(n)
    if not 0 <= k < n.d:
        raise DomainError(f"level {k} outside 0..{n.d - 1}")
    if alpha_k < 1:
        raise DomainError(f"alpha_k must be positive, got {alpha_k}")
    a = _vector(a, n.size)
    reduced = reduce_alpha(alpha_k, n[k])
    if reduced == 0:
        return zero_alpha_reduction(a, n, MultiIndex.zeros(n.d), MatrixKind.CIRCULANT)

    rows = np.moveaxis(a.reshape(n.entries), k, -1).reshape(-1, n[k])
    q = np.abs(sp_fft.ifft(rows, axis=1, norm="forward")) ** 2
    data = gcd_data(n[k], reduced)
    folded = q.sum(axis=0).reshape(data.g, data.n_alpha).sum(axis=0)
    return SpectrumResult.padded(math.sqrt(rows.shape[0]) * np.sqrt(folded), n.size, Provenance.CLOSED_FORM)


def multilevel_alpha_circulant_singvals(a, n: IndexLike, alpha: IndexLike) -> SpectrumResult:
    n = size_vector(n)
    alpha = shift_vector(alpha, n.d)
    if not alpha.is_positive():
        raise DomainError(f"alpha ({alpha}) has a zero component; use zero_alpha_reduction")
    reduced = MultiIndex(tuple(reduce_alpha(ak, nk) for ak, nk in zip(alpha, n)))
    if not reduced.is_positive():
        return zero_alpha_reduction(a, n, reduced, MatrixKind.CIRCULANT)

    d_array = np.abs(multilevel_circulant_eigs(a, n).reshape(n.entries)) ** 2
    for level, (nk, ak) in enumerate(zip(n, reduced)):
        data = gcd_data(nk, ak)
        shape = d_array.shape
        d_array = d_array.reshape(shape[:level] + (data.g, data.n_alpha) + shape[level + 1:]).sum(axis=level)
    return SpectrumResult.padded(np.sqrt(d_array.ravel()), n.size, Provenance.CLOSED_FORM)


def closed_form_singvals(a, n: IndexLike, alpha: IndexLike, **oracle_options) -> SpectrumResult:
    """Pick the closed form or reduction matching the pattern of alpha (reduced modulo n)."""
    n = size_vector(n)
    alpha = shift_vector(alpha, n.d)
    reduced = MultiIndex(tuple(reduce_alpha(ak, nk) for ak, nk in zip(alpha, n)))
    nonzero = [k for k in range(n.d) if reduced[k] > 0]
    if n.d == 1 and nonzero:
        return alpha_circulant_singvals(a, n[0], reduced[0])
    if len(nonzero) == n.d:
        return multilevel_alpha_circulant_singvals(a, n, reduced)
    if len(nonzero) == 1:
        return single_nonzero_alpha_singvals(a, n, nonzero[0], reduced[nonzero[0]])
    return zero_alpha_reduction(a, n, reduced, MatrixKind.CIRCULANT, **oracle_options)


def gram_similarity_residual(a, n: int, alpha: int) -> float:
    """Residual of C* C = (F* Z)* D* D (F* Z) with D = diag(sqrt(n) F* a)."""
    a = _vector(a, n)
    built = alpha_circulant(a, n, alpha).matrix
    f = fourier_matrix(n)
    d_sq = np.abs(math.sqrt(n) * (f.conj().T @ a)) ** 2
    w = f.conj().T @ shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha)))
    return max_abs_diff(built.conj().T @ built, (w.conj().T * d_sq[None, :]) @ w)


def frobenius_gap(spectrum: SpectrumResult, matrix: DenseMatrix) -> float:
    """|sum sigma^2 - ||A||_F^2| relative to max(1, ||A||_F^2)."""
    fro = float(np.sum(np.abs(matrix) ** 2))
    return abs(float(np.sum(spectrum.values ** 2)) - fro) / max(1.0, fro)


def singvals(a: StructuredMatrix, mode: str = "closed_form", method: str = "jacobi", **oracle_options) -> SpectrumResult:
    """Singular values of a structured matrix, by closed form when its kind has one."""
    if mode not in ("closed_form", "oracle"):
        raise DomainError(f"unknown spectrum mode {mode!r}")
    circulant_kinds = (MatrixKind.CIRCULANT, MatrixKind.ALPHA_CIRCULANT)
    if mode == "closed_form" and a.kind in circulant_kinds:
        alpha = a.alpha if a.alpha is not None else MultiIndex.ones(a.n.d)
        # column 0 of an alpha-circulant is the coefficient vector itself
        return closed_form_singvals(a.matrix[:, 0], a.n, alpha, **oracle_options)
    return svd_oracle(a, method=method, **oracle_options)
