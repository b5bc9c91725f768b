"""Constructors for shift, Fourier, (alpha-)circulant and (alpha-)Toeplitz matrices.

All multilevel matrices use the lexicographic layout of :mod:`alphacirc.core`.
The identity checks below return max-entry residuals; integer relabelings
are expected to give exactly 0.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .core import (
    INDEX_LIMIT,
    DenseMatrix,
    IndexLike,
    MultiIndex,
    as_dense,
    ensure_finite,
    index_box,
    max_abs_diff,
    ravel,
    shift_vector,
    size_vector,
)
from .errors import ConfigurationError, DomainError
from .logger import get_logger
from .models import MatrixKind, StructuredMatrix
from .symbols import CoefficientMap, SymbolSpec, as_symbol

logger = get_logger(__name__)

SymbolLike = Union[SymbolSpec, CoefficientMap]


class ShiftVariant(str, Enum):
    FULL = "full"
    FIRST_N_ALPHA = "first_n_alpha"
    FIRST_MU = "first_mu"
    TAIL_COLS = "tail_cols"


@dataclass(frozen=True)
class GcdData:
    g: int
    n_alpha: int
    alpha_check: int
    mu_alpha: int
    d_tail: int


@dataclass(frozen=True)
class ShiftPattern:
    n: MultiIndex
    alpha: MultiIndex
    variant: ShiftVariant = ShiftVariant.FULL
    d_tail: Optional[int] = None


def reduce_alpha(alpha: int, n: int) -> int:
    if n < 1 or alpha < 0:
        raise DomainError(f"reduce_alpha needs n >= 1 and alpha >= 0, got n={n}, alpha={alpha}")
    return alpha % n


def min_tail_size(n: int, alpha: int) -> int:
    """Smallest d_tail with d_tail > (alpha - 1)(n - 1) + 2."""
    return (alpha - 1) * (n - 1) + 3


def gcd_data(n: int, alpha: int, d_tail: Optional[int] = None) -> GcdData:
    if n < 1:
        raise DomainError(f"size must be positive, got n={n}")
    if alpha < 1:
        raise DomainError(f"gcd data needs alpha >= 1, got {alpha}; use the zero-shift reduction")
    g = math.gcd(n, alpha)
    if d_tail is None:
        # alpha * n is admissible except for the smallest sizes
        d_tail = max(alpha * n, min_tail_size(n, alpha))
    return GcdData(g=g, n_alpha=n // g, alpha_check=alpha // g, mu_alpha=-(-n // alpha), d_tail=d_tail)


def _one_level(n: MultiIndex, what: str) -> int:
    if n.d != 1:
        raise DomainError(f"{what} is only defined for one-level sizes, got ({n})")
    return n[0]


def _delta_columns(rows: int, cols: int, alpha: int, modulus: int) -> DenseMatrix:
    """0/1 matrix with entry (r, s) = 1 iff r - alpha * s = 0 (mod modulus)."""
    r = np.arange(rows)[:, None]
    s = np.arange(cols)[None, :]
    return ((r - alpha * s) % modulus == 0).astype(np.complex128)


def shift_matrix(p: ShiftPattern) -> DenseMatrix:
    n = size_vector(p.n)
    alpha = shift_vector(p.alpha, n.d)
    if p.variant is ShiftVariant.FULL:
        factors = [_delta_columns(nk, nk, ak, nk) for nk, ak in zip(n, alpha)]
        return reduce(np.kron, factors)

    size = _one_level(n, f"shift variant {p.variant.value}")
    data = gcd_data(size, alpha[0], p.d_tail)
    if p.variant is ShiftVariant.FIRST_N_ALPHA:
        return _delta_columns(size, data.n_alpha, alpha[0], size)
    if p.variant is ShiftVariant.FIRST_MU:
        return _delta_columns(size, data.mu_alpha, alpha[0], size)
    return _delta_columns(data.d_tail, size - data.mu_alpha, alpha[0], data.d_tail)


def multilevel_shift_matrix(n: IndexLike, alpha: IndexLike) -> DenseMatrix:
    n = size_vector(n)
    return shift_matrix(ShiftPattern(n, shift_vector(alpha, n.d)))


def stacked_identity(n: int, alpha: int) -> DenseMatrix:
    """(n, alpha) copies of the identity of order n_alpha stacked vertically."""
    data = gcd_data(n, alpha)
    return np.vstack([np.eye(data.n_alpha, dtype=np.complex128)] * data.g)


def fourier_matrix(n: IndexLike) -> DenseMatrix:
    n = size_vector(n)
    factors = [linalg.dft(nk, scale="sqrtn").astype(np.complex128) for nk in n]
    return reduce(np.kron, factors)


def circulant(a, n: IndexLike) -> StructuredMatrix:
    n = size_vector(n)
    matrix = _wrapped_entries(a, n, MultiIndex.ones(n.d))
    return StructuredMatrix(matrix, MatrixKind.CIRCULANT, n, MultiIndex.ones(n.d))


def circulant_via_fourier(a, n: IndexLike) -> DenseMatrix:
    """F diag(sqrt(n-hat) F* a) F*, the Fourier-diagonalized circulant."""
    n = size_vector(n)
    a = _column(a, n)
    f = fourier_matrix(n)
    diagonal = np.sqrt(n.size) * (f.conj().T @ a)
    return (f * diagonal[None, :]) @ f.conj().T


def alpha_circulant(a, n: IndexLike, alpha: IndexLike) -> StructuredMatrix:
    n = size_vector(n)
    alpha = shift_vector(alpha, n.d)
    reduced = MultiIndex(tuple(reduce_alpha(ak, nk) for ak, nk in zip(alpha, n)))
    matrix = _wrapped_entries(a, n, reduced)
    return StructuredMatrix(matrix, MatrixKind.ALPHA_CIRCULANT, n, alpha)


def _column(a, n: MultiIndex) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size != n.size:
        raise DomainError(f"expected {n.size} entries for n=({n}), got {a.size}")
    return a


def _wrapped_entries(a, n: MultiIndex, alpha: MultiIndex) -> DenseMatrix:
    a = _column(a, n)
    box = index_box(n)
    diff = box[:, None, :] - alpha.as_array() * box[None, :, :]
    ranks = ravel(np.mod(diff, n.as_array()), n)
    return ensure_finite(a[ranks], "alpha-circulant")


def alpha_toeplitz(s: SymbolLike, n: IndexLike, alpha: IndexLike) -> StructuredMatrix:
    n = size_vector(n)
    alpha = shift_vector(alpha, n.d)
    s = as_symbol(s, n.d)
    if any(ak * (nk - 1) > INDEX_LIMIT for ak, nk in zip(alpha, n)):
        raise DomainError(f"alpha=({alpha}) times n=({n}) leaves the 64-bit offset range")
    box = index_box(n)
    matrix = s.lookup(box[:, None, :] - alpha.as_array() * box[None, :, :])
    kind = MatrixKind.TOEPLITZ if all(ak == 1 for ak in alpha) else MatrixKind.ALPHA_TOEPLITZ
    return StructuredMatrix(ensure_finite(matrix, "alpha-Toeplitz"), kind, n, alpha)


def toeplitz_tail_split(s: SymbolLike, n: int, alpha: int) -> Tuple[DenseMatrix, DenseMatrix]:
    """Split T_{n,alpha} into the head T_n Z-hat (n x mu_alpha) and the remaining tail columns."""
    data = gcd_data(n, alpha)
    s = as_symbol(s, 1)
    plain = alpha_toeplitz(s, n, 1).matrix
    head = plain @ shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha), ShiftVariant.FIRST_MU))
    tail = alpha_toeplitz(s, n, alpha).matrix[:, data.mu_alpha:]
    return head, tail


def toeplitz_d(s: SymbolLike, d_tail: int) -> DenseMatrix:
    """T_d = [a_{r - c - d + 1}], the d x d Toeplitz feeding the tail embedding."""
    s = as_symbol(s, 1)
    r = np.arange(d_tail)[:, None]
    c = np.arange(d_tail)[None, :]
    return _lookup(s, r - c - d_tail + 1)


def hankel_tail(s: SymbolLike, d_tail: int) -> DenseMatrix:
    """H_d = [a_{-r-c}]."""
    s = as_symbol(s, 1)
    r = np.arange(d_tail)[:, None]
    c = np.arange(d_tail)[None, :]
    return _lookup(s, -r - c)


def flip_matrix(m: int) -> DenseMatrix:
    return np.fliplr(np.eye(m, dtype=np.complex128))


def selection_matrix(n: int, alpha: int, d_tail: int) -> DenseMatrix:
    """[0_1 | I_n | 0_2], picking rows d - alpha * mu_alpha - 1 .. of a d-vector."""
    data = gcd_data(n, alpha, d_tail)
    offset = d_tail - alpha * data.mu_alpha - 1
    out = np.zeros((n, d_tail), dtype=np.complex128)
    out[np.arange(n), np.arange(n) + offset] = 1.0
    return out


def _lookup(s: SymbolSpec, indices: np.ndarray) -> DenseMatrix:
    return s.lookup(indices[..., None])


def _check_tail_size(n: int, alpha: int, d_tail: int) -> GcdData:
    data = gcd_data(n, alpha, d_tail)
    if d_tail < min_tail_size(n, alpha):
        raise DomainError(f"d_tail={d_tail} must exceed (alpha-1)(n-1)+2 = {min_tail_size(n, alpha) - 1}")
    if d_tail - alpha * data.mu_alpha - 1 < 0 or alpha * (n - data.mu_alpha - 1) > d_tail - 1:
        raise DomainError(f"d_tail={d_tail} too small to embed the tail of T_{{{n},{alpha}}}")
    return data


def tail_embedding(s: SymbolLike, n: int, alpha: int, d_tail: Optional[int] = None) -> float:
    """Residual of tail = [0|I|0] T_d Z_tail, combined with the flip identity T_d = J H_d.

    For alpha = 1 the tail has no columns and only the flip identity is checked.
    """
    d_tail = alpha * n if d_tail is None else d_tail
    s = as_symbol(s, 1)
    if gcd_data(n, alpha, d_tail).mu_alpha == n:
        logger.debug(f"tail embedding n={n} alpha={alpha}: empty tail")
        return flip_residual(s, d_tail)
    data = _check_tail_size(n, alpha, d_tail)
    _, tail = toeplitz_tail_split(s, n, alpha)
    tail_cols = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha), ShiftVariant.TAIL_COLS, d_tail))
    embedded = selection_matrix(n, alpha, data.d_tail) @ toeplitz_d(s, d_tail) @ tail_cols
    logger.debug(f"tail embedding n={n} alpha={alpha}: d_tail={d_tail}, mu_alpha={data.mu_alpha}")
    return max(max_abs_diff(tail, embedded), flip_residual(s, d_tail))


def flip_residual(s: SymbolLike, d_tail: int) -> float:
    return max_abs_diff(toeplitz_d(s, d_tail), flip_matrix(d_tail) @ hankel_tail(s, d_tail))


def verify_fourier_shift_identity(n: int, alpha: int, conjugate: bool = False) -> float:
    """Residual of F Z-tilde = (n,alpha)^(-1/2) I_{n,alpha} F_{n_alpha} Z_{n_alpha, alpha-check}.

    The gcd factorization Z-tilde_{n,alpha} = Z-tilde_{n,(n,alpha)} Z_{n_alpha, alpha-check}
    is checked on the way. With ``conjugate`` both Fourier matrices are conjugated.
    """
    if not 1 <= alpha < n:
        raise DomainError(f"Fourier-shift identity needs 1 <= alpha < n, got n={n}, alpha={alpha}")
    data = gcd_data(n, alpha)
    tilde = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha), ShiftVariant.FIRST_N_ALPHA))
    inner = shift_matrix(ShiftPattern(MultiIndex.of(data.n_alpha), MultiIndex.of(data.alpha_check)))
    f_n, f_small = fourier_matrix(n), fourier_matrix(data.n_alpha)
    if conjugate:
        f_n, f_small = f_n.conj(), f_small.conj()
    lhs = f_n @ tilde
    rhs = stacked_identity(n, alpha) @ f_small @ inner / np.sqrt(data.g)
    return max(max_abs_diff(lhs, rhs), gcd_factorization_residual(n, alpha))


def gcd_factorization_residual(n: int, alpha: int) -> float:
    data = gcd_data(n, alpha)
    tilde = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha), ShiftVariant.FIRST_N_ALPHA))
    tilde_g = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(data.g), ShiftVariant.FIRST_N_ALPHA))
    inner = shift_matrix(ShiftPattern(MultiIndex.of(data.n_alpha), MultiIndex.of(data.alpha_check)))
    return max_abs_diff(tilde, tilde_g @ inner)


def verify_block_repetition(n: int, alpha: int) -> float:
    """Residual of Z_{n,alpha} = [Z-tilde | ... | Z-tilde] with (n,alpha) copies."""
    data = gcd_data(n, alpha)
    full = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha)))
    tilde = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha), ShiftVariant.FIRST_N_ALPHA))
    return max_abs_diff(full, np.hstack([tilde] * data.g))


def verify_alpha_reduction(n: int, alpha: int) -> float:
    """Residual of Z_{n,alpha} = Z_{n, alpha mod n}."""
    full = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(alpha)))
    reduced = shift_matrix(ShiftPattern(MultiIndex.of(n), MultiIndex.of(reduce_alpha(alpha, n))))
    return max_abs_diff(full, reduced)


def circulant_factorization_residual(a, n: IndexLike, alpha: IndexLike) -> float:
    """Residual of C_{n,alpha} = C_n Z_{n,alpha} (multilevel shift is the Kronecker product)."""
    n = size_vector(n)
    built = alpha_circulant(a, n, alpha).matrix
    return max_abs_diff(built, circulant(a, n).matrix @ multilevel_shift_matrix(n, alpha))


def permute_levels(a: StructuredMatrix, perm: Sequence[int]) -> StructuredMatrix:
    """P^T A P where P relabels lexicographic ranks so that new level i is old level perm[i]."""
    n = a.n
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n.d)):
        raise DomainError(f"{perm} is not a permutation of {n.d} levels")
    if a.matrix.shape != (n.size, n.size):
        raise DomainError(f"level permutation needs a square {n.size}x{n.size} matrix")
    new_n = MultiIndex(n.take(perm))
    new_rank = ravel(index_box(n)[:, perm], new_n)
    out = np.empty_like(a.matrix)
    out[np.ix_(new_rank, new_rank)] = a.matrix
    new_alpha = MultiIndex(a.alpha.take(perm)) if a.alpha is not None else None
    return StructuredMatrix(out, a.kind, new_n, new_alpha)


def dumps_matrix(matrix: DenseMatrix, float_format: str = ".17g") -> str:
    rows, cols = matrix.shape
    lines = [f"{rows} {cols}"]
    for row in matrix:
        lines.append("  ".join(f"{format(v.real, float_format)} {format(v.imag, float_format)}" for v in row))
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> DenseMatrix:
    tokens = text.split()
    if len(tokens) < 2:
        raise ConfigurationError("matrix text needs a 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(tok) for tok in tokens[2:]], dtype=np.float64)
    except ValueError as exc:
        raise ConfigurationError(f"malformed matrix text: {exc}") from None
    if rows < 0 or cols < 0 or values.size != 2 * rows * cols:
        raise ConfigurationError(f"matrix text holds {values.size // 2} entries, header says {rows}x{cols}")
    pairs = values.reshape(rows * cols, 2)
    return as_dense((pairs[:, 0] + 1j * pairs[:, 1]).reshape(rows, cols))
