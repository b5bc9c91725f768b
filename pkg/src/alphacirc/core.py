"""Multi-index arithmetic and the dense-matrix plumbing shared by every module.

Multilevel objects are laid out lexicographically in row-major order: the
first level is outermost and the last level varies fastest.
"""
from dataclasses import dataclass
from functools import reduce
from operator import mul
from typing import Iterator, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, NumericalError

# Dense matrices are plain complex128 numpy arrays of shape (rows, cols).
DenseMatrix = np.ndarray

# index arithmetic runs in int64; offsets like j - alpha * k must stay below this
INDEX_LIMIT = 2 ** 62


@dataclass(frozen=True)
class MultiIndex:
    entries: Tuple[int, ...]

    def __post_init__(self) -> None:
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise DomainError("a multi-index needs at least one level")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(tuple(entries))

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        tokens = [tok for tok in text.replace("x", ",").split(",") if tok.strip()]
        try:
            return cls(tuple(int(tok) for tok in tokens))
        except ValueError as exc:
            raise DomainError(f"cannot parse multi-index {text!r}") from exc

    @classmethod
    def ones(cls, d: int) -> "MultiIndex":
        return cls((1,) * d)

    @classmethod
    def zeros(cls, d: int) -> "MultiIndex":
        return cls((0,) * d)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        """Product of the entries (n-hat when used as a size vector)."""
        return reduce(mul, self.entries, 1)

    def as_array(self) -> np.ndarray:
        if any(abs(e) > INDEX_LIMIT for e in self.entries):
            raise DomainError(f"multi-index ({self}) does not fit 64-bit index arithmetic")
        return np.asarray(self.entries, dtype=np.int64)

    def is_positive(self) -> bool:
        return all(e >= 1 for e in self.entries)

    def is_nonnegative(self) -> bool:
        return all(e >= 0 for e in self.entries)

    def take(self, levels: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self.entries[k] for k in levels)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> int:
        return self.entries[k]

    def __str__(self) -> str:
        return ",".join(str(e) for e in self.entries)


IndexLike = Union[MultiIndex, Sequence[int], int]


def as_multi_index(value: IndexLike) -> MultiIndex:
    if isinstance(value, MultiIndex):
        return value
    if isinstance(value, (int, np.integer)):
        return MultiIndex((int(value),))
    return MultiIndex(tuple(value))


def size_vector(n: IndexLike) -> MultiIndex:
    n = as_multi_index(n)
    if not n.is_positive():
        raise DomainError(f"size vector must be strictly positive, got ({n})")
    return n


def shift_vector(alpha: IndexLike, d: int) -> MultiIndex:
    alpha = as_multi_index(alpha)
    if alpha.d != d:
        raise DomainError(f"shift vector ({alpha}) has {alpha.d} levels, expected {d}")
    if not alpha.is_nonnegative():
        raise DomainError(f"shift vector must be nonnegative, got ({alpha})")
    return alpha


def _check_same_length(a: MultiIndex, b: MultiIndex) -> None:
    if a.d != b.d:
        raise DomainError(f"level mismatch: ({a}) has {a.d} levels, ({b}) has {b.d}")


def lex_rank(idx: IndexLike, n: IndexLike) -> int:
    idx, n = as_multi_index(idx), size_vector(n)
    _check_same_length(idx, n)
    for k, (i, m) in enumerate(zip(idx, n)):
        if not 0 <= i < m:
            raise DomainError(f"index component {k} = {i} outside [0, {m - 1}]")
    return int(np.ravel_multi_index(idx.entries, n.entries))


def lex_unrank(pos: int, n: IndexLike) -> MultiIndex:
    n = size_vector(n)
    if not 0 <= pos < n.size:
        raise DomainError(f"position {pos} outside [0, {n.size - 1}]")
    return MultiIndex(tuple(int(i) for i in np.unravel_index(pos, n.entries)))


def mod_vec(r: IndexLike, n: IndexLike) -> MultiIndex:
    r, n = as_multi_index(r), size_vector(n)
    _check_same_length(r, n)
    return MultiIndex(tuple(int(v) for v in np.mod(r.as_array(), n.as_array())))


def hadamard(a: IndexLike, b: IndexLike) -> MultiIndex:
    a, b = as_multi_index(a), as_multi_index(b)
    _check_same_length(a, b)
    return MultiIndex(tuple(x * y for x, y in zip(a, b)))


def index_box(n: IndexLike) -> np.ndarray:
    """All multi-indices of the box [0, n-1] as an (n-hat, d) array, lexicographic order."""
    n = size_vector(n)
    return np.indices(n.entries).reshape(n.d, -1).T


def ravel(indices: np.ndarray, n: MultiIndex) -> np.ndarray:
    """Lexicographic ranks of an (..., d) array of in-range multi-indices."""
    return np.ravel_multi_index(tuple(np.moveaxis(indices, -1, 0)), n.entries)


def as_dense(data, what: str = "matrix") -> DenseMatrix:
    matrix = np.asarray(data, dtype=np.complex128)
    if matrix.ndim != 2:
        raise DomainError(f"{what} must be two-dimensional, got shape {matrix.shape}")
    ensure_finite(matrix, what)
    return matrix


def ensure_finite(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"{what} has non-finite entries")
    return matrix


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def multiset_gap(x, y) -> float:
    """Largest entrywise distance between two multisets of values.

    Real inputs are compared after a descending sort. Complex inputs are
    paired by a minimum-cost assignment on |x_i - y_j|.
    """
    x, y = np.ravel(np.asarray(x)), np.ravel(np.asarray(y))
    if x.size != y.size:
        raise DomainError(f"multisets differ in size: {x.size} vs {y.size}")
    if x.size == 0:
        return 0.0
    if np.iscomplexobj(x) or np.iscomplexobj(y):
        cost = np.abs(x[:, None] - y[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max())
    return float(np.max(np.abs(np.sort(x)[::-1] - np.sort(y)[::-1])))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 stream for a sweep case; the same (seed, key) always yields the same stream."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) & 0xFFFFFFFFFFFFFFFF for k in key]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
