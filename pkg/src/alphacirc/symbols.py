"""Generating functions given by their Fourier coefficients.

A :class:`SymbolSpec` is a finitely supported coefficient map j -> a_j that
represents the trigonometric polynomial f(x) = sum_j a_j exp(i<j, x>).
The folded square and the distribution symbol theta are built on top of it.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sp_fft
from scipy import signal

from .core import IndexLike, MultiIndex, as_multi_index, index_box, ravel, size_vector
from .errors import ConfigurationError, DomainError, NumericalError
from .logger import get_logger

logger = get_logger(__name__)

Index = Tuple[int, ...]
CoefficientMap = Mapping[Union[int, Index], complex]

THETA_CLIP = 1e-10
_EVAL_CHUNK = 1 << 16
MAX_RANDOM_COEFFICIENTS = 1 << 24


def _as_key(key, d: int) -> Index:
    if isinstance(key, MultiIndex):
        key = key.entries
    elif isinstance(key, (int, np.integer)):
        key = (int(key),)
    key = tuple(int(k) for k in key)
    if len(key) != d:
        raise DomainError(f"coefficient index {key} does not have {d} levels")
    return key


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    d: int
    coeffs: Dict[Index, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.d < 0:
            raise DomainError("symbol level count must be nonnegative")
        normalized = {}
        for key, value in self.coeffs.items():
            value = complex(value)
            if not np.isfinite(value):
                raise NumericalError(f"coefficient at {key} is not finite")
            if value != 0:
                normalized[_as_key(key, self.d)] = value
        object.__setattr__(self, "coeffs", dict(sorted(normalized.items())))

    @classmethod
    def of(cls, coeffs: CoefficientMap, d: Optional[int] = None) -> "SymbolSpec":
        if d is None:
            first = next(iter(coeffs), 0)
            d = len(first.entries) if isinstance(first, MultiIndex) else (
                1 if isinstance(first, (int, np.integer)) else len(first)
            )
        return cls(d, dict(coeffs))

    @classmethod
    def from_dense(cls, array: np.ndarray, offset: Sequence[int]) -> "SymbolSpec":
        """Coefficients stored in a dense box whose entry [0, ..., 0] has index ``offset``."""
        array = np.asarray(array)
        offset = np.asarray(offset, dtype=np.int64)
        nz = np.argwhere(array != 0)
        coeffs = {tuple(int(v) for v in pos + offset): complex(array[tuple(pos)]) for pos in nz}
        return cls(array.ndim, coeffs)

    def get(self, key: IndexLike) -> complex:
        return self.coeffs.get(_as_key(key, self.d), 0j)

    def is_zero(self) -> bool:
        return not self.coeffs

    def support_box(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.coeffs:
            zero = np.zeros(self.d, dtype=np.int64)
            return zero, zero.copy()
        keys = np.array(list(self.coeffs), dtype=np.int64).reshape(-1, self.d)
        return keys.min(axis=0), keys.max(axis=0)

    def dense(self, lo: Optional[Sequence[int]] = None, hi: Optional[Sequence[int]] = None) -> np.ndarray:
        """Coefficients on the box [lo, hi]; entries outside the support read as 0."""
        box_lo, box_hi = self.support_box()
        lo = box_lo if lo is None else np.asarray(lo, dtype=np.int64)
        hi = box_hi if hi is None else np.asarray(hi, dtype=np.int64)
        out = np.zeros(tuple(int(v) for v in hi - lo + 1), dtype=np.complex128)
        for key, value in self.coeffs.items():
            pos = np.asarray(key) - lo
            if np.all(pos >= 0) and np.all(np.asarray(key) <= hi):
                out[tuple(pos)] = value
        return out

    def lookup(self, offsets) -> np.ndarray:
        """a_j for an integer array of offsets with shape (..., d); zero off the support."""
        offsets = np.asarray(offsets, dtype=np.int64)
        if offsets.shape[-1:] != (self.d,):
            raise DomainError(f"offsets of shape {offsets.shape} do not have {self.d} levels")
        out = np.zeros(offsets.shape[:-1], dtype=np.complex128)
        if not self.coeffs:
            return out
        lo, hi = self.support_box()
        inside = np.all((offsets >= lo) & (offsets <= hi), axis=-1)
        box = self.dense(lo, hi)
        out[inside] = box[tuple(np.moveaxis(offsets[inside] - lo, -1, 0))]
        return out

    def restrict(self, levels: Sequence[int], values: Sequence[int]) -> "SymbolSpec":
        """Coefficients whose components on ``levels`` equal ``values``, indexed by the other levels."""
        keep = [k for k in range(self.d) if k not in levels]
        target = tuple(values)
        coeffs = {
            tuple(key[k] for k in keep): value
            for key, value in self.coeffs.items()
            if tuple(key[k] for k in levels) == target
        }
        return SymbolSpec(len(keep), coeffs)

    def l1_norm(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class SampledSymbol:
    """A periodic function known only through point samples.

    ``sampler`` receives an (N, d) array of points and returns N values when
    ``vectorized`` is true, otherwise it is called once per point.
    """

    d: int
    sampler: Callable
    grid: Optional[Tuple[int, ...]] = None
    vectorized: bool = True


@dataclass(frozen=True, eq=False)
class ThetaSymbol:
    base: SymbolSpec
    alpha: MultiIndex

    @classmethod
    def from_symbol(cls, s: SymbolSpec, alpha: IndexLike) -> "ThetaSymbol":
        alpha = as_multi_index(alpha)
        return cls(folded_square_symbol(s, alpha), alpha)


def as_symbol(source: Union[SymbolSpec, CoefficientMap], d: Optional[int] = None) -> SymbolSpec:
    if isinstance(source, SymbolSpec):
        if d is not None and source.d != d:
            raise DomainError(f"symbol has {source.d} levels, expected {d}")
        return source
    return SymbolSpec.of(source, d)


def _points(x, d: int) -> np.ndarray:
    points = np.asarray(x, dtype=np.float64)
    if points.ndim == 0:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(-1, 1) if d == 1 else points.reshape(1, d)
    if points.shape[-1] != d:
        raise DomainError(f"points have {points.shape[-1]} coordinates, symbol has {d} levels")
    return points


def eval_symbol(s: SymbolSpec, x) -> complex:
    points = _points(x, s.d)
    if points.shape[0] != 1:
        raise DomainError("eval_symbol takes a single point; use eval_symbol_grid for many")
    return complex(eval_symbol_grid(s, points)[0])


def eval_symbol_grid(s: SymbolSpec, points) -> np.ndarray:
    """Values of the trigonometric polynomial at an (N, d) array of points."""
    points = _points(points, s.d)
    if s.is_zero():
        return np.zeros(points.shape[0], dtype=np.complex128)
    keys = np.array(list(s.coeffs), dtype=np.float64).reshape(-1, s.d)
    values = np.array(list(s.coeffs.values()), dtype=np.complex128)
    out = np.empty(points.shape[0], dtype=np.complex128)
    for start in range(0, points.shape[0], _EVAL_CHUNK):
        chunk = points[start:start + _EVAL_CHUNK]
        out[start:start + _EVAL_CHUNK] = np.exp(1j * chunk @ keys.T) @ values
    return out


def fourier_coeffs_from_samples(g: SampledSymbol, cutoff: IndexLike, atol: float = 1e-14) -> SymbolSpec:
    cutoff = size_vector(cutoff)
    if cutoff.d != g.d:
        raise ConfigurationError(f"cutoff has {cutoff.d} levels, sampled symbol has {g.d}")
    grid = tuple(g.grid) if g.grid is not None else tuple(4 * (c + 1) for c in cutoff)
    if len(grid) != g.d:
        raise ConfigurationError(f"grid {grid} does not match {g.d} levels")
    for c, m in zip(cutoff, grid):
        if m < 2 * c + 1:
            raise ConfigurationError(f"grid size {m} too small for cutoff {c}: need at least {2 * c + 1}")

    axes = []
    for m in grid:
        x = 2.0 * np.pi * np.arange(m) / m
        axes.append(np.where(x >= np.pi, x - 2.0 * np.pi, x))
    points = iter_points(axes)
    if g.vectorized:
        samples = np.asarray(g.sampler(points), dtype=np.complex128)
    else:
        samples = np.array([g.sampler(p) for p in points], dtype=np.complex128)
    samples = samples.reshape(grid)

    spectrum = sp_fft.fftn(samples, norm="forward")
    box = index_box(MultiIndex(tuple(2 * c + 1 for c in cutoff))) - cutoff.as_array()
    wrapped = np.mod(box, np.asarray(grid))
    values = spectrum[tuple(wrapped.T)]
    scale = np.max(np.abs(values)) if values.size else 0.0
    coeffs = {tuple(int(v) for v in key): val for key, val in zip(box, values) if abs(val) > atol * scale}
    logger.debug(f"Fourier coefficients from {samples.size} samples, cutoff=({cutoff})")
    return SymbolSpec(g.d, coeffs)


def autocorrelate(s: SymbolSpec) -> SymbolSpec:
    """Coefficients of |f|^2: c_k = sum_j a_{j+k} conj(a_j)."""
    if s.is_zero():
        return SymbolSpec(s.d, {})
    dense = s.dense()
    reversed_conj = np.conj(dense[(slice(None, None, -1),) * s.d])
    corr = signal.convolve(dense, reversed_conj, method="direct")
    return SymbolSpec.from_dense(corr, [-(m - 1) for m in dense.shape])


def multiply(s: SymbolSpec, t: SymbolSpec) -> SymbolSpec:
    """Coefficients of the product of two symbols."""
    if s.d != t.d:
        raise DomainError(f"cannot multiply symbols with {s.d} and {t.d} levels")
    if s.is_zero() or t.is_zero():
        return SymbolSpec(s.d, {})
    lo_s, _ = s.support_box()
    lo_t, _ = t.support_box()
    prod = signal.convolve(s.dense(), t.dense(), method="direct")
    return SymbolSpec.from_dense(prod, lo_s + lo_t)


def folded_square_symbol(s: SymbolSpec, alpha: IndexLike) -> SymbolSpec:
    alpha = as_multi_index(alpha)
    if alpha.d != s.d:
        raise DomainError(f"alpha ({alpha}) does not match the {s.d}-level symbol")
    if not alpha.is_positive():
        raise DomainError(f"folded square needs a strictly positive alpha, got ({alpha}); use the zero-shift reduction")
    steps = alpha.as_array()
    folded = {}
    for key, value in autocorrelate(s).coeffs.items():
        k = np.asarray(key)
        if np.all(k % steps == 0):
            folded[tuple(int(v) for v in k // steps)] = value
    return SymbolSpec(s.d, folded)


def folded_values(th: ThetaSymbol, points) -> np.ndarray:
    """Folded square at many points, negative round-off clipped at 0."""
    raw = eval_symbol_grid(th.base, points).real
    floor = THETA_CLIP * max(1.0, th.base.l1_norm())
    if raw.size and raw.min() < -floor:
        raise NumericalError(f"folded square symbol is negative ({raw.min():.3e}); base is not a fold of |f|^2")
    return np.maximum(raw, 0.0)


def theta_eval(th: ThetaSymbol, x, t) -> float:
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if t.size != th.alpha.d:
        raise DomainError(f"t has {t.size} components, theta has {th.alpha.d} levels")
    if np.any(t > 1.0 / th.alpha.as_array()):
        return 0.0
    return float(np.sqrt(folded_values(th, _points(x, th.base.d))[0]))


def symbol_from_vector(a, n: IndexLike) -> SymbolSpec:
    """Read a lexicographic vector of n-hat entries as coefficients on the box [0, n-1]."""
    n = size_vector(n)
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size != n.size:
        raise DomainError(f"expected {n.size} coefficients for n=({n}), got {a.size}")
    return SymbolSpec(n.d, {tuple(int(v) for v in key): val for key, val in zip(index_box(n), a)})


def circulant_column(s: SymbolSpec, n: IndexLike) -> np.ndarray:
    """Wrap the coefficients modulo n into the first column of a (multilevel) circulant."""
    n = size_vector(n)
    if s.d != n.d:
        raise DomainError(f"symbol has {s.d} levels, size vector has {n.d}")
    column = np.zeros(n.size, dtype=np.complex128)
    if s.is_zero():
        return column
    keys = np.array(list(s.coeffs), dtype=np.int64).reshape(-1, s.d)
    ranks = ravel(np.mod(keys, n.as_array()), n)
    np.add.at(column, ranks, np.array(list(s.coeffs.values()), dtype=np.complex128))
    return column


def random_symbol(rng: np.random.Generator, lo: Sequence[int], hi: Sequence[int]) -> SymbolSpec:
    shape = tuple(int(top) - int(bottom) + 1 for bottom, top in zip(lo, hi))
    if math.prod(shape) > MAX_RANDOM_COEFFICIENTS:
        raise DomainError(f"random symbol box {shape} exceeds {MAX_RANDOM_COEFFICIENTS} coefficients")
    lo = np.asarray(lo, dtype=np.int64)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return SymbolSpec.from_dense(values, lo)


BUILTIN_SYMBOLS: Dict[str, Dict[Index, complex]] = {
    "laplace1d": {(-1,): -1, (0,): 2, (1,): -1},
    "shift1": {(0,): 1, (1,): 1},
    "bilaplace1d": {(-2,): 1, (-1,): -4, (0,): 6, (1,): -4, (2,): 1},
    "pathological": {(-2,): -1, (0,): 2, (2,): -1},
    "smoothing1d": {(-1,): 0.5, (0,): 1, (1,): 0.5},
    "laplace2d": {(0, 0): 4, (-1, 0): -1, (1, 0): -1, (0, -1): -1, (0, 1): -1},
}


def builtin_symbol(name: str) -> SymbolSpec:
    try:
        coeffs = BUILTIN_SYMBOLS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SYMBOLS))
        raise ConfigurationError(f"unknown builtin symbol {name!r} (known: {known})") from None
    return SymbolSpec.of(coeffs)


def dumps_symbol(s: SymbolSpec, float_format: str = ".17g") -> str:
    lines = []
    for key, value in s.coeffs.items():
        index = " ".join(str(k) for k in key)
        lines.append(f"{index}  {format(value.real, float_format)}  {format(value.imag, float_format)}")
    return "\n".join(lines) + ("\n" if lines else "")


def loads_symbol(text: str, d: Optional[int] = None) -> SymbolSpec:
    coeffs: Dict[Index, complex] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 3:
            raise ConfigurationError(f"symbol line {lineno}: expected 'j1 ... jd re im', got {line!r}")
        levels = len(tokens) - 2
        if d is None:
            d = levels
        elif levels != d:
            raise ConfigurationError(f"symbol line {lineno}: {levels} index columns, expected {d}")
        try:
            key = tuple(int(tok) for tok in tokens[:-2])
            value = complex(float(tokens[-2]), float(tokens[-1]))
        except ValueError as exc:
            raise ConfigurationError(f"symbol line {lineno}: {exc}") from None
        coeffs[key] = coeffs.get(key, 0j) + value
    if d is None:
        raise ConfigurationError("symbol file has no coefficients")
    return SymbolSpec(d, coeffs)


def iter_points(axes: Iterable[np.ndarray]) -> np.ndarray:
    """Cartesian grid of the given per-level axes as an (N, d) array, last level fastest."""
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
