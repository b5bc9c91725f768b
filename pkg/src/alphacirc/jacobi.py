"""One-sided (Hestenes) Jacobi orthogonalization of matrix columns.

Columns are rotated pairwise until every pair is numerically orthogonal;
the column norms are then the singular values. Pairs follow a round-robin
tournament so that each round rotates n/2 disjoint pairs at once.

The columns are held as the rows of a C-ordered array laid out so that the
pairs of the current round are (row i, row half + i). A round then works on
two contiguous slices and one row gather moves the layout to the next round.
"""
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConvergenceError
from .logger import get_logger

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-14
DEFAULT_MAX_SWEEPS = 60


def round_robin_pairs(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """n - 1 rounds of n / 2 disjoint pairs covering every pair once (n even)."""
    players = list(range(n))
    half = n // 2
    rounds = []
    for _ in range(n - 1):
        rounds.append((np.array(players[:half]), np.array(players[half:][::-1])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def tournament_layouts(n: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    """(first layout, moves): ``rows[move]`` turns round r's layout into round r + 1's, cyclically."""
    layouts = [np.concatenate([p, q]) for p, q in round_robin_pairs(n)]
    moves = []
    for current, following in zip(layouts, layouts[1:] + layouts[:1]):
        position = np.empty(n, dtype=np.int64)
        position[current] = np.arange(n)
        moves.append(position[following])
    return layouts[0], moves


def _row_norms(rows: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", rows.conj(), rows).real


def orthogonalize_columns(
    a: np.ndarray,
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    accumulate_v: bool = False,
) -> Tuple[np.ndarray, Optional[np.ndarray], int]:
    """Return (U, V, sweeps) with A V = U and the columns of U mutually orthogonal.

    V is only formed when ``accumulate_v`` is set. Raises ConvergenceError when
    some pair is still above the threshold after ``max_sweeps`` sweeps.
    """
    a = np.asarray(a, dtype=np.complex128)
    m, n = a.shape
    if n < 2:
        v = np.eye(n, dtype=np.complex128) if accumulate_v else None
        return a.copy(), v, 0

    padded = n + n % 2
    half = padded // 2
    rows = np.zeros((padded, m), dtype=np.complex128)
    rows[:n] = a.T
    eps = np.finfo(np.float64).eps
    threshold = max(tolerance, m * eps)
    # columns below this squared norm are numerically zero and never rotated
    floor = (max(m, n) * eps) ** 2 * float(_row_norms(rows).sum())

    layout, moves = tournament_layouts(padded)
    rows = rows[layout]
    v_rows = np.eye(padded, dtype=np.complex128)[layout] if accumulate_v else None

    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        for move in moves:
            top, bottom = rows[:half], rows[half:]
            norm_p, norm_q = _row_norms(top), _row_norms(bottom)
            gamma = np.einsum("ij,ij->i", top.conj(), bottom)
            mag = np.abs(gamma)
            active = (mag > threshold * np.sqrt(norm_p * norm_q)) & (np.minimum(norm_p, norm_q) > floor)
            if active.any():
                idx = np.flatnonzero(active)
                rotated += idx.size
                # rotate the second column by the phase of gamma so the pair's inner product is real
                phase = np.conj(gamma[idx] / mag[idx])[:, None]
                zeta = (norm_q[idx] - norm_p[idx]) / (2.0 * mag[idx])
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
                s = c * t[:, None]
                _rotate(top, bottom, idx, phase, c, s)
                if v_rows is not None:
                    _rotate(v_rows[:half], v_rows[half:], idx, phase, c, s)
            rows = rows[move]
            layout = layout[move]
            if v_rows is not None:
                v_rows = v_rows[move]

        if rotated == 0:
            logger.debug(f"Jacobi converged after {sweep} sweeps on a {m}x{n} matrix")
            break
    else:
        raise ConvergenceError(f"Jacobi SVD did not converge within {max_sweeps} sweeps ({m}x{n} matrix)")

    u = _restore(rows, layout)[:n].T
    v = _restore(v_rows, layout)[:n, :n].T if v_rows is not None else None
    return u, v, sweep


def _rotate(top: np.ndarray, bottom: np.ndarray, idx: np.ndarray, phase, c, s) -> None:
    up = top[idx]
    uq = bottom[idx] * phase
    top[idx] = c * up - s * uq
    bottom[idx] = s * up + c * uq


def _restore(rows: np.ndarray, layout: np.ndarray) -> np.ndarray:
    out = np.empty_like(rows)
    out[layout] = rows
    return out


def column_norms(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->j", u.conj(), u).real)
