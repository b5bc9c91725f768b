"""Seeded identity and closed-form sweeps.

Every check maps a case (n, alpha, replicate) to a residual. Identity checks
compare structured factorizations entrywise; spectral checks compare the
closed forms with the Jacobi oracle on random complex coefficients.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import make_rng, max_abs_diff, multiset_gap, random_complex
from .errors import ConfigurationError
from .logger import get_logger
from .models import CheckRecord, OracleSettings, VerifySettings
from .spectra import (
    alpha_circulant_singvals,
    alpha_circulant_singvals_symbol,
    frobenius_gap,
    gram_similarity_residual,
    svd_oracle,
)
from .structured import (
    alpha_circulant,
    alpha_toeplitz,
    circulant_factorization_residual,
    flip_residual,
    gcd_data,
    gcd_factorization_residual,
    min_tail_size,
    tail_embedding,
    toeplitz_tail_split,
    verify_alpha_reduction,
    verify_block_repetition,
    verify_fourier_shift_identity,
)
from .symbols import random_symbol

logger = get_logger(__name__)

IDENTITY_CHECKS = (
    "circulant_factorization",
    "shift_block_repetition",
    "shift_gcd_factorization",
    "fourier_shift",
    "fourier_shift_conjugate",
    "alpha_reduction",
    "toeplitz_split",
    "tail_embedding",
    "flip_hankel",
)
SPECTRAL_CHECKS = (
    "gram_similarity",
    "closed_form_vs_oracle",
    "symbol_fold_vs_closed_form",
    "frobenius_consistency",
)
ALL_CHECKS = IDENTITY_CHECKS + SPECTRAL_CHECKS
RANDOMIZED = {"circulant_factorization", "toeplitz_split", "tail_embedding", "flip_hankel"} | set(SPECTRAL_CHECKS)


@dataclass(frozen=True)
class Case:
    check: str
    n: int
    alpha: int
    replicate: int


@dataclass
class VerificationSummary:
    records: List[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def worst(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for r in self.records:
            out[r.check] = max(out.get(r.check, 0.0), r.residual)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "cases": len(self.records),
            "failures": len(self.failures()),
            "worst_residual": self.worst(),
        }


def _tail_size(n: int, alpha: int) -> int:
    return max(alpha * n, min_tail_size(n, alpha))


def _toeplitz_symbol(rng: np.random.Generator, n: int, alpha: int):
    return random_symbol(rng, [-alpha * (n - 1)], [n - 1])


def _toeplitz_split(rng: np.random.Generator, n: int, alpha: int) -> float:
    s = _toeplitz_symbol(rng, n, alpha)
    head, _ = toeplitz_tail_split(s, n, alpha)
    mu = gcd_data(n, alpha).mu_alpha
    return max_abs_diff(head, alpha_toeplitz(s, n, alpha).matrix[:, :mu])


def _closed_form_vs_oracle(a: np.ndarray, n: int, alpha: int, oracle: OracleSettings) -> float:
    closed = alpha_circulant_singvals(a, n, alpha)
    brute = svd_oracle(alpha_circulant(a, n, alpha), oracle.tolerance, oracle.max_sweeps, oracle.method)
    return multiset_gap(closed.values, brute.values)


def _frobenius(a: np.ndarray, n: int, alpha: int) -> float:
    return frobenius_gap(alpha_circulant_singvals(a, n, alpha), alpha_circulant(a, n, alpha).matrix)


def evaluate(case: Case, seed: int, oracle: OracleSettings) -> float:
    """Residual of one case; random inputs come from the stream keyed by the case."""
    rng = make_rng(seed, ALL_CHECKS.index(case.check), case.n, case.alpha, case.replicate)
    n, alpha = case.n, case.alpha
    check = case.check
    if check == "circulant_factorization":
        return circulant_factorization_residual(random_complex(rng, n), n, alpha)
    if check == "shift_block_repetition":
        return verify_block_repetition(n, alpha)
    if check == "shift_gcd_factorization":
        return gcd_factorization_residual(n, alpha)
    if check == "fourier_shift":
        return verify_fourier_shift_identity(n, alpha)
    if check == "fourier_shift_conjugate":
        return verify_fourier_shift_identity(n, alpha, conjugate=True)
    if check == "alpha_reduction":
        return verify_alpha_reduction(n, alpha)
    if check == "toeplitz_split":
        return _toeplitz_split(rng, n, alpha)
    if check == "tail_embedding":
        return tail_embedding(_toeplitz_symbol(rng, n, alpha), n, alpha, _tail_size(n, alpha))
    if check == "flip_hankel":
        return flip_residual(_toeplitz_symbol(rng, n, alpha), _tail_size(n, alpha))

    a = random_complex(rng, n)
    if check == "gram_similarity":
        return gram_similarity_residual(a, n, alpha)
    if check == "closed_form_vs_oracle":
        return _closed_form_vs_oracle(a, n, alpha, oracle)
    if check == "symbol_fold_vs_closed_form":
        return multiset_gap(alpha_circulant_singvals(a, n, alpha).values, alpha_circulant_singvals_symbol(a, n, alpha).values)
    if check == "frobenius_consistency":
        return _frobenius(a, n, alpha)
    raise ConfigurationError(f"unknown verification check {check!r}")


def _scale(case: Case, seed: int) -> float:
    """Tolerance multiplier: max(1, ||a||_1) for spectral checks, squared for the Gram check."""
    if case.check not in SPECTRAL_CHECKS or case.check == "frobenius_consistency":
        return 1.0
    rng = make_rng(seed, ALL_CHECKS.index(case.check), case.n, case.alpha, case.replicate)
    l1 = max(1.0, float(np.sum(np.abs(random_complex(rng, case.n)))))
    return l1 * l1 if case.check == "gram_similarity" else l1


def _alpha_range(check: str, n: int, settings: VerifySettings) -> Iterable[int]:
    if check in SPECTRAL_CHECKS:
        return range(0, n + 4)
    if check in ("fourier_shift", "fourier_shift_conjugate"):
        return range(1, min(n, settings.max_alpha + 1))
    if check in ("circulant_factorization", "alpha_reduction"):
        return range(0, settings.max_alpha + 1)
    if check in ("tail_embedding", "flip_hankel"):
        return range(2, settings.max_alpha + 1)
    return range(1, settings.max_alpha + 1)


def build_cases(settings: VerifySettings, checks: Optional[Sequence[str]] = None) -> List[Case]:
    checks = list(checks or ALL_CHECKS)
    unknown = [c for c in checks if c not in ALL_CHECKS]
    if unknown:
        raise ConfigurationError(f"unknown verification checks: {', '.join(unknown)}")
    cases = []
    for check in checks:
        top = settings.closed_form_max_n if check in SPECTRAL_CHECKS else settings.max_n
        replicates = settings.seeds_per_case if check in RANDOMIZED else 1
        for n in range(2, top + 1):
            for alpha in _alpha_range(check, n, settings):
                cases.extend(Case(check, n, alpha, r) for r in range(replicates))
    return cases


def run_verification(
    settings: Optional[VerifySettings] = None,
    oracle: Optional[OracleSettings] = None,
    seed: int = 0,
    checks: Optional[Sequence[str]] = None,
    progress: Optional[Callable[[CheckRecord], None]] = None,
) -> VerificationSummary:
    settings = settings or VerifySettings()
    oracle = oracle or OracleSettings()
    cases = build_cases(settings, checks)
    logger.info(f"Verification sweep: {len(cases)} cases, max_n={settings.max_n}, seed={seed}")

    def run(case: Case) -> CheckRecord:
        residual = float(evaluate(case, seed, oracle))
        base = settings.tolerance if case.check in SPECTRAL_CHECKS else settings.identity_tolerance
        tolerance = base * _scale(case, seed)
        record = CheckRecord(case.check, case.n, case.alpha, case.replicate, residual, tolerance, residual <= tolerance)
        if not record.passed:
            logger.warning(f"{case.check} failed at n={case.n} alpha={case.alpha} seed={case.replicate}: {residual:.3e}")
        return record

    summary = VerificationSummary()
    with ThreadPoolExecutor(max_workers=max(1, settings.workers)) as pool:
        for record in pool.map(run, cases):
            summary.records.append(record)
            if progress is not None:
                progress(record)
    logger.info(f"Verification finished: {len(summary.failures())} failures out of {len(summary.records)}")
    return summary


def case_counts(summary: VerificationSummary) -> Dict[str, Tuple[int, int]]:
    """check -> (passed, total)."""
    out: Dict[str, Tuple[int, int]] = {}
    for r in summary.records:
        ok, total = out.get(r.check, (0, 0))
        out[r.check] = (ok + int(r.passed), total + 1)
    return out
