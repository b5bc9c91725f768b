import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, TextIO, Union

from .distribution import DistributionReport, GcdProbeReport
from .models import SpectrumResult
from .verify import VerificationSummary

Target = Union[Path, str, TextIO, None]

SPECTRUM_FIELDS = ["index", "sigma", "structural_zero"]
CHECK_FIELDS = ["check", "n", "alpha", "seed", "residual", "tolerance", "passed"]
DISTRIBUTION_FIELDS = ["size", "n_hat", "function", "sigma_functional", "limit", "error"]
PROBE_FIELDS = ["n", "gcd", "n_alpha", "structural_zeros", "coprime", "function", "sigma_functional"]


@contextmanager
def open_target(target: Target) -> Iterator[TextIO]:
    """Yield a text stream: stdout for None, the stream itself, or a fresh file."""
    if target is None:
        yield sys.stdout
    elif isinstance(target, (str, Path)):
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            yield f
    else:
        yield target


class ReportWriter:
    def __init__(self, float_format: str = ".17g") -> None:
        self.float_format = float_format

    def _num(self, value: float) -> str:
        return format(float(value), self.float_format)

    def write_rows(self, target: Target, fieldnames: List[str], rows: Iterable[Dict[str, Any]]) -> None:
        with open_target(target) as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)

    def spectrum_rows(self, spectrum: SpectrumResult) -> List[Dict[str, Any]]:
        first_zero = spectrum.min_dim - spectrum.structural_zero_count
        return [
            {"index": i, "sigma": self._num(v), "structural_zero": int(i >= first_zero)}
            for i, v in enumerate(spectrum.values)
        ]

    def check_rows(self, summary: VerificationSummary) -> List[Dict[str, Any]]:
        return [
            {
                "check": r.check,
                "n": r.n,
                "alpha": r.alpha,
                "seed": r.seed,
                "residual": self._num(r.residual),
                "tolerance": self._num(r.tolerance),
                "passed": int(r.passed),
            }
            for r in summary.records
        ]

    def distribution_rows(self, report: DistributionReport) -> List[Dict[str, Any]]:
        rows = []
        for record in report.records:
            for label in report.functions:
                rows.append(
                    {
                        "size": "x".join(str(k) for k in record.n),
                        "n_hat": record.n_hat,
                        "function": label,
                        "sigma_functional": self._num(record.values[label]),
                        "limit": self._num(report.limits[label]),
                        "error": self._num(record.errors[label]),
                    }
                )
        return rows

    def probe_rows(self, report: GcdProbeReport) -> List[Dict[str, Any]]:
        rows = []
        for record in report.records:
            for label in report.functions:
                rows.append(
                    {
                        "n": record.n,
                        "gcd": record.g,
                        "n_alpha": record.n_alpha,
                        "structural_zeros": record.structural_zeros,
                        "coprime": int(record.coprime),
                        "function": label,
                        "sigma_functional": self._num(record.values[label]),
                    }
                )
        return rows

    def write_spectrum(self, target: Target, spectrum: SpectrumResult) -> None:
        self.write_rows(target, SPECTRUM_FIELDS, self.spectrum_rows(spectrum))

    def write_checks(self, target: Target, summary: VerificationSummary) -> None:
        self.write_rows(target, CHECK_FIELDS, self.check_rows(summary))

    def write_distribution(self, target: Target, report: DistributionReport) -> None:
        self.write_rows(target, DISTRIBUTION_FIELDS, self.distribution_rows(report))

    def write_probe(self, target: Target, report: GcdProbeReport) -> None:
        self.write_rows(target, PROBE_FIELDS, self.probe_rows(report))

    def write_json(self, target: Target, config: Dict[str, Any], results: Any) -> None:
        with open_target(target) as f:
            f.write(json.dumps({"config": config, "results": results}, indent=2, sort_keys=True))
            f.write("\n")

    def write_text(self, target: Target, text: str) -> None:
        with open_target(target) as f:
            f.write(text)


def infer_format(path: Optional[Union[str, Path]], default: str = "csv") -> str:
    """Output format from the file extension; ``default`` for stdout or unknown suffixes."""
    if path is None:
        return default
    suffix = Path(path).suffix.lower()
    return {".csv": "csv", ".json": "json", ".txt": "matrix-text", ".mat": "matrix-text"}.get(suffix, default)
