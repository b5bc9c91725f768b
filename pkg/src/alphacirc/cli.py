"""Command-line interface: gen, singvals, verify, distribution, multigrid.

Data goes to standard output or ``--out``; status lines and diagnostics go to
standard error. Exit codes: 0 ok, 1 failed verification, 2 invalid input,
3 numerical failure.
"""
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config_loader import default_config_path, load_config
from .core import INDEX_LIMIT, MultiIndex, make_rng, shift_vector, size_vector
from .distribution import SpectrumMode, TestFunction, distribution_experiment, gcd_regime_probe
from .errors import AlphaCircError, ConfigurationError, DomainError, NumericalError
from .logger import get_logger, setup_logging
from .models import AppConfig, MatrixKind, StructuredMatrix
from .multigrid import ProjectionSetup, multigrid_report
from .report_writer import ReportWriter, infer_format
from .spectra import singvals, svd_oracle, zero_alpha_reduction
from .structured import alpha_circulant, alpha_toeplitz, dumps_matrix, gcd_data, reduce_alpha
from .symbols import (
    SymbolSpec,
    builtin_symbol,
    circulant_column,
    loads_symbol,
    random_symbol,
    symbol_from_vector,
)
from .verify import ALL_CHECKS, run_verification

logger = get_logger(__name__)

COMMANDS = ["gen", "singvals", "verify", "distribution", "multigrid"]
EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3
MAX_BUILD_DIM = 8192  # largest n-hat built as a dense matrix


def status(tag: str, message: str) -> None:
    print(f"[{tag}] {message}", file=sys.stderr)


def parse_coefficients(text: str) -> np.ndarray:
    """Comma-separated ``re`` or ``re+imi`` tokens."""
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise ConfigurationError("empty coefficient list")
    try:
        return np.array([complex(tok.replace("i", "j")) for tok in tokens], dtype=np.complex128)
    except ValueError:
        raise ConfigurationError(f"malformed coefficient list {text!r}; use re or re+imi tokens") from None


def parse_sizes(text: str) -> List[MultiIndex]:
    """``16,32,64`` for one level, ``4x4,8x8`` for several."""
    try:
        return [MultiIndex.parse(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, DomainError):
        raise ConfigurationError(f"malformed size list {text!r}") from None


def _index(text: Optional[str], what: str) -> Optional[MultiIndex]:
    if text is None:
        return None
    try:
        index = MultiIndex.parse(text)
    except (ValueError, DomainError):
        raise ConfigurationError(f"malformed {what} {text!r}") from None
    if any(abs(e) > INDEX_LIMIT for e in index):
        raise ConfigurationError(f"{what} entries must not exceed 2**62, got {text!r}")
    return index


def resolve_symbol(args: argparse.Namespace, n: MultiIndex, alpha: MultiIndex, circulant: bool) -> SymbolSpec:
    sources = [name for name in ("builtin", "coeffs", "coeff_file") if getattr(args, name) is not None]
    if args.random:
        sources.append("random")
    if len(sources) != 1:
        raise ConfigurationError("give exactly one of --builtin, --coeffs, --coeff-file, --random")
    if args.builtin is not None:
        s = builtin_symbol(args.builtin)
    elif args.coeffs is not None:
        values = parse_coefficients(args.coeffs)
        if values.size == n.size:
            s = symbol_from_vector(values, n)
        elif n.d == 1:
            s = symbol_from_vector(values, MultiIndex.of(values.size))
        else:
            raise ConfigurationError(f"{values.size} coefficients do not fill the box n=({n})")
    elif args.coeff_file is not None:
        try:
            text = Path(args.coeff_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read {args.coeff_file}: {exc.strerror}") from None
        s = loads_symbol(text, d=n.d)
    else:
        hi = n.as_array() - 1
        lo = np.zeros(n.d, dtype=np.int64) if circulant else -alpha.as_array() * hi
        s = random_symbol(make_rng(args.seed), lo, hi)
    if s.d != n.d:
        raise ConfigurationError(f"symbol has {s.d} levels, n=({n}) has {n.d}")
    return s


def _shape(args: argparse.Namespace) -> tuple:
    n = _index(args.n, "--n")
    if n is None:
        raise ConfigurationError("--n is required")
    n = size_vector(n)
    alpha = _index(args.alpha, "--alpha") or MultiIndex.ones(n.d)
    return n, shift_vector(alpha, n.d)


def build_matrix(args: argparse.Namespace) -> StructuredMatrix:
    n, alpha = _shape(args)
    if n.size > MAX_BUILD_DIM:
        raise ConfigurationError(f"n-hat={n.size} is too large to build densely (limit {MAX_BUILD_DIM})")
    if args.kind == "circulant":
        s = resolve_symbol(args, n, alpha, circulant=True)
        return alpha_circulant(circulant_column(s, n), n, alpha)
    return alpha_toeplitz(resolve_symbol(args, n, alpha, circulant=False), n, alpha)


def _gcd_text(n: MultiIndex, alpha: MultiIndex) -> str:
    if n.d != 1:
        return ""
    reduced = reduce_alpha(alpha[0], n[0])
    if reduced == 0:
        return " alpha mod n = 0"
    data = gcd_data(n[0], reduced)
    return f" gcd={data.g} n_alpha={data.n_alpha} mu_alpha={data.mu_alpha}"


def _echo(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "log_level")}


def cmd_gen(args: argparse.Namespace, config: AppConfig) -> int:
    matrix = build_matrix(args)
    status("GEN", f"kind={matrix.kind.value} n=({matrix.n}) alpha=({matrix.alpha}){_gcd_text(matrix.n, matrix.alpha)}")
    writer = ReportWriter(config.output.float_format)
    fmt = args.format or infer_format(args.out, default="matrix-text")
    if fmt == "json":
        results = {"kind": matrix.kind.value, "real": matrix.matrix.real.tolist(), "imag": matrix.matrix.imag.tolist()}
        writer.write_json(args.out, _echo(args), results)
    elif fmt == "matrix-text":
        writer.write_text(args.out, dumps_matrix(matrix.matrix, config.output.float_format))
    else:
        raise ConfigurationError("gen writes matrix-text or json")
    return EXIT_OK


def cmd_singvals(args: argparse.Namespace, config: AppConfig) -> int:
    matrix = build_matrix(args)
    options = {"tolerance": config.oracle.tolerance, "max_sweeps": config.oracle.max_sweeps}
    mode = args.mode or "closed_form"
    if matrix.kind in (MatrixKind.TOEPLITZ, MatrixKind.ALPHA_TOEPLITZ) and mode == "closed_form" and not matrix.alpha.is_positive():
        s = resolve_symbol(args, matrix.n, matrix.alpha, circulant=False)
        spectrum = zero_alpha_reduction(s, matrix.n, matrix.alpha, MatrixKind.TOEPLITZ, **options)
    elif matrix.kind in (MatrixKind.CIRCULANT, MatrixKind.ALPHA_CIRCULANT):
        spectrum = singvals(matrix, mode=mode, method=config.oracle.method, **options)
    else:
        if matrix.n.size > config.oracle.max_dim:
            raise DomainError(f"oracle SVD capped at n-hat <= {config.oracle.max_dim}, got {matrix.n.size}")
        spectrum = svd_oracle(matrix, method=config.oracle.method, **options)
    status(
        "SINGVALS",
        f"kind={matrix.kind.value} n=({matrix.n}) alpha=({matrix.alpha}) provenance={spectrum.provenance.value} "
        f"structural_zeros={spectrum.structural_zero_count}",
    )
    writer = ReportWriter(config.output.float_format)
    fmt = args.format or infer_format(args.out)
    if fmt == "json":
        writer.write_json(args.out, _echo(args), spectrum.to_dict())
    elif fmt == "csv":
        writer.write_spectrum(args.out, spectrum)
    else:
        raise ConfigurationError("singvals writes csv or json")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: AppConfig) -> int:
    settings = config.verify
    if args.max_n is not None:
        settings.max_n = settings.closed_form_max_n = args.max_n
    if args.max_alpha is not None:
        settings.max_alpha = args.max_alpha
    if args.tolerance is not None:
        settings.tolerance = args.tolerance
    if args.seeds is not None:
        settings.seeds_per_case = args.seeds
    if args.workers is not None:
        settings.workers = args.workers
    if settings.max_n < 2 or settings.max_alpha < 0 or settings.seeds_per_case < 1:
        raise ConfigurationError("verify needs --max-n >= 2, --max-alpha >= 0 and --seeds >= 1")

    summary = run_verification(settings, config.oracle, seed=args.seed, checks=args.checks)
    writer = ReportWriter(config.output.float_format)
    fmt = args.format or infer_format(args.out)
    if fmt == "json":
        results = summary.to_dict()
        results["records"] = writer.check_rows(summary)
        writer.write_json(args.out, _echo(args), results)
    else:
        writer.write_checks(args.out, summary)

    for record in summary.failures():
        status(
            "VERIFY",
            f"FAILED {record.check} n={record.n} alpha={record.alpha} seed={record.seed} "
            f"residual={record.residual:.3e} tolerance={record.tolerance:.3e}",
        )
    status("VERIFY", f"{len(summary.records) - len(summary.failures())}/{len(summary.records)} cases passed")
    return EXIT_OK if summary.passed else EXIT_FAILED


def _test_functions(args: argparse.Namespace, config: AppConfig) -> List[TestFunction]:
    if args.functions:
        return [TestFunction.parse(tok) for tok in args.functions]
    return [TestFunction.from_mapping(raw) for raw in config.distribution.test_functions]


def cmd_distribution(args: argparse.Namespace, config: AppConfig) -> int:
    if args.sizes is None:
        raise ConfigurationError("--sizes is required")
    sizes = parse_sizes(args.sizes)
    if not sizes:
        raise ConfigurationError("--sizes is empty")
    d = sizes[0].d
    alpha = shift_vector(_index(args.alpha, "--alpha") or MultiIndex.ones(d), d)
    largest = size_vector(sizes[-1])
    family = args.kind
    functions = _test_functions(args, config)
    writer = ReportWriter(config.output.float_format)
    fmt = args.format or infer_format(args.out)

    if args.probe:
        if d != 1:
            raise ConfigurationError("--probe works on one-level sizes")
        s = resolve_symbol(args, largest, alpha, circulant=True)
        report = gcd_regime_probe(s, alpha[0], [n[0] for n in sizes], functions)
        status("DISTRIBUTION", f"gcd probe alpha={alpha[0]} over {len(sizes)} sizes")
        if fmt == "json":
            writer.write_json(args.out, _echo(args), report.to_dict())
        else:
            writer.write_probe(args.out, report)
        return EXIT_OK

    s = resolve_symbol(args, largest, alpha, circulant=family == "circulant")
    report = distribution_experiment(
        s,
        alpha,
        sizes,
        functions,
        mode=SpectrumMode(args.mode or "oracle"),
        family=family,
        quadrature=vars(config.quadrature),
        oracle={**vars(config.oracle), "method": config.distribution.oracle_method},
        workers=args.workers or 1,
        threshold=config.distribution.threshold,
    )
    for label in report.functions:
        status(
            "DISTRIBUTION",
            f"{label}: limit={report.limits[label]:.6g} final error={report.records[-1].errors[label]:.3e} "
            f"decreasing={report.trend[label]} converged={report.limit_converged[label]} passed={report.passed[label]}",
        )
    if fmt == "json":
        writer.write_json(args.out, _echo(args), report.to_dict())
    else:
        writer.write_distribution(args.out, report)
    return EXIT_OK


def cmd_multigrid(args: argparse.Namespace, config: AppConfig) -> int:
    n, alpha = _shape(args)
    if n.d != 1:
        raise ConfigurationError("multigrid works on one-level sizes")
    if args.alpha is None:
        alpha = MultiIndex.of(2)
    f = resolve_symbol(args, n, alpha, circulant=True)
    if args.q is not None and args.q_builtin is not None:
        raise ConfigurationError("give at most one of --q and --q-builtin")
    if args.q_builtin is not None:
        q = builtin_symbol(args.q_builtin)
    elif args.q is not None:
        values = parse_coefficients(args.q)
        q = symbol_from_vector(values, MultiIndex.of(values.size))
    else:
        q = SymbolSpec.of({(0,): 1.0})

    setup = ProjectionSetup.from_symbols(f, q, n[0], alpha[0])
    report = multigrid_report(
        setup,
        structure_tolerance=config.multigrid.structure_tolerance,
        alt_alpha=config.multigrid.alternative_alpha,
        oracle=vars(config.oracle),
        psd_tolerance=config.multigrid.psd_tolerance,
    )
    status(
        "MULTIGRID",
        f"n={setup.n} alpha={setup.alpha} coarse={setup.coarse_size} structure_defect={report.structure_defect:.3e} "
        f"eig_gap={report.eig_gap:.3e} singval_gap={report.singval_gap:.3e}",
    )
    writer = ReportWriter(config.output.float_format)
    fmt = args.format or infer_format(args.out, default="json")
    if fmt == "csv":
        writer.write_spectrum(args.out, report.singvals_formula)
    else:
        writer.write_json(args.out, _echo(args), report.to_dict())
    return EXIT_OK


HANDLERS = {
    "gen": cmd_gen,
    "singvals": cmd_singvals,
    "verify": cmd_verify,
    "distribution": cmd_distribution,
    "multigrid": cmd_multigrid,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphacirc", description="alpha-circulant and alpha-Toeplitz singular values")
    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("--builtin", type=str, help="Named symbol (laplace1d, shift1, bilaplace1d, pathological, smoothing1d, laplace2d)")
    parser.add_argument("--coeffs", type=str, help="Comma-separated coefficients, lexicographic, e.g. '1,1+2i,0'")
    parser.add_argument("--coeff-file", type=str, help="Symbol file with 'j1 ... jd re im' lines")
    parser.add_argument("--random", action="store_true", help="Random complex coefficients drawn from --seed")
    parser.add_argument("--n", type=str, help="Size vector, e.g. 100 or 2,3")
    parser.add_argument("--alpha", type=str, help="Shift vector, e.g. 2 or 1,0")
    parser.add_argument("--kind", choices=["toeplitz", "circulant"], default="toeplitz", help="Matrix family (default: toeplitz)")
    parser.add_argument("--sizes", type=str, help="Size sweep for distribution, e.g. 16,32,64 or 4x4,8x8")
    parser.add_argument("--seed", type=int, default=0, help="64-bit seed (default: 0)")
    parser.add_argument("--out", type=str, help="Output file (default: standard output)")
    parser.add_argument("--format", choices=["csv", "json", "matrix-text"], help="Output format (default: from --out)")
    parser.add_argument("--mode", choices=["closed_form", "oracle"], help="Spectrum source")
    parser.add_argument("--q", type=str, help="Coefficients of the projector symbol for multigrid")
    parser.add_argument("--q-builtin", type=str, help="Named projector symbol for multigrid")
    parser.add_argument("--functions", nargs="+", help="Test functions: hat:c,w gauss:c,s,r clamp:c")
    parser.add_argument("--probe", action="store_true", help="Run the gcd regime probe instead of the distribution experiment")
    parser.add_argument("--checks", nargs="+", choices=list(ALL_CHECKS), help="Subset of verification checks")
    parser.add_argument("--max-n", type=int, help="Largest n in the verification sweep")
    parser.add_argument("--max-alpha", type=int, help="Largest alpha in the identity sweep")
    parser.add_argument("--tolerance", type=float, help="Closed-form residual tolerance")
    parser.add_argument("--seeds", type=int, help="Random replicates per case")
    parser.add_argument("--workers", type=int, help="Worker threads")
    parser.add_argument("--config", type=str, help="YAML config (default: src/config/default_config.yaml)")
    parser.add_argument("--log-level", type=str, help="DEBUG, INFO, WARNING or ERROR")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(Path(args.config) if args.config else None)
        setup_logging(config.logging.dir, args.log_level or config.logging.level, config.logging.to_file)
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigurationError(f"--seed must fit in 64 unsigned bits, got {args.seed}")
        logger.debug(f"Running {args.command} with config {args.config or default_config_path()}")
        return HANDLERS[args.command](args, config)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MemoryError:
        print(f"error: out of memory running {args.command}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AlphaCircError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
