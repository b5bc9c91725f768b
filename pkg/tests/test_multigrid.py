import numpy as np
import pytest

from alphacirc.errors import DomainError
from alphacirc.models import MatrixKind, Provenance
from alphacirc.multigrid import (
    ProjectionSetup,
    alpha_fold_min,
    centred_symbol,
    check_psd,
    circulant_sqrt,
    multigrid_report,
    pathological_symmetry_probe,
    project,
    project_general,
    projected_eigs,
    projected_symbol,
    projector_matrix,
    projector_singvals,
    structure_defect,
)
from alphacirc.spectra import svd_oracle
from alphacirc.structured import circulant
from alphacirc.symbols import SymbolSpec, builtin_symbol, circulant_column, eval_symbol_grid


@pytest.fixture
def smoothing():
    return builtin_symbol("smoothing1d")


def unit(n):
    e = np.zeros(n)
    e[0] = 1.0
    return e


@pytest.mark.parametrize("n", [8, 16])
def test_laplacian_with_smoothing_projector(laplace, smoothing, n):
    """Projected operator stays circulant and both spectral paths agree."""
    report = multigrid_report(ProjectionSetup.from_symbols(laplace, smoothing, n))
    assert report.structure_defect < 1e-10
    assert report.eig_gap < 1e-10
    assert report.singval_gap < 1e-8
    assert report.singvals_formula.min_dim == n // 2
    assert report.singvals_formula.provenance is Provenance.CLOSED_FORM


def test_identity_projection_is_identity():
    """P = A = I_8 with alpha = 2 projects to I_4."""
    setup = ProjectionSetup(n=8, alpha=2, a_fine=unit(8), p_coeffs=unit(8))
    coarse = project(setup)
    assert coarse.kind is MatrixKind.CIRCULANT
    np.testing.assert_allclose(coarse.matrix, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(projector_singvals(setup).values, np.ones(4), atol=1e-14)


def test_project_requires_divisibility(laplace, smoothing):
    """The divisible entry point refuses alpha not dividing n."""
    with pytest.raises(DomainError):
        project(ProjectionSetup.from_symbols(laplace, smoothing, 9, 2))


def test_general_projection_sizes(laplace, smoothing):
    """n = 12, alpha = 3 coarsens to 4; n = 9, alpha = 2 keeps all 9."""
    coarse = project_general(ProjectionSetup.from_symbols(laplace, smoothing, 12, 3))
    assert coarse.matrix.shape == (4, 4)
    assert coarse.kind is MatrixKind.CIRCULANT
    setup = ProjectionSetup.from_symbols(laplace, smoothing, 9, 2)
    assert (setup.g, setup.coarse_size, setup.coarsening) == (1, 9, False)
    full = project_general(setup)
    assert full.matrix.shape == (9, 9)
    assert structure_defect(full.matrix) < 1e-10


def test_setup_validation(laplace, smoothing):
    """Sizes, alpha range and column lengths are checked on construction."""
    with pytest.raises(DomainError):
        ProjectionSetup(n=1, alpha=1, a_fine=[1.0], p_coeffs=[1.0])
    with pytest.raises(DomainError):
        ProjectionSetup.from_symbols(laplace, smoothing, 8, 8)
    with pytest.raises(DomainError):
        ProjectionSetup(n=4, alpha=2, a_fine=unit(4), p_coeffs=unit(3))
    with pytest.raises(DomainError):
        ProjectionSetup.from_symbols(builtin_symbol("laplace2d"), smoothing, 8)


def test_non_psd_operators_rejected(laplace, smoothing, shift1):
    """A must be Hermitian positive semidefinite."""
    with pytest.raises(DomainError):
        check_psd(ProjectionSetup.from_symbols(shift1, smoothing, 8))
    negative = SymbolSpec.of({k: -v for k, v in laplace.coeffs.items()})
    with pytest.raises(DomainError):
        project(ProjectionSetup.from_symbols(negative, smoothing, 8))


def test_psd_tolerance_is_configurable(smoothing):
    """An eigenvalue of -1e-8 fails the default check and passes a looser tolerance."""
    nearly = SymbolSpec.of({-1: -1.0, 0: 2.0 - 1e-8, 1: -1.0})
    setup = ProjectionSetup.from_symbols(nearly, smoothing, 8)
    with pytest.raises(DomainError):
        check_psd(setup)
    assert check_psd(setup, 1e-6).min() == pytest.approx(-1e-8, abs=1e-12)
    with pytest.raises(DomainError):
        multigrid_report(setup)
    report = multigrid_report(setup, psd_tolerance=1e-6)
    assert report.structure_defect < 1e-10
    probe = pathological_symmetry_probe(nearly, 0.0, 16, tolerance=1e-6)
    assert probe.tolerance == 1e-6 and not probe.mirrored_zero


def test_projected_symbol_coefficients(laplace, smoothing):
    """g = |q|^2 f for f = 2 - 2cos x and q = 1 + cos x."""
    g = projected_symbol(ProjectionSetup.from_symbols(laplace, smoothing, 8))
    x = np.linspace(-np.pi, np.pi, 17)
    expected = (1 + np.cos(x)) ** 2 * (2 - 2 * np.cos(x))
    np.testing.assert_allclose(eval_symbol_grid(g, x).real, expected, atol=1e-12)


def test_centred_symbol_fallback():
    """Columns without symbols are read on the centred index range."""
    column = np.array([2.0, -1.0, 0.0, 0.0, 0.0, -1.0])
    s = centred_symbol(column)
    assert s.get((-1,)) == -1.0 and s.get((1,)) == -1.0 and s.get((0,)) == 2.0
    setup = ProjectionSetup(n=6, alpha=2, a_fine=column, p_coeffs=unit(6))
    coarse = project(setup)
    np.testing.assert_allclose(np.sort(projected_eigs(setup)), np.linalg.eigvalsh(coarse.matrix), atol=1e-12)


def test_circulant_sqrt_squares_back(laplace):
    """The circulant root of a PSD circulant squares to it."""
    a = circulant_column(laplace, 8)
    root = circulant_sqrt(a, 8)
    np.testing.assert_allclose(root @ root, circulant(a, 8).matrix, atol=1e-12)


def test_projector_matrix_shape(laplace, smoothing):
    """(P* A P)^(1/2) Z has n rows and n_alpha columns."""
    setup = ProjectionSetup.from_symbols(laplace, smoothing, 12, 3)
    matrix = projector_matrix(setup)
    assert matrix.shape == (12, 4)
    values = svd_oracle(matrix).values
    assert np.max(np.abs(values - projector_singvals(setup).values)) < 1e-8


def test_pathological_probe():
    """2 - 2cos 2x vanishes at 0 and pi; the alpha = 2 fold keeps the zero, alpha = 3 does not."""
    probe = pathological_symmetry_probe(builtin_symbol("pathological"), 0.0, 16)
    assert probe.mirrored_zero
    assert probe.fold_has_zero == {2: True, 3: False}
    assert probe.fold_minima[3] == pytest.approx(2.0)
    assert probe.to_dict()["fold_has_zero"] == {"2": True, "3": False}


def test_laplacian_probe(laplace):
    """2 - 2cos x has no mirrored zero and its alpha = 2 fold is constant 2."""
    probe = pathological_symmetry_probe(laplace, 0.0, 16)
    assert not probe.mirrored_zero
    assert probe.fold_has_zero[2] is False
    assert alpha_fold_min(laplace, 2, 16) == pytest.approx(2.0)


@pytest.mark.parametrize("n", [8, 12, 16, 24])
@pytest.mark.parametrize("alpha", [2, 3, 4])
def test_dual_path_sweep(laplace, smoothing, n, alpha):
    """Fold formula and direct computation agree over divisible and non-divisible pairs."""
    report = multigrid_report(ProjectionSetup.from_symbols(laplace, smoothing, n, alpha))
    assert report.structure_defect < 1e-10
    assert report.eig_gap < 1e-10
    assert report.singval_gap < 1e-7
    assert report.eig_formula.size == n // np.gcd(n, alpha)
    assert report.to_dict()["setup"]["coarse_size"] == n // np.gcd(n, alpha)
