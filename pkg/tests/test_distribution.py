import numpy as np
import pytest

from alphacirc.distribution import (
    FunctionKind,
    SpectrumMode,
    TestFunction,
    analytic_limit,
    analytic_limit_estimate,
    degenerate_bound,
    distribution_experiment,
    equal_distribution_gap,
    gcd_regime_probe,
    sigma_functional,
)
from alphacirc.errors import ConfigurationError, DomainError, QuadratureError
from alphacirc.models import DistributionSettings, Provenance, SpectrumResult
from alphacirc.symbols import ThetaSymbol, builtin_symbol

ROOT2 = float(np.sqrt(2.0))


def test_parse_test_functions():
    """Command-line tokens map to the three kinds."""
    hat = TestFunction.parse("hat:1.5,0.5")
    assert hat.kind is FunctionKind.HAT
    assert hat.label == "hat(1.5,0.5)"
    assert TestFunction.parse("gauss:1,0.5,1.5").kind is FunctionKind.GAUSSIAN_BUMP
    assert TestFunction.parse("CLAMP:3") == TestFunction.clamp(3.0)


@pytest.mark.parametrize("token", ["hat:1", "wave:1,2", "hat:a,b", "hat:1,0", "clamp:-1"])
def test_parse_rejects_malformed(token):
    """Wrong arity, unknown kinds and invalid parameters are configuration errors."""
    with pytest.raises(ConfigurationError):
        TestFunction.parse(token)


def test_from_mapping_matches_defaults():
    """Mappings read from YAML use the same field names."""
    f = TestFunction.from_mapping({"kind": "gaussian_bump", "center": 1.0, "scale": 0.5, "radius": 1.5})
    assert f == TestFunction.gaussian_bump(1.0, 0.5, 1.5)
    with pytest.raises(ConfigurationError):
        TestFunction.from_mapping({"kind": "hat", "center": 1.0})


def test_test_function_values():
    """Hat, bump and clamp evaluate as continuous compactly supported or clamped maps."""
    hat = TestFunction.hat(1.0, 0.5)
    np.testing.assert_allclose(hat([1.0, 1.25, 1.5, 3.0]), [1.0, 0.5, 0.0, 0.0])
    bump = TestFunction.gaussian_bump(1.0, 0.5, 1.5)
    assert bump(1.0) == pytest.approx(1.0)
    assert bump(2.5) == 0.0
    assert bump(2.49) == pytest.approx(0.0, abs=1e-3)
    clamp = TestFunction.clamp(5.0)
    np.testing.assert_allclose(clamp([0.0, 2.0, 9.0]), [0.0, 2.0, 5.0])
    assert clamp.sup_norm == 5.0


def test_sigma_functional_and_gap():
    """Mean of F over the values; mismatched sizes are rejected."""
    spectrum = SpectrumResult(np.array([2.0, 1.0, 0.0, 0.0]), 2, Provenance.ORACLE)
    assert sigma_functional(TestFunction.clamp(5.0), spectrum, 4) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        sigma_functional(TestFunction.clamp(5.0), spectrum, 3)
    other = SpectrumResult(np.array([2.0, 2.0, 0.0, 0.0]), 2, Provenance.ORACLE)
    assert equal_distribution_gap(spectrum, other, TestFunction.clamp(5.0)) == pytest.approx(0.25)


def test_shift_toeplitz_limit_is_exact(shift1):
    """T_{100,2}(1 + e^{ix}): half the values at sqrt(2), half at zero, as the limit predicts."""
    hat = TestFunction.hat(ROOT2, 0.5)
    report = distribution_experiment(shift1, 2, [100], [hat])
    assert report.limits[hat.label] == pytest.approx(0.5, abs=1e-9)
    assert report.records[0].values[hat.label] == pytest.approx(0.5, abs=1e-10)
    assert report.final_errors()[hat.label] < 1e-9


def test_szego_laplacian(laplace):
    """alpha = 1 recovers the classical limit: mean of min(sigma, 5) tends to 2."""
    clamp = TestFunction.clamp(5.0)
    report = distribution_experiment(laplace, 1, [16, 32, 64, 128], [clamp], oracle={"method": "lapack"}, workers=2)
    assert report.limits[clamp.label] == pytest.approx(2.0, abs=1e-8)
    assert report.limit_converged[clamp.label]
    assert report.decreasing
    assert report.final_errors()[clamp.label] < 0.02
    assert [r.n_hat for r in report.records] == [16, 32, 64, 128]


def test_hat_error_shrinks_for_alpha_two(laplace):
    """alpha = 2 Toeplitz: the hat error at the largest size is below the threshold."""
    hat = TestFunction.hat(ROOT2, 0.5)
    report = distribution_experiment(laplace, 2, [32, 256], [hat], oracle={"method": "lapack"})
    assert report.final_errors()[hat.label] < 0.02


def test_szego_laplacian_to_512_with_configured_oracle(laplace):
    """Sizes 64..512 with the distribution oracle from the default settings pass the 0.02 threshold."""
    clamp = TestFunction.clamp(5.0)
    settings = DistributionSettings()
    report = distribution_experiment(
        laplace,
        1,
        [64, 128, 256, 512],
        [clamp],
        oracle={"method": settings.oracle_method},
        threshold=settings.threshold,
    )
    assert report.passed == {clamp.label: True}
    assert report.limits[clamp.label] == pytest.approx(2.0, abs=1e-8)


def test_threshold_decides_pass_flag(laplace):
    """A decreasing error still fails when it ends above the threshold."""
    clamp = TestFunction.clamp(5.0)
    loose = distribution_experiment(laplace, 1, [16, 64], [clamp], oracle={"method": "lapack"}, threshold=0.5)
    strict = distribution_experiment(laplace, 1, [16, 64], [clamp], oracle={"method": "lapack"}, threshold=0.0)
    assert loose.trend == strict.trend == {clamp.label: True}
    assert loose.passed[clamp.label] and not strict.passed[clamp.label]
    assert strict.to_dict()["passed"] == {clamp.label: False}
    assert strict.to_dict()["threshold"] == 0.0


def test_circulant_alpha_one_closed_form(laplace):
    """The circulant family with alpha = e follows the same limit."""
    clamp = TestFunction.clamp(5.0)
    report = distribution_experiment(laplace, 1, [16, 64], [clamp], mode="closed_form", family="circulant")
    assert report.records[-1].provenance is Provenance.CLOSED_FORM
    assert report.final_errors()[clamp.label] < 1e-10


def test_alpha_circulant_family_rejected(laplace):
    """Positive alpha other than e has no joint distribution for circulants."""
    with pytest.raises(ConfigurationError):
        distribution_experiment(laplace, 2, [8, 16], [TestFunction.clamp(5.0)], family="circulant")
    with pytest.raises(ConfigurationError):
        distribution_experiment(laplace, 2, [8, 16], [TestFunction.clamp(5.0)], family="hankel")


def test_experiment_validates_sizes(laplace):
    """Sizes must increase and match the number of levels."""
    clamp = [TestFunction.clamp(5.0)]
    with pytest.raises(DomainError):
        distribution_experiment(laplace, 1, [16, 8], clamp)
    with pytest.raises(DomainError):
        distribution_experiment(laplace, 1, [(4, 4)], clamp)
    with pytest.raises(DomainError):
        distribution_experiment(laplace, 1, [], clamp)
    with pytest.raises(DomainError):
        distribution_experiment(laplace, 1, [8], [])


def test_degenerate_alpha_bound(laplace):
    """alpha = 0: Sigma(F) sits inside the two-sided bound around F(0)."""
    clamp = TestFunction.clamp(5.0)
    report = distribution_experiment(laplace, 0, [8, 16], [clamp], mode="closed_form")
    assert report.limits[clamp.label] == 0.0
    for record in report.records:
        lo, hi = degenerate_bound(clamp, record.n_hat)
        assert lo - 1e-12 <= record.values[clamp.label] <= hi + 1e-12
        assert record.provenance is Provenance.REDUCTION
    assert report.records[-1].values[clamp.label] == pytest.approx(5.0 / 16)


def test_degenerate_bound_values():
    """Bound is (1 - 1/m) F(0) -+ ||F||_inf / m."""
    hat = TestFunction.hat(0.0, 1.0)
    assert degenerate_bound(hat, 4) == pytest.approx((0.5, 1.0))


def test_two_level_reduction_matches_oracle():
    """Closed-form and oracle modes agree for a zero component of alpha."""
    clamp = TestFunction.clamp(5.0)
    s = builtin_symbol("laplace2d")
    sizes = [(3, 3), (4, 4)]
    closed = distribution_experiment(s, (1, 0), sizes, [clamp], mode=SpectrumMode.CLOSED_FORM)
    brute = distribution_experiment(s, (1, 0), sizes, [clamp], mode=SpectrumMode.ORACLE)
    for a, b in zip(closed.records, brute.records):
        assert a.values[clamp.label] == pytest.approx(b.values[clamp.label], abs=1e-10)


def test_oracle_size_cap(laplace):
    """Sizes beyond the configured dense cap are refused."""
    with pytest.raises(DomainError):
        distribution_experiment(laplace, 1, [16], [TestFunction.clamp(5.0)], oracle={"max_dim": 8})


def test_analytic_limit_strict_mode(laplace):
    """Without room to double the grid the limit is reported as unsettled."""
    theta = ThetaSymbol.from_symbol(laplace, 1)
    clamp = TestFunction.clamp(5.0)
    value, converged, points = analytic_limit_estimate(clamp, theta, initial_points=64, max_points=64)
    assert not converged and points == 64
    assert value == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(QuadratureError):
        analytic_limit(clamp, theta, initial_points=64, max_points=64)
    assert analytic_limit(clamp, theta, initial_points=64, max_points=1024) == pytest.approx(2.0, abs=1e-8)


def test_multilevel_quadrature_starts_per_level():
    """d = 2 grids start at initial_points_per_level and stop at max_total_points."""
    theta = ThetaSymbol.from_symbol(builtin_symbol("laplace2d"), (1, 1))
    hat = TestFunction.hat(4.0, 1.0)
    _, converged, points = analytic_limit_estimate(hat, theta, max_total_points=256 ** 2)
    assert not converged and points == 256
    _, _, points = analytic_limit_estimate(hat, theta, max_total_points=64 ** 2, initial_points_per_level=32)
    assert points == 64


def test_gcd_regime_probe(shift1):
    """Even n share a factor with alpha = 2 and carry n/2 structural zeros."""
    clamp = TestFunction.clamp(5.0)
    report = gcd_regime_probe(shift1, 2, [8, 9, 10, 11], [clamp])
    assert [r.n for r in report.trajectory(coprime=True)] == [9, 11]
    for record in report.trajectory(coprime=False):
        assert (record.g, record.n_alpha, record.structural_zeros) == (2, record.n // 2, record.n // 2)
        assert record.values[clamp.label] == pytest.approx(1.0)
    for record in report.trajectory(coprime=True):
        assert record.structural_zeros == 0
    assert report.to_dict()["records"][0]["gcd"] == 2
    with pytest.raises(DomainError):
        gcd_regime_probe(shift1, 0, [8], [clamp])


def test_report_serializes(shift1):
    """to_dict carries limits, trend and per-size values."""
    hat = TestFunction.hat(ROOT2, 0.5)
    data = distribution_experiment(shift1, 2, [10, 20], [hat]).to_dict()
    assert data["alpha"] == [2]
    assert [r["n_hat"] for r in data["records"]] == [10, 20]
    assert set(data["limits"]) == {hat.label}
