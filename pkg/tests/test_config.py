import pytest

from alphacirc.config_loader import default_config_path, load_config
from alphacirc.errors import ConfigurationError
from alphacirc.models import AppConfig


def write(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_default_file_matches_dataclass_defaults():
    """The shipped YAML spells out the built-in defaults."""
    assert default_config_path().is_file()
    assert load_config().to_dict() == AppConfig().to_dict()


def test_partial_file_keeps_other_defaults(tmp_path):
    """Missing sections and keys fall back to defaults; values are coerced."""
    config = load_config(write(tmp_path, "verify:\n  max_n: '12'\noracle:\n  method: lapack\n"))
    assert config.verify.max_n == 12
    assert config.verify.max_alpha == 5
    assert config.oracle.method == "lapack"
    assert config.quadrature.initial_points == 4096
    assert config.quadrature.initial_points_per_level == 256
    assert config.distribution.oracle_method == "lapack"


def test_empty_file_is_all_defaults(tmp_path):
    """An empty document is an empty mapping."""
    assert load_config(write(tmp_path, "")).to_dict() == AppConfig().to_dict()


@pytest.mark.parametrize(
    "text",
    [
        "verify:\n  max_m: 3\n",
        "solver:\n  x: 1\n",
        "oracle:\n  method: qr\n",
        "verify:\n  tolerance: -1\n",
        "verify:\n  max_n: 1\n",
        "quadrature:\n  initial_points: 100\n  max_points: 10\n",
        "quadrature:\n  initial_points_per_level: 0\n",
        "distribution:\n  oracle_method: qr\n",
        "multigrid:\n  psd_tolerance: -1\n",
        "output:\n  float_format: q\n",
        "oracle:\n  max_sweeps: many\n",
        "oracle: [1, 2]\n",
        "- just\n- a list\n",
        "verify: {max_n: [\n",
    ],
)
def test_invalid_files(tmp_path, text):
    """Unknown names, bad values and malformed YAML are configuration errors."""
    with pytest.raises(ConfigurationError):
        load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    """A path that does not exist is reported, not raised as OSError."""
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.yaml")
