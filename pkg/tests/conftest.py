import logging

import pytest

from alphacirc.core import make_rng
from alphacirc.logger import PACKAGE_LOGGER
from alphacirc.symbols import builtin_symbol


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Drop handlers bound to a captured stream once the test ends."""
    yield
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


@pytest.fixture
def rng():
    return make_rng(20240607)


@pytest.fixture
def laplace():
    return builtin_symbol("laplace1d")


@pytest.fixture
def shift1():
    return builtin_symbol("shift1")
