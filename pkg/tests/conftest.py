import pytest

from gaussfit import build_erf_table


@pytest.fixture(scope="session")
def erf_table():
    """Default lookup table (k from 0.1 to 10, step 0.01); built once."""
    return build_erf_table(0.1, 0.01, 991)
