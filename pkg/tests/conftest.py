import pytest

from mvpir.family import grolmusz_S, search_family


@pytest.fixture(scope="session")
def fam6():
    """m=6, S={1,3,4}, k=8, n=24."""
    return search_family(6, 8, grolmusz_S((2, 3)), 24, seed=1)


@pytest.fixture(scope="session")
def fam6_small():
    """m=6, S={1,3,4}, k=2, n=3: small enough to enumerate every z."""
    return search_family(6, 2, grolmusz_S((2, 3)), 3, seed=1)


@pytest.fixture(scope="session")
def fam_full():
    """m=6, every nonzero inner product allowed, k=4, n=12."""
    return search_family(6, 4, frozenset(range(1, 6)), 12, seed=1)


@pytest.fixture(scope="session")
def fam30():
    """m=30, S from primes (2,3,5), k=8, n=8."""
    return search_family(30, 8, grolmusz_S((2, 3, 5)), 8, seed=1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
