import numpy as np
import pytest

from twinsep.sieve import is_prime_oracle

ORACLE_LIMIT = 10**6


@pytest.fixture(scope="session")
def oracle_primes():
    """Primes <= 1e6 by trial division; independent of the sieve."""
    return np.array([n for n in range(ORACLE_LIMIT + 1) if is_prime_oracle(n)], dtype=np.int64)


@pytest.fixture(scope="session")
def acceptance_log(request):
    lines = []
    request.config._acceptance_lines = lines
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
