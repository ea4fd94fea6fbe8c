import csv
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def trial_division_primes(n):
    """Independent oracle: first n primes by plain trial division."""
    out = []
    k = 2
    while len(out) < n:
        if all(k % q for q in out if q * q <= k):
            out.append(k)
        k += 1
    return out


def sig_digits_agree(x, ref, digits=12):
    if ref == 0:
        return abs(x) <= 10.0 ** -(digits + 3)
    return abs(x - ref) <= 0.5 * 10.0 ** (1 - digits) * abs(ref)


@pytest.fixture(scope="session")
def reference_series():
    """Reference values: N -> {S, s, t, E, e}, parsed from decimal strings."""
    with open(DATA / "reference_series.csv") as fh:
        return {int(r["N"]): {k: float(v) for k, v in r.items() if k != "N"} for r in csv.DictReader(fh)}


@pytest.fixture(scope="session")
def oracle_primes():
    return trial_division_primes(10001)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
