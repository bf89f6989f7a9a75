import pytest

from freud_sobolev.freud_coeffs import solve_string_system
from freud_sobolev.precision import ext

# independent oracle values (adaptive mpmath quadrature of x**k exp(-x**4),
# extended-precision Stieltjes procedure)
MU0 = 1.812804954110954155965343
MU2 = 0.6127083512325888225645492
MU4 = 0.4532012385277385389913356
B_ORACLE = [
    0.3379891200336423644977238,
    0.4016796597635173585799815,
    0.5051042323448222978184702,
    0.5780581503317113210963305,
    0.6467673820472449703838905,
    0.7078631509051524615443122,
    0.7644231260520773234077943,
]
NORM_P2 = 0.24611248205737196985


@pytest.fixture(scope="session")
def table():
    return solve_string_system(8192)


@pytest.fixture(scope="session")
def small_table():
    return solve_string_system(200)


@pytest.fixture(scope="session")
def ext_table():
    return solve_string_system(80, precision=ext(60))


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_acceptance(key: str, ok: bool, detail: str) -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    order = lambda k: (int("".join(c for c in k if c.isdigit())), k)
    for key in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
