import pytest
from hypothesis import strategies as st

from discrete_hausdorff.grid import GridScale, GridSet, from_indices

ACCEPTANCE_LINES: list[str] = []


def _mask_runs(mask, size):
    runs, i = [], 0
    while i < size:
        if mask >> i & 1:
            j = i
            while j < size and mask >> j & 1:
                j += 1
            runs.append((i, j - i))
            i = j
        else:
            i += 1
    return tuple(runs)


def all_gridsets(n):
    """Every subset of {0..n}, as GridSets built straight from canonical runs."""
    scale = GridScale(n)
    for mask in range(1 << (n + 1)):
        yield GridSet(_mask_runs(mask, n + 1), scale)


@st.composite
def gridsets(draw, max_n=64, min_n=1):
    n = draw(st.integers(min_n, max_n))
    idx = draw(st.sets(st.integers(0, n)))
    return from_indices(idx, GridScale(n))


@st.composite
def gridset_pairs(draw, max_n=64):
    n = draw(st.integers(1, max_n))
    scale = GridScale(n)
    a = draw(st.sets(st.integers(0, n)))
    b = draw(st.sets(st.integers(0, n)))
    return from_indices(a, scale), from_indices(b, scale)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES
