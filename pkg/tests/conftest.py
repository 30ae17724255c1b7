import itertools
import warnings

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from rmatch.constructions import ParameterRangeWarning
from rmatch.core import Hypergraph, PartiteGraph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(autouse=True)
def _quiet_range_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterRangeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid:>4} {'PASS' if ok else 'FAIL'}  {detail}")


@st.composite
def hypergraphs(draw, max_n=7, ks=(2, 3), min_n=None):
    k = draw(st.sampled_from(ks))
    n = draw(st.integers(min_value=max(k, min_n or k), max_value=max_n))
    all_sets = list(itertools.combinations(range(1, n + 1), k))
    chosen = draw(st.lists(st.sampled_from(all_sets), max_size=min(len(all_sets), 25),
                           unique=True)) if all_sets else []
    return Hypergraph.from_edges(n, k, chosen)


@st.composite
def partite_graphs(draw, max_n=6, ks=(2, 3), balanced=False):
    k = draw(st.sampled_from(ks))
    if balanced:
        m = draw(st.integers(min_value=1, max_value=max(1, max_n // k)))
        n = k * m
    else:
        n = draw(st.integers(min_value=k, max_value=max_n))
        m = draw(st.integers(min_value=1, max_value=3))
    sets = [S + (n + i,) for i in range(1, m + 1)
            for S in itertools.combinations(range(1, n + 1), k)]
    chosen = draw(st.lists(st.sampled_from(sets), max_size=min(len(sets), 30), unique=True))
    return PartiteGraph.from_edges(n, m, k, chosen)
