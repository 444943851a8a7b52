import itertools

from hypothesis import strategies as st

from digavoid.digraph import build_digraph


@st.composite
def small_digraphs(draw, max_n=8, min_n=0, max_arcs=None):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs) if max_arcs is None else max_arcs)) if pairs else []
    return build_digraph(n, chosen)


def induced_subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
