import itertools

import pytest

ACCEPTANCE_LINES: list[str] = []


def lex_compositions(n, l):
    """Reference P(n, l): filter the whole box, sort lexicographically."""
    return sorted(u for u in itertools.product(range(n + 1), repeat=l) if sum(u) == n)


def naive_agree(us, l):
    return {i + 1 for i in range(l) if len({u[i] for u in us}) == 1}


def all_subsets(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def naive_max_product(spaces, t):
    """Maximum product over every choice of one subset per space.  Tiny inputs only."""
    elems = [lex_compositions(n, l) for n, l in spaces]
    l = min(l for _, l in spaces)
    best = 0
    for choice in itertools.product(*(list(all_subsets(e)) for e in elems)):
        p = 1
        for fam in choice:
            p *= len(fam)
        if p <= best:
            continue
        if all(len(naive_agree(us, l)) >= t for us in itertools.product(*choice)):
            best = p
    return best


@pytest.fixture
def report():
    def emit(criterion, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
