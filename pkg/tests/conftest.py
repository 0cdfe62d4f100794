import itertools
import random

import pytest

from linf_trees import lp
from linf_trees.dissim import DissimilarityMap
from linf_trees.ratlin import RatMatrix, rank, rref


def dm(*values, labels=None) -> DissimilarityMap:
    return DissimilarityMap.of(values, labels)


@pytest.fixture
def rng():
    return random.Random(20240601)


def solve_square(rows, rhs):
    """Unique solution of a square system, or None."""
    aug = RatMatrix.from_rows([list(r) + [b] for r, b in zip(rows, rhs)])
    reduced, pivots = rref(aug)
    n = len(rows[0])
    if pivots != tuple(range(n)):
        return None
    return tuple(reduced[i, n] for i in range(n))


def vertices(constraints, dim):
    eqs = [c for c in constraints if c.relation == lp.EQ]
    ineqs = [c for c in constraints if c.relation == lp.LE]
    out = set()
    for active in itertools.combinations(ineqs, max(dim - len(eqs), 0)):
        chosen = eqs + list(active)
        for sub in itertools.combinations(chosen, dim):
            x = solve_square([c.coefficients for c in sub], [c.rhs for c in sub])
            if x is not None and all(c.satisfied_by(x) for c in constraints):
                out.add(x)
    return out


def affine_dimension(points):
    pts = sorted(points)
    if not pts:
        return None
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    return rank(RatMatrix.from_rows(diffs)) if diffs else 0


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
