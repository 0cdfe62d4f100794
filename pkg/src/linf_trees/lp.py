"""Exact rational linear programming.

A dense two-phase tableau simplex with Bland's rule.  All variables of an
:class:`LPProblem` are free; sign restrictions are ordinary constraints.
Arithmetic runs on gmpy2 ``mpq`` internally and everything crossing the
module boundary is a :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .ratlin import RatMatrix, rank, rational, vector

LE, EQ, LT = "<=", "=", "<"
OPTIMAL, UNBOUNDED, INFEASIBLE = "optimal", "unbounded", "infeasible"


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in (LE, EQ, LT):
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def lhs(self, x: Sequence) -> Fraction:
        return sum((a * rational(v) for a, v in zip(self.coefficients, x)), Fraction(0))

    def satisfied_by(self, x: Sequence) -> bool:
        v = self.lhs(x)
        if self.relation == LE:
            return v <= self.rhs
        if self.relation == LT:
            return v < self.rhs
        return v == self.rhs


def le(coefficients, rhs) -> LinearConstraint:
    return LinearConstraint(vector(coefficients), LE, rational(rhs))


def ge(coefficients, rhs) -> LinearConstraint:
    return LinearConstraint(tuple(-c for c in vector(coefficients)), LE, -rational(rhs))


def eq(coefficients, rhs) -> LinearConstraint:
    return LinearConstraint(vector(coefficients), EQ, rational(rhs))


def lt(coefficients, rhs) -> LinearConstraint:
    return LinearConstraint(vector(coefficients), LT, rational(rhs))


def gt(coefficients, rhs) -> LinearConstraint:
    return LinearConstraint(tuple(-c for c in vector(coefficients)), LT, -rational(rhs))


@dataclass(frozen=True)
class LPProblem:
    ambient_dim: int
    constraints: tuple[LinearConstraint, ...]
    objective: tuple[Fraction, ...]
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if len(self.objective) != self.ambient_dim:
            raise ValueError(
                f"objective has length {len(self.objective)}, ambient dimension is {self.ambient_dim}"
            )
        for k, c in enumerate(self.constraints):
            if c.dim != self.ambient_dim:
                raise ValueError(
                    f"constraint {k} has {c.dim} coefficients, ambient dimension is {self.ambient_dim}"
                )

    @classmethod
    def build(cls, ambient_dim, constraints, objective=None, sense="min") -> "LPProblem":
        objective = vector(objective) if objective is not None else (Fraction(0),) * ambient_dim
        return cls(ambient_dim, tuple(constraints), objective, sense)


@dataclass(frozen=True)
class LPOutcome:
    status: str
    value: Fraction | None = None
    witness: tuple[Fraction, ...] | None = None

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    """Standard-form tableau for min c.x, A x (<=|=) b over split free variables."""

    def __init__(self, n: int, rows: list[tuple[list, str, object]]):
        self.n = n
        n_slack = sum(1 for _, rel, _ in rows if rel == LE)
        n_art = 0
        signs = []
        for coeffs, rel, rhs in rows:
            flip = rhs < 0
            signs.append(flip)
            if rel == EQ or flip:
                n_art += 1
        self.n_struct = 2 * n
        self.first_art = 2 * n + n_slack
        self.ncols = self.first_art + n_art
        self.T: list[list] = []
        self.basis: list[int] = []
        zero = mpq(0)
        s = a = 0
        for (coeffs, rel, rhs), flip in zip(rows, signs):
            row = [zero] * (self.ncols + 1)
            sgn = -1 if flip else 1
            for j, c in enumerate(coeffs):
                if c:
                    row[j] = sgn * c
                    row[n + j] = -sgn * c
            if rel == LE:
                row[2 * n + s] = mpq(sgn)
                slack = 2 * n + s
                s += 1
            row[-1] = sgn * rhs
            if rel == EQ or flip:
                col = self.first_art + a
                a += 1
                row[col] = mpq(1)
                self.basis.append(col)
            else:
                self.basis.append(slack)
            self.T.append(row)
        self.forbidden = set()

    def pivot(self, r: int, j: int, cost: list) -> None:
        pr = self.T[r]
        piv = pr[j]
        if piv != 1:
            pr = [v / piv if v else v for v in pr]
            self.T[r] = pr
        nz = [k for k, v in enumerate(pr) if v]
        for i, row in enumerate(self.T):
            if i != r:
                f = row[j]
                if f:
                    for k in nz:
                        row[k] -= f * pr[k]
        f = cost[j]
        if f:
            for k in nz:
                cost[k] -= f * pr[k]
        self.basis[r] = j

    def run(self, cost: list) -> str:
        while True:
            enter = next((j for j in range(self.ncols)
                          if cost[j] < 0 and j not in self.forbidden), None)
            if enter is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], enter, cost)

    def cost_row(self, c: list) -> list:
        cost = list(c) + [mpq(0)]
        for i, row in enumerate(self.T):
            cb = c[self.basis[i]]
            if cb:
                for k, v in enumerate(row):
                    if v:
                        cost[k] -= cb * v
        return cost

    def solution(self) -> list:
        vals = [mpq(0)] * self.ncols
        for i, b in enumerate(self.basis):
            vals[b] = self.T[i][-1]
        return [vals[j] - vals[self.n + j] for j in range(self.n)]


def _run(n: int, constraints: Sequence[LinearConstraint], objective: Sequence, maximize: bool):
    rows = []
    for c in constraints:
        if c.relation == LT:
            raise ValueError("strict constraints are only accepted by strictly_feasible")
        rows.append(([mpq(v) for v in c.coefficients], c.relation, mpq(c.rhs)))
    tab = _Tableau(n, rows)
    zero = mpq(0)

    if tab.first_art < tab.ncols:
        c1 = [zero] * tab.first_art + [mpq(1)] * (tab.ncols - tab.first_art)
        cost = tab.cost_row(c1)
        tab.run(cost)
        if cost[-1] != 0:
            return INFEASIBLE, None, None
        # drive zero-level artificials out of the basis, dropping redundant rows
        r = 0
        while r < len(tab.T):
            if tab.basis[r] >= tab.first_art:
                k = next((k for k in range(tab.first_art) if tab.T[r][k]), None)
                if k is None:
                    del tab.T[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, k, cost)
            r += 1
        tab.forbidden = set(range(tab.first_art, tab.ncols))

    obj = [mpq(v) for v in objective]
    if maximize:
        obj = [-v for v in obj]
    c2 = obj + [-v for v in obj] + [zero] * (tab.ncols - 2 * n)
    cost = tab.cost_row(c2)
    status = tab.run(cost)
    x = tab.solution()
    if status == UNBOUNDED:
        return UNBOUNDED, None, x
    value = -cost[-1]
    if maximize:
        value = -value
    return OPTIMAL, value, x


def solve(problem: LPProblem) -> LPOutcome:
    """Exact optimum of ``problem`` with a rational witness.

    Unbounded outcomes still carry a feasible witness.
    """
    for c in problem.constraints:
        if c.relation == LT:
            raise ValueError("solve() does not accept strict constraints")
    status, value, x = _run(problem.ambient_dim, problem.constraints, problem.objective,
                            problem.sense == "max")
    if status == INFEASIBLE:
        return LPOutcome(INFEASIBLE)
    witness = tuple(_frac(v) for v in x)
    return LPOutcome(status, _frac(value) if value is not None else None, witness)


def minimize(dim: int, constraints, objective) -> LPOutcome:
    return solve(LPProblem.build(dim, constraints, objective, "min"))


def maximize(dim: int, constraints, objective) -> LPOutcome:
    return solve(LPProblem.build(dim, constraints, objective, "max"))


def _infer_dim(constraints, dim):
    if dim is not None:
        return dim
    if not constraints:
        raise ValueError("ambient dimension required for an empty constraint list")
    return constraints[0].dim


def feasible_point(constraints: Sequence[LinearConstraint], dim: int | None = None):
    """Some point satisfying all non-strict ``constraints``, or None."""
    dim = _infer_dim(constraints, dim)
    out = solve(LPProblem.build(dim, constraints))
    return out.witness if out.feasible else None


def strictly_feasible(constraints: Sequence[LinearConstraint], dim: int | None = None):
    """Decide whether every constraint can hold with all strict ones strict.

    Each ``a.x < b`` becomes ``a.x + t <= b`` and ``t`` is maximised subject
    to ``t <= 1``; the system is strictly feasible iff the optimum is positive.
    Returns ``(flag, witness)`` with witness None when the flag is False.
    """
    dim = _infer_dim(constraints, dim)
    constraints = list(constraints)
    if not any(c.relation == LT for c in constraints):
        p = feasible_point(constraints, dim)
        return p is not None, p
    zero, one = Fraction(0), Fraction(1)
    lifted = []
    for c in constraints:
        if c.relation == LT:
            lifted.append(LinearConstraint(c.coefficients + (one,), LE, c.rhs))
        else:
            lifted.append(LinearConstraint(c.coefficients + (zero,), c.relation, c.rhs))
    lifted.append(LinearConstraint((zero,) * dim + (one,), LE, one))
    out = maximize(dim + 1, lifted, (zero,) * dim + (one,))
    if out.status != OPTIMAL or out.value <= 0:
        return False, None
    return True, out.witness[:dim]


def polyhedron_dimension(constraints: Sequence[LinearConstraint], dim: int | None = None):
    """Dimension of the affine hull of a polyhedron, or None when it is empty.

    An inequality is an implicit equality when its left side cannot drop below
    the right side anywhere on the polyhedron.  Points found along the way
    retire every inequality they leave slack, so most inequalities never need
    their own LP.
    """
    dim = _infer_dim(constraints, dim)
    constraints = list(constraints)
    if any(c.relation == LT for c in constraints):
        raise ValueError("polyhedron_dimension expects non-strict constraints")
    p = feasible_point(constraints, dim)
    if p is None:
        return None
    normals = [c.coefficients for c in constraints if c.relation == EQ]
    ineqs = [c for c in constraints if c.relation == LE]
    slack = [c.lhs(p) < c.rhs for c in ineqs]
    for k, c in enumerate(ineqs):
        if slack[k]:
            continue
        out = minimize(dim, constraints, c.coefficients)
        if out.status == UNBOUNDED or out.value < c.rhs:
            w = out.witness
            for m, other in enumerate(ineqs):
                if not slack[m] and other.lhs(w) < other.rhs:
                    slack[m] = True
            slack[k] = True
        else:
            normals.append(c.coefficients)
    if not normals:
        return dim
    return dim - rank(RatMatrix.from_rows(normals, cols=dim))
