"""Exact rational scalars and dense linear algebra over Q."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


def rational(value) -> Fraction:
    """Coerce ``value`` to a Fraction without ever going through a binary float.

    Accepts ints, Fractions, gmpy2 ``mpq``, and strings of the form ``"7"``,
    ``"-3/4"`` or ``"1.5"``.  Python floats are converted through their
    shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(q) -> str:
    q = rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(rational(v) for v in values)


@dataclass(frozen=True)
class RatMatrix:
    """Dense row-major matrix of Fractions."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"entries has length {len(self.entries)}, expected {self.rows}x{self.cols}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        rows = [vector(r) for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != cols:
                raise ValueError(f"row {i} has length {len(r)}, expected {cols}")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RatMatrix":
        return RatMatrix.from_rows([self.col(j) for j in range(self.cols)], cols=self.rows)

    def select_columns(self, columns: Sequence[int]) -> "RatMatrix":
        return RatMatrix.from_rows(
            [[self[i, j] for j in columns] for i in range(self.rows)], cols=len(columns)
        )

    def matvec(self, v: Sequence) -> tuple[Fraction, ...]:
        if len(v) != self.cols:
            raise ValueError("dimension mismatch in matrix-vector product")
        v = vector(v)
        return tuple(sum((a * b for a, b in zip(self.row(i), v)), Fraction(0))
                     for i in range(self.rows))

    def vecmat(self, v: Sequence) -> tuple[Fraction, ...]:
        """Row vector times matrix, i.e. the combination of rows weighted by ``v``."""
        if len(v) != self.rows:
            raise ValueError("dimension mismatch in vector-matrix product")
        v = vector(v)
        return tuple(sum((v[i] * self[i, j] for i in range(self.rows)), Fraction(0))
                     for j in range(self.cols))


def rref(m: RatMatrix) -> tuple[RatMatrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot columns, left to right."""
    a = m.tolist()
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == m.rows:
            break
        p = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return RatMatrix.from_rows(a, cols=m.cols) if m.rows else m, tuple(pivots)


def rank(m: RatMatrix) -> int:
    return len(rref(m)[1])


def rank_of_columns(m: RatMatrix, columns: Iterable[int]) -> int:
    """Rank of the submatrix of ``m`` restricted to ``columns``."""
    columns = sorted(set(columns))
    for j in columns:
        if not 0 <= j < m.cols:
            raise IndexError(f"column index {j} out of range for {m.cols} columns")
    if not columns or m.rows == 0:
        return 0
    return rank(m.select_columns(columns))


def kernel_basis(m: RatMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of {k : m k = 0}, one vector per free column of the RREF."""
    reduced, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        k = [Fraction(0)] * m.cols
        k[f] = Fraction(1)
        for r, p in enumerate(pivots):
            k[p] = -reduced[r, f]
        basis.append(tuple(k))
    return basis


def dot(u: Sequence, v: Sequence) -> Fraction:
    if len(u) != len(v):
        raise ValueError("dimension mismatch in dot product")
    return sum((rational(a) * rational(b) for a, b in zip(u, v)), Fraction(0))
