"""l-infinity projection onto linear subspaces, read through the oriented matroid.

A point ``x`` gets a *type* with respect to a subspace ``L``: the sign vector
of the smallest face of the l-infinity ball of radius ``d(x, L)`` around ``x``
that contains every closest point of ``L``.  Types are exactly the covectors
of ``L`` and the closest set has dimension ``dim L - rank(type)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import lp
from .ratlin import RatMatrix, kernel_basis, rank, rank_of_columns, rref, vector

SIGNS = "+-0"
MAX_COVECTOR_DIM = 12


class NotACovector(ValueError):
    pass


@dataclass(frozen=True, order=True)
class SignVector:
    """Element of {+,-,0}^m, written as a string such as ``"+-0"``."""

    entries: str

    def __post_init__(self):
        bad = set(self.entries) - set(SIGNS)
        if bad:
            raise ValueError(f"invalid sign characters {sorted(bad)} in {self.entries!r}")

    @classmethod
    def of(cls, values: Iterable) -> "SignVector":
        return cls("".join("+" if v > 0 else "-" if v < 0 else "0" for v in values))

    @classmethod
    def zero(cls, m: int) -> "SignVector":
        return cls("0" * m)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self):
        return self.entries

    def __neg__(self) -> "SignVector":
        return SignVector(self.entries.translate(str.maketrans("+-", "-+")))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, s in enumerate(self.entries) if s != "0")

    def __abs__(self) -> int:
        return len(self.support)

    def conforms_to(self, other: "SignVector") -> bool:
        """``self`` is below ``other`` in the componentwise order with 0 under + and -."""
        return len(self) == len(other) and all(
            a == "0" or a == b for a, b in zip(self.entries, other.entries))


def u_vector(sigma: SignVector) -> tuple[Fraction, ...]:
    return tuple(Fraction({"+": 1, "-": -1, "0": 0}[s]) for s in sigma)


@dataclass(frozen=True)
class LinearSubspace:
    """Subspace of Q^m spanned by the rows of ``basis``."""

    basis: RatMatrix
    dual_basis: RatMatrix = field(init=False, compare=False)

    def __post_init__(self):
        if self.basis.rows and rank(self.basis) != self.basis.rows:
            raise ValueError("basis rows are linearly dependent")
        m = self.basis.cols
        if self.basis.rows:
            dual = kernel_basis(self.basis)
        else:
            dual = [tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m)]
        object.__setattr__(self, "dual_basis",
                           RatMatrix.from_rows(dual, cols=m) if dual else RatMatrix.zeros(0, m))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ambient_dim: int | None = None) -> "LinearSubspace":
        rows = list(rows)
        if not rows:
            if ambient_dim is None:
                raise ValueError("ambient dimension needed for the zero subspace")
            return cls(RatMatrix.zeros(0, ambient_dim))
        return cls(RatMatrix.from_rows(rows))

    @classmethod
    def spanned_by(cls, rows: Sequence[Sequence]) -> "LinearSubspace":
        """Subspace spanned by possibly dependent rows."""
        m = RatMatrix.from_rows(rows)
        reduced, pivots = rref(m)
        return cls.from_rows([reduced.row(i) for i in range(len(pivots))], ambient_dim=m.cols)

    @property
    def ambient_dim(self) -> int:
        return self.basis.cols

    @property
    def dim(self) -> int:
        return self.basis.rows

    def point(self, coefficients: Sequence) -> tuple[Fraction, ...]:
        return self.basis.vecmat(coefficients)

    def contains(self, x: Sequence) -> bool:
        x = vector(x)
        return all(sum((a * b for a, b in zip(row, x)), Fraction(0)) == 0
                   for row in (self.dual_basis.row(i) for i in range(self.dual_basis.rows)))


def _check_point(x, L: LinearSubspace):
    x = vector(x)
    if len(x) != L.ambient_dim:
        raise ValueError(f"point has length {len(x)}, subspace lives in dimension {L.ambient_dim}")
    return x


def _ball_constraints(x, L: LinearSubspace, radius) -> list[lp.LinearConstraint]:
    """Constraints on coefficients c with |(cB)_i - x_i| <= radius."""
    cons = []
    for i in range(L.ambient_dim):
        col = L.basis.col(i)
        cons.append(lp.le(col, x[i] + radius))
        cons.append(lp.ge(col, x[i] - radius))
    return cons


def linf_distance(x: Sequence, L: LinearSubspace) -> Fraction:
    """min over y in L of max_i |x_i - y_i|."""
    return _distance_and_witness(_check_point(x, L), L)[0]


def _distance_and_witness(x, L: LinearSubspace):
    d = L.dim
    if d == 0:
        return max((abs(v) for v in x), default=Fraction(0)), ()
    cons = []
    for i in range(L.ambient_dim):
        col = L.basis.col(i)
        cons.append(lp.le(col + (Fraction(-1),), x[i]))
        cons.append(lp.ge(col + (Fraction(1),), x[i]))
    out = lp.minimize(d + 1, cons, (Fraction(0),) * d + (Fraction(1),))
    return out.value, out.witness[:d]


def closest_set_constraints(x: Sequence, L: LinearSubspace) -> list[lp.LinearConstraint]:
    """C(x, L) as a polyhedron in R^m: y in L and |y - x|_inf <= d(x, L)."""
    x = _check_point(x, L)
    r = linf_distance(x, L)
    m = L.ambient_dim
    cons = [lp.eq(L.dual_basis.row(k), 0) for k in range(L.dual_basis.rows)]
    for i in range(m):
        e = [0] * m
        e[i] = 1
        cons.append(lp.le(e, x[i] + r))
        cons.append(lp.ge(e, x[i] - r))
    return cons


def type_of(x: Sequence, L: LinearSubspace) -> SignVector:
    """Sign vector of the minimal cube face containing all closest points.

    Coordinate i is ``+`` when every closest y has ``y_i = x_i + r`` and ``-``
    when every closest y has ``y_i = x_i - r``.  Witnesses from earlier LPs
    settle most coordinates without their own LP.
    """
    x = _check_point(x, L)
    m, d = L.ambient_dim, L.dim
    r, c0 = _distance_and_witness(x, L)
    if r == 0:
        return SignVector.zero(m)
    cons = _ball_constraints(x, L, r)
    witnesses = [L.point(c0) if d else (Fraction(0),) * m]
    signs = []
    for i in range(m):
        hi, lo = x[i] + r, x[i] - r
        candidate = None
        if all(w[i] == hi for w in witnesses):
            candidate = "+"
        elif all(w[i] == lo for w in witnesses):
            candidate = "-"
        if candidate is None:
            signs.append("0")
            continue
        if d == 0:
            signs.append(candidate)
            continue
        col = L.basis.col(i)
        if candidate == "+":
            out = lp.minimize(d, cons, col)
            pinned = out.value == hi
        else:
            out = lp.maximize(d, cons, col)
            pinned = out.value == lo
        witnesses.append(L.point(out.witness))
        signs.append(candidate if pinned else "0")
    return SignVector("".join(signs))


def sign_rank(sigma: SignVector, L: LinearSubspace) -> int:
    """Rank of supp(sigma) in the column matroid of the basis of L."""
    if len(sigma) != L.ambient_dim:
        raise ValueError("sign vector length does not match the ambient dimension")
    return rank_of_columns(L.basis, sigma.support)


def closest_set_dim(x: Sequence, L: LinearSubspace) -> int:
    """Dimension of C(x, L), from the type alone.

    When x already lies in L the closest set is {x} and 0 is reported directly.
    """
    x = _check_point(x, L)
    if linf_distance(x, L) == 0:
        return 0
    return L.dim - sign_rank(type_of(x, L), L)


def is_covector(sigma: SignVector, L: LinearSubspace) -> bool:
    """Is sigma the sign of some functional vanishing on L?

    Functionals vanishing on L are b @ dual_basis.  Sign patterns are scale
    invariant, so nonzero entries may be pinned to |c_i| >= 1.
    """
    if len(sigma) != L.ambient_dim:
        raise ValueError("sign vector length does not match the ambient dimension")
    V = L.dual_basis
    k = V.rows
    if k == 0:
        return not sigma.support
    cons = []
    for i, s in enumerate(sigma):
        col = V.col(i)
        if s == "+":
            cons.append(lp.ge(col, 1))
        elif s == "-":
            cons.append(lp.le(col, -1))
        else:
            cons.append(lp.eq(col, 0))
    return lp.feasible_point(cons, k) is not None


def enumerate_covectors(L: LinearSubspace) -> frozenset[SignVector]:
    """All covectors of L by brute force over the 3^m sign patterns."""
    m = L.ambient_dim
    if m > MAX_COVECTOR_DIM:
        raise ValueError(f"covector enumeration is limited to m <= {MAX_COVECTOR_DIM}, got {m}")
    found = set()
    seen = set()
    for pattern in itertools.product(SIGNS, repeat=m):
        sigma = SignVector("".join(pattern))
        if sigma in seen:
            continue
        seen.add(sigma)
        seen.add(-sigma)
        if is_covector(sigma, L):
            found.add(sigma)
            found.add(-sigma)
    return frozenset(found)


def circuits(covectors: Iterable[SignVector]) -> frozenset[frozenset[int]]:
    """Inclusion-minimal nonempty supports among ``covectors``."""
    supports = {s.support for s in covectors if s.support}
    return frozenset(s for s in supports if not any(t < s for t in supports))


def is_uniform(L: LinearSubspace) -> bool:
    """Every d-subset of the basis columns is independent."""
    d, m = L.dim, L.ambient_dim
    if d in (0, m):
        return True
    return all(rank_of_columns(L.basis, cols) == d
               for cols in itertools.combinations(range(m), d))


def non_uniform_witness(L: LinearSubspace, covectors: Iterable[SignVector] | None = None):
    """A point with a positive-dimensional closest set, or None if L is uniform.

    Uses a covector of rank below dim L; its negated u-vector has that covector
    as its type.
    """
    if covectors is None:
        covectors = enumerate_covectors(L)
    for sigma in sorted(covectors):
        if sigma.support and sign_rank(sigma, L) < L.dim:
            return tuple(-v for v in u_vector(sigma))
    return None


def type_cone_generators(sigma: SignVector, covectors: Iterable[SignVector]) -> list[SignVector]:
    return sorted(t for t in covectors if sigma.conforms_to(t))


def type_cone_sample(sigma: SignVector, L: LinearSubspace, weights: Sequence | None = None,
                     rng: random.Random | None = None) -> tuple[Fraction, ...]:
    """A point of type sigma: l + sum of weight * (-u(tau)) over covectors tau above sigma.

    ``weights`` pairs with the covectors above sigma in sorted order (default
    all ones).  With ``rng`` the offset l is a random integer point of L,
    otherwise l = 0.  The zero sign vector yields l itself.
    """
    if not is_covector(sigma, L):
        raise NotACovector(f"{sigma} is not a covector of the subspace")
    m = L.ambient_dim
    offset = [Fraction(0)] * m
    if rng is not None and L.dim:
        offset = list(L.point([rng.randint(-5, 5) for _ in range(L.dim)]))
    if not sigma.support:
        return tuple(offset)
    taus = type_cone_generators(sigma, enumerate_covectors(L))
    if weights is None:
        weights = [1] * len(taus)
    weights = vector(weights)
    if len(weights) != len(taus):
        raise ValueError(f"expected {len(taus)} weights, got {len(weights)}")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    for w, tau in zip(weights, taus):
        for i, u in enumerate(u_vector(tau)):
            offset[i] -= w * u
    return tuple(offset)


def in_type_cone_closure(x: Sequence, sigma: SignVector, L: LinearSubspace,
                         covectors: Iterable[SignVector] | None = None) -> bool:
    """Is x in L + cone{-u(tau) : sigma <= tau}?  (closed cone, LP feasibility)"""
    x = _check_point(x, L)
    if covectors is None:
        covectors = enumerate_covectors(L)
    gens = [u_vector(t) for t in type_cone_generators(sigma, covectors)]
    d, g = L.dim, len(gens)
    cons = []
    for i in range(L.ambient_dim):
        coeffs = list(L.basis.col(i)) + [-u[i] for u in gens]
        cons.append(lp.eq(coeffs, x[i]))
    for k in range(g):
        e = [0] * (d + g)
        e[d + k] = 1
        cons.append(lp.ge(e, 0))
    return lp.feasible_point(cons, d + g) is not None


def type_cone_dimension(sigma: SignVector, L: LinearSubspace,
                        covectors: Iterable[SignVector] | None = None) -> int:
    """Dimension of L + cone{-u(tau) : sigma <= tau}."""
    if covectors is None:
        covectors = enumerate_covectors(L)
    rows = [L.basis.row(i) for i in range(L.dim)]
    rows += [u_vector(t) for t in type_cone_generators(sigma, covectors)]
    if not rows:
        return 0
    return rank(RatMatrix.from_rows(rows, cols=L.ambient_dim))
