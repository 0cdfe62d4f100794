"""Dissimilarity maps: points of Q^(n choose 2) with leaf labels."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .ratlin import format_rational, rational, vector


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(1, n + 1))


def leaf_count(num_values: int) -> int:
    """n with n(n-1)/2 == num_values, or ValueError."""
    n = (1 + math.isqrt(1 + 8 * num_values)) // 2
    if n * (n - 1) // 2 != num_values:
        raise ValueError(f"{num_values} values do not form a dissimilarity map (need n choose 2)")
    return n


@dataclass(frozen=True)
class DissimilarityMap:
    """Values listed in lexicographic pair order 12, 13, ..., 1n, 23, ...

    Entries are arbitrary rationals; negative values are allowed.
    """

    labels: tuple[str, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise ValueError(f"duplicate leaf labels in {self.labels}")
        if len(self.values) != n * (n - 1) // 2:
            raise ValueError(
                f"{len(self.values)} values given for {n} leaves, expected {n * (n - 1) // 2}")
        object.__setattr__(self, "_index", {
            frozenset(p): k for k, p in enumerate(itertools.combinations(self.labels, 2))})

    @classmethod
    def of(cls, values: Iterable, labels: Sequence[str] | None = None) -> "DissimilarityMap":
        values = vector(values)
        n = leaf_count(len(values))
        labels = tuple(str(l) for l in labels) if labels is not None else default_labels(n)
        return cls(labels, values)

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence], labels: Sequence[str] | None = None) -> "DissimilarityMap":
        """From a full square matrix; rejects asymmetry and nonzero diagonals."""
        n = len(rows)
        rows = [vector(r) for r in rows]
        values = []
        k = 0
        for i in range(n):
            if len(rows[i]) != n:
                raise ValueError(f"matrix row {i} has {len(rows[i])} entries, expected {n}")
            if rows[i][i] != 0:
                raise ValueError(f"nonzero diagonal entry at ({i},{i})")
        for i, j in itertools.combinations(range(n), 2):
            if rows[i][j] != rows[j][i]:
                raise ValueError(
                    f"asymmetric entries at pair index {k} ({i},{j}): "
                    f"{format_rational(rows[i][j])} != {format_rational(rows[j][i])}")
            values.append(rows[i][j])
            k += 1
        return cls.of(values, labels if labels is not None else default_labels(n))

    @classmethod
    def from_function(cls, labels: Sequence[str], f) -> "DissimilarityMap":
        labels = tuple(labels)
        return cls(labels, vector(f(a, b) for a, b in itertools.combinations(labels, 2)))

    @property
    def n(self) -> int:
        return len(self.labels)

    def pairs(self) -> list[tuple[str, str]]:
        return list(itertools.combinations(self.labels, 2))

    def index(self, a: str, b: str) -> int:
        try:
            return self._index[frozenset((a, b))]
        except KeyError:
            raise KeyError(f"no pair ({a}, {b})") from None

    def __getitem__(self, key) -> Fraction:
        if isinstance(key, int):
            return self.values[key]
        a, b = key
        if a == b:
            return Fraction(0)
        return self.values[self.index(a, b)]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def with_values(self, values: Iterable) -> "DissimilarityMap":
        return DissimilarityMap(self.labels, vector(values))

    def __add__(self, other: "DissimilarityMap") -> "DissimilarityMap":
        self._check_compatible(other)
        return self.with_values(a + b for a, b in zip(self.values, other.values))

    def __sub__(self, other: "DissimilarityMap") -> "DissimilarityMap":
        self._check_compatible(other)
        return self.with_values(a - b for a, b in zip(self.values, other.values))

    def shift(self, c) -> "DissimilarityMap":
        c = rational(c)
        return self.with_values(v + c for v in self.values)

    def scale(self, c) -> "DissimilarityMap":
        c = rational(c)
        return self.with_values(v * c for v in self.values)

    def linf(self, other: "DissimilarityMap") -> Fraction:
        self._check_compatible(other)
        return max((abs(a - b) for a, b in zip(self.values, other.values)), default=Fraction(0))

    def dominated_by(self, other: "DissimilarityMap") -> bool:
        self._check_compatible(other)
        return all(a <= b for a, b in zip(self.values, other.values))

    def relabel(self, mapping: dict[str, str]) -> "DissimilarityMap":
        """Same metric on renamed leaves, re-sorted into the new label order."""
        new_labels = tuple(mapping[l] for l in self.labels)
        order = sorted(new_labels, key=label_key)
        inverse = {mapping[l]: l for l in self.labels}
        return DissimilarityMap.from_function(order, lambda a, b: self[inverse[a], inverse[b]])

    def basis_vector(self, a: str, b: str) -> "DissimilarityMap":
        """e_ab on the same labels."""
        k = self.index(a, b)
        return self.with_values(int(i == k) for i in range(len(self.values)))

    def _check_compatible(self, other: "DissimilarityMap"):
        if self.labels != other.labels:
            raise ValueError(f"label mismatch: {self.labels} vs {other.labels}")

    def to_strings(self) -> list[str]:
        return [format_rational(v) for v in self.values]

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "values": self.to_strings()}

    def __str__(self):
        return "(" + ",".join(self.to_strings()) + ")"


def label_key(label: str):
    """Natural ordering: numeric labels by value, before alphabetic ones."""
    return (0, int(label), "") if label.isdigit() else (1, 0, label)
