"""Reading dissimilarity maps and subspace problems from files; canonical JSON output."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from .dissim import DissimilarityMap, leaf_count
from .ratlin import format_rational, rational


class ParseError(ValueError):
    pass


def _number(token: Any, where: str) -> Fraction:
    if isinstance(token, bool):
        raise ParseError(f"bad number {token!r} at {where}")
    try:
        return rational(token)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"bad number {token!r} at {where}") from None


def _numbers(tokens, where: str) -> list[Fraction]:
    if not isinstance(tokens, list):
        raise ParseError(f"expected a list at {where}, got {type(tokens).__name__}")
    return [_number(t, f"{where}[{k}]") for k, t in enumerate(tokens)]


def _labels(raw, n: int | None) -> tuple[str, ...] | None:
    if raw is None:
        return None
    if not isinstance(raw, list) or not all(isinstance(l, (str, int)) for l in raw):
        raise ParseError("labels must be a list of strings")
    labels = tuple(str(l) for l in raw)
    if n is not None and len(labels) != n:
        raise ParseError(f"{len(labels)} labels given for {n} leaves")
    if len(set(labels)) != len(labels):
        raise ParseError(f"duplicate labels {list(labels)}")
    return labels


def _from_flat(values: list[Fraction], labels) -> DissimilarityMap:
    try:
        n = leaf_count(len(values))
    except ValueError as e:
        raise ParseError(str(e)) from None
    return DissimilarityMap.of(values, _labels(labels, n))


def _from_rows(rows: list[list[Fraction]], labels) -> DissimilarityMap:
    """Square matrix or lower triangle.

    Triangle rows of lengths 1..k are read as including the diagonal when
    every row ends in 0, and otherwise as the strict triangle of k+1 leaves.
    """
    n = len(rows)
    lengths = [len(r) for r in rows]
    if all(l == n for l in lengths):
        try:
            return DissimilarityMap.from_matrix(rows, _labels(labels, n))
        except ValueError as e:
            raise ParseError(str(e)) from None
    if lengths == list(range(1, n + 1)):
        if all(r[-1] == 0 for r in rows):
            rows = [r[:-1] for r in rows]
        else:
            rows = [[]] + rows
    lengths = [len(r) for r in rows]
    n = len(rows)
    if lengths == list(range(n)):
        values = [rows[j][i] for i in range(n) for j in range(i + 1, n)]
        return DissimilarityMap.of(values, _labels(labels, n))
    raise ParseError(f"row lengths {lengths} form neither a square nor a lower-triangular matrix")


def parse_dissimilarity(text: str) -> DissimilarityMap:
    """Accepts JSON ({"labels", "values"}, {"labels", "matrix"}, a flat list or
    a list of rows) or a whitespace/comma separated text matrix whose optional
    first line holds labels."""
    stripped = text.strip()
    if not stripped:
        raise ParseError("empty input")
    if stripped[0] in "[{":
        try:
            data = json.loads(stripped, parse_float=Fraction)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}") from None
        return _from_json(data)
    return _from_text(stripped)


def _from_json(data) -> DissimilarityMap:
    if isinstance(data, dict):
        unknown = set(data) - {"labels", "values", "matrix"}
        if unknown:
            raise ParseError(f"unknown keys {sorted(unknown)}")
        if ("values" in data) == ("matrix" in data):
            raise ParseError('give exactly one of "values" or "matrix"')
        if "values" in data:
            return _from_flat(_numbers(data["values"], "values"), data.get("labels"))
        return _from_json_rows(data["matrix"], data.get("labels"))
    if isinstance(data, list) and data and all(isinstance(r, list) for r in data):
        return _from_json_rows(data, None)
    return _from_flat(_numbers(data, "values"), None)


def _from_json_rows(raw, labels) -> DissimilarityMap:
    if not isinstance(raw, list):
        raise ParseError("matrix must be a list of rows")
    rows = [_numbers(r, f"matrix[{i}]") for i, r in enumerate(raw)]
    return _from_rows(rows, labels)


_SPLIT = re.compile(r"[\s,;]+")


def _from_text(text: str) -> DissimilarityMap:
    lines = [l for l in (l.split("#")[0].strip() for l in text.splitlines()) if l]
    tokens = [[t for t in _SPLIT.split(l) if t] for l in lines]
    labels = None
    if len(tokens) > 1 and any(not _looks_numeric(t) for t in tokens[0]):
        labels = tokens.pop(0)
    rows = [[_number(t, f"line {i + 1 + (labels is not None)}, column {k + 1}")
             for k, t in enumerate(r)] for i, r in enumerate(tokens)]
    if len(rows) == 1:
        return _from_flat(rows[0], labels)
    return _from_rows(rows, labels)


def _looks_numeric(token: str) -> bool:
    try:
        rational(token)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def parse_subspace_problem(text: str):
    """JSON {"basis": [[...], ...], "point": [...]} -> (rows, point)."""
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    if not isinstance(data, dict) or "basis" not in data or "point" not in data:
        raise ParseError('expected an object with "basis" and "point"')
    basis = data["basis"]
    if not isinstance(basis, list):
        raise ParseError("basis must be a list of rows")
    rows = [_numbers(r, f"basis[{i}]") for i, r in enumerate(basis)]
    point = _numbers(data["point"], "point")
    for i, r in enumerate(rows):
        if len(r) != len(point):
            raise ParseError(f"basis[{i}] has length {len(r)}, point has length {len(point)}")
    return rows, point


def jsonable(obj):
    """Fractions become "p/q" strings; containers are converted recursively."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, DissimilarityMap):
        return obj.to_strings()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
