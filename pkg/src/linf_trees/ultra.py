"""l-infinity closest ultrametrics: distance, canonical point, topologies, districts."""

from __future__ import annotations

import itertools
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Iterable, Sequence

from networkx.utils import UnionFind

from . import lp
from .dissim import DissimilarityMap, default_labels
from .trees import (RootedTopology, enumerate_rooted, is_ultrametric, resolutions,
                    topology_of_ultrametric, ultrametric_on)

MAX_TOP_LEAVES = 6

__all__ = [
    "is_ultrametric", "subdominant", "distance_to_ultrametrics", "canonical_closest",
    "in_closest_set", "top_set", "district", "format_district", "closest_set_dimension",
    "district_census", "construct_polytomy_witness", "construct_dim_witness",
]


class GuardError(ValueError):
    """Input size beyond what an exhaustive enumeration is allowed to handle."""


def _guard(delta: DissimilarityMap, limit: int = MAX_TOP_LEAVES):
    if delta.n > limit:
        raise GuardError(f"n={delta.n} exceeds the enumeration limit n <= {limit}")


def subdominant(delta: DissimilarityMap) -> DissimilarityMap:
    """Largest ultrametric below delta: minimax path weights via Kruskal merging."""
    labels = delta.labels
    members = {l: [l] for l in labels}
    owner = {l: l for l in labels}
    out = {}
    for (a, b), v in sorted(zip(delta.pairs(), delta.values), key=lambda t: t[1]):
        ra, rb = owner[a], owner[b]
        if ra == rb:
            continue
        for x in members[ra]:
            for y in members[rb]:
                out[frozenset((x, y))] = v
        for y in members[rb]:
            owner[y] = ra
        members[ra].extend(members.pop(rb))
    return delta.with_values(out[frozenset(p)] for p in delta.pairs())


def distance_to_ultrametrics(delta: DissimilarityMap) -> Fraction:
    """d(delta, U_n), half the gap between delta and its subdominant."""
    if delta.n <= 2:
        return Fraction(0)
    return delta.linf(subdominant(delta)) / 2


def canonical_closest(delta: DissimilarityMap) -> DissimilarityMap:
    """Subdominant ultrametric raised by d(delta, U_n)."""
    return subdominant(delta).shift(distance_to_ultrametrics(delta))


def in_closest_set(delta: DissimilarityMap, u: DissimilarityMap) -> bool:
    return is_ultrametric(u) and delta.linf(u) == distance_to_ultrametrics(delta)


# -- per-topology systems ----------------------------------------------------

def height_constraints(delta: DissimilarityMap, topology: RootedTopology, radius,
                       strict: bool) -> list[lp.LinearConstraint]:
    """Heights of the internal vertices of ``topology`` within ``radius`` of delta.

    Variables follow ``topology.internal_nodes``.  With ``strict`` every
    non-root vertex sits strictly below its parent (exact topology);
    otherwise the closed cone is described.
    """
    nodes = topology.internal_nodes
    index = {c: k for k, c in enumerate(nodes)}
    k = len(nodes)
    cons = []
    for (a, b), v in zip(delta.pairs(), delta.values):
        e = [0] * k
        e[index[topology.lca_table[frozenset((a, b))]]] = 1
        cons.append(lp.le(e, v + radius))
        cons.append(lp.ge(e, v - radius))
    for c in nodes:
        p = topology.parent(c)
        if p is None:
            continue
        e = [0] * k
        e[index[c]], e[index[p]] = 1, -1
        cons.append(lp.lt(e, 0) if strict else lp.le(e, 0))
    return cons


def realizable(delta: DissimilarityMap, topology: RootedTopology, radius, strict: bool = True) -> bool:
    """Interval propagation: is some (exact, if strict) ultrametric on topology within radius?

    Each vertex's height is boxed by the pairs it is the lca of; heights must
    increase strictly towards the root, so feasibility is a bottom-up sweep.
    """
    radius = Fraction(radius)
    lo: dict = {}
    hi: dict = {}
    for (a, b), v in zip(delta.pairs(), delta.values):
        c = topology.lca_table[frozenset((a, b))]
        lo[c] = max(lo.get(c, v), v)
        hi[c] = min(hi.get(c, v), v)
    floor: dict = {}
    for c in topology.internal_nodes:
        bound, open_ = lo[c] - radius, False
        for child in topology.children(c):
            if child in floor:
                if floor[child] > bound or (floor[child] == bound and strict):
                    bound, open_ = floor[child], strict
        top = hi[c] + radius
        if bound > top or (bound == top and open_):
            return False
        floor[c] = bound
    return True


def exact_topology_feasible(delta, topology, radius) -> bool:
    return lp.strictly_feasible(height_constraints(delta, topology, radius, strict=True),
                                len(topology.internal_nodes))[0]


def top_set(delta: DissimilarityMap, method: str = "lp") -> frozenset[RootedTopology]:
    """Top(delta): exact topologies of the l-infinity closest ultrametrics.

    ``method="lp"`` decides each topology by strict LP feasibility;
    ``method="interval"`` uses :func:`realizable`.
    """
    _guard(delta)
    if delta.n < 2:
        raise ValueError("need at least two leaves")
    r = distance_to_ultrametrics(delta)
    if method == "lp":
        test = exact_topology_feasible
    elif method == "interval":
        test = realizable
    else:
        raise ValueError(f"unknown method {method!r}")
    return frozenset(t for t in enumerate_rooted(delta.n, labels=delta.labels)
                     if test(delta, t, r))


def format_district(tops: Iterable[RootedTopology]) -> str:
    return "{" + ",".join(sorted(t.format() for t in tops)) + "}"


def district(delta: DissimilarityMap, method: str = "lp") -> str:
    return format_district(top_set(delta, method))


def three_leaf_district(delta: DissimilarityMap) -> str:
    """Closed form for n = 3: the pairs attaining the minimum decide the district.

    A unique minimal pair ij gives {(k(ij))}; two tied minimal pairs add the
    claw and both cherries; all three tied is the claw alone.
    """
    if delta.n != 3:
        raise ValueError("three_leaf_district needs exactly three leaves")
    low = min(delta.values)
    tied = [p for p, v in zip(delta.pairs(), delta.values) if v == low]
    labels = delta.labels
    star = RootedTopology.star(labels)
    if len(tied) == 3:
        return format_district([star])
    cherries = [RootedTopology(labels, frozenset({frozenset(p)})) for p in tied]
    return format_district(cherries + ([star] if len(tied) == 2 else []))


def binary_fit(delta: DissimilarityMap, topology: RootedTopology) -> Fraction:
    """min eps such that an ultrametric in the closed cone of topology is eps-close."""
    nodes = topology.internal_nodes
    k = len(nodes)
    index = {c: i for i, c in enumerate(nodes)}
    cons = []
    for (a, b), v in zip(delta.pairs(), delta.values):
        e = [0] * (k + 1)
        e[index[topology.lca_table[frozenset((a, b))]]] = 1
        e[k] = -1
        cons.append(lp.le(e, v))
        e = list(e)
        e[k] = 1
        cons.append(lp.ge(e, v))
    for c in nodes:
        p = topology.parent(c)
        if p is not None:
            e = [0] * (k + 1)
            e[index[c]], e[index[p]] = 1, -1
            cons.append(lp.le(e, 0))
    return lp.minimize(k + 1, cons, [0] * k + [1]).value


def closest_set_dimension(delta: DissimilarityMap) -> int:
    """dim C(delta, U_n): max over binary topologies of the closed cone-ball polyhedron."""
    _guard(delta)
    r = distance_to_ultrametrics(delta)
    best = -1
    for t in enumerate_rooted(delta.n, binary_only=True, labels=delta.labels):
        if not realizable(delta, t, r, strict=False):
            continue
        d = lp.polyhedron_dimension(height_constraints(delta, t, r, strict=False),
                                    len(t.internal_nodes))
        if d is not None:
            best = max(best, d)
    return best


def closest_pieces(delta: DissimilarityMap) -> list[tuple[RootedTopology, list[lp.LinearConstraint]]]:
    """Binary topologies whose closed cone meets the closest ball, with the cut-out polyhedra."""
    _guard(delta)
    r = distance_to_ultrametrics(delta)
    return [(t, height_constraints(delta, t, r, strict=False))
            for t in enumerate_rooted(delta.n, binary_only=True, labels=delta.labels)
            if realizable(delta, t, r, strict=False)]


def _pair_values(topology: RootedTopology, pairs, offset: int, width: int):
    """Linear forms giving each pair value from the heights block at ``offset``."""
    index = {c: k for k, c in enumerate(topology.internal_nodes)}
    rows = []
    for a, b in pairs:
        e = [0] * width
        e[offset + index[topology.lca_table[frozenset((a, b))]]] = 1
        rows.append(e)
    return rows


def _lift(constraints, offset: int, width: int):
    out = []
    for c in constraints:
        coeffs = [0] * width
        coeffs[offset:offset + len(c.coefficients)] = c.coefficients
        out.append(lp.LinearConstraint(tuple(Fraction(x) for x in coeffs), c.relation, c.rhs))
    return out


def closest_set_components(delta: DissimilarityMap) -> list[list[RootedTopology]]:
    """Connected components of C(delta, U_n) as groups of binary pieces.

    Two pieces are adjacent when their polyhedra share an ultrametric.
    """
    pieces = closest_pieces(delta)
    pairs = delta.pairs()
    groups = UnionFind(range(len(pieces)))
    for i, j in itertools.combinations(range(len(pieces)), 2):
        if groups[i] == groups[j]:
            continue
        (ti, ci), (tj, cj) = pieces[i], pieces[j]
        ki, kj = len(ti.internal_nodes), len(tj.internal_nodes)
        width = ki + kj
        cons = _lift(ci, 0, width) + _lift(cj, ki, width)
        for ri, rj in zip(_pair_values(ti, pairs, 0, width), _pair_values(tj, pairs, ki, width)):
            cons.append(lp.eq([x - y for x, y in zip(ri, rj)], 0))
        if lp.feasible_point(cons, width) is not None:
            groups.union(i, j)
    return sorted((sorted(pieces[k][0] for k in g) for g in groups.to_sets()),
                  key=lambda g: g[0].format())


def sample_closest_ultrametrics(delta: DissimilarityMap, rng: random.Random,
                                count: int = 10) -> list[DissimilarityMap]:
    """Vertices of the closest set found by random linear objectives over random pieces."""
    pieces = closest_pieces(delta)
    out = []
    for _ in range(count):
        t, cons = rng.choice(pieces)
        k = len(t.internal_nodes)
        obj = [rng.randint(-3, 3) for _ in range(k)]
        res = lp.minimize(k, cons, obj)
        heights = dict(zip(t.internal_nodes, res.witness))
        out.append(DissimilarityMap.from_function(
            delta.labels, lambda a, b: heights[t.lca_table[frozenset((a, b))]]))
    return out


# -- census ------------------------------------------------------------------

CENSUS_DENOMINATOR = 1_000_001


def census_points(sample_count: int, seed: int, box: tuple = (0, 100), n: int = 4):
    """Deterministic sample: integers in [lo, hi) plus an odd-denominator jitter."""
    lo, hi = int(box[0]), int(box[1])
    if hi < lo:
        raise ValueError(f"empty box [{lo}, {hi}]")
    rng = random.Random(seed)
    m = n * (n - 1) // 2
    pts = []
    for _ in range(sample_count):
        if hi == lo:
            pts.append((Fraction(lo),) * m)
        else:
            pts.append(tuple(rng.randrange(lo, hi) + Fraction(rng.randrange(1, CENSUS_DENOMINATOR),
                                                              CENSUS_DENOMINATOR)
                             for _ in range(m)))
    return pts


def _classify_chunk(args):
    labels, chunk = args
    topologies = enumerate_rooted(len(labels), labels=labels)
    out = []
    for values in chunk:
        delta = DissimilarityMap(labels, values)
        r = distance_to_ultrametrics(delta)
        out.append(format_district(t for t in topologies if realizable(delta, t, r)))
    return out


def district_census(n: int = 4, sample_count: int = 50_000, seed: int = 0,
                    box: tuple = (0, 100), workers: int = 1) -> dict[str, int]:
    """District labels of seeded random points with their counts.

    Classification uses interval propagation; the result depends only on the
    seed, never on ``workers``.
    """
    if n != 4:
        raise ValueError("the census is only supported for n = 4")
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    labels = default_labels(n)
    pts = census_points(sample_count, seed, box, n)
    size = max(1, -(-len(pts) // (workers * 8)))
    chunks = [(labels, pts[i:i + size]) for i in range(0, len(pts), size)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_classify_chunk, chunks))
    else:
        results = [_classify_chunk(c) for c in chunks]
    counts = Counter(label for part in results for label in part)
    return dict(sorted(counts.items()))


# -- constructions -----------------------------------------------------------

def _perturb(u: DissimilarityMap, i: str, j: str, k: str, eps) -> DissimilarityMap:
    """u + eps (e_ik - e_jk)."""
    return u + (u.basis_vector(i, k) - u.basis_vector(j, k)).scale(eps)


def _check_triple(u: DissimilarityMap, triple):
    i, j, k = triple
    if len({i, j, k}) != 3 or not {i, j, k} <= set(u.labels):
        raise ValueError(f"triple {triple} must name three distinct leaves")
    if not (u[i, j] < u[i, k] == u[j, k]):
        raise ValueError(f"triple {triple} is not resolved as ({k}({i}{j})) by u")
    return i, j, k


def construct_polytomy_witness(topology: RootedTopology, eps, u: DissimilarityMap | None = None,
                               triple: tuple[str, str, str] | None = None) -> DissimilarityMap:
    """delta = u + eps (e_ik - e_jk) whose Top contains topology and its resolutions.

    ``u`` defaults to the cluster-size ultrametric on ``topology``; ``triple``
    defaults to the first (i, j, k) with u_ij < u_ik = u_jk.  Requires
    0 < eps < u_ik - u_ij.
    """
    if topology.is_star:
        raise ValueError("the star tree admits no witness")
    if topology.is_binary:
        raise ValueError(f"{topology} has no polytomy")
    if u is None:
        u = ultrametric_on(topology)
    elif topology_of_ultrametric(u).topology != topology:
        raise ValueError(f"u does not have topology {topology}")
    if triple is None:
        triple = next((i, j, k) for i, j in itertools.combinations(u.labels, 2)
                      for k in u.labels if k not in (i, j) and u[i, j] < u[i, k] == u[j, k])
    i, j, k = _check_triple(u, triple)
    eps = Fraction(eps)
    if not 0 < eps < u[i, k] - u[i, j]:
        raise ValueError(f"eps must lie in (0, {u[i, k] - u[i, j]}), got {eps}")
    return _perturb(u, i, j, k, eps)


def construct_dim_witness(topology: RootedTopology, u: DissimilarityMap,
                          triple: tuple[str, str, str], eps) -> DissimilarityMap:
    """delta = u + eps (e_ik - e_jk) with an (n-2)-dimensional closest set, all of topology.

    The caller picks eps; the construction is verified and a ValueError
    raised when eps was too large for it to hold.
    """
    if not topology.is_binary:
        raise ValueError(f"{topology} is not binary")
    if topology_of_ultrametric(u).topology != topology:
        raise ValueError(f"u does not have topology {topology}")
    i, j, k = _check_triple(u, triple)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    delta = _perturb(u, i, j, k, eps)
    dim = closest_set_dimension(delta)
    tops = top_set(delta)
    if dim != delta.n - 2 or tops != {topology}:
        raise ValueError(
            f"eps={eps} too large: closest set has dimension {dim} and topologies "
            f"{format_district(tops)}")
    return delta
