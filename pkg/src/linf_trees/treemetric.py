"""l-infinity fitting of tree metrics and of points of the space G_{2,n}.

A metric on an unrooted topology T is parametrised by its edge weights ``w``
(in ``T.edges`` order); the pair value ``x_ij`` sums the weights of the edges
separating i and j.  Tree metrics require every weight to be nonnegative.  The
``grassmannian`` mode keeps internal weights nonnegative and frees the leaf
weights, which yields exactly the maps satisfying the four-point condition on
distinct quadruples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import networkx as nx

from . import lp
from .dissim import DissimilarityMap
from .omatroid import LinearSubspace, SignVector, sign_rank, type_of
from .ratlin import RatMatrix, format_rational, kernel_basis, rational
from .trees import (Split, TopologyError, UnrootedTopology, enumerate_unrooted_binary, quartets,
                    tree_metric_on)
from .ultra import GuardError

MAX_TREE_LEAVES = 6
TREE, GRASSMANNIAN = "tree", "grassmannian"
MODES = (TREE, GRASSMANNIAN)


def _pairings(delta: DissimilarityMap, quad) -> list[Fraction]:
    a, b, c, d = quad
    return sorted((delta[a, b] + delta[c, d], delta[a, c] + delta[b, d], delta[a, d] + delta[b, c]))


def four_point_check(delta: DissimilarityMap) -> bool:
    """Four-point condition over all quadruples, repeated leaves included.

    Repeats are what make this imply nonnegativity and the triangle
    inequality: the multiset {i,i,j,k} gives ``d_jk <= d_ij + d_ik``.
    """
    for quad in itertools.combinations_with_replacement(delta.labels, 4):
        s = _pairings(delta, quad)
        if s[1] != s[2]:
            return False
    return True


def distinct_four_point_check(delta: DissimilarityMap) -> bool:
    for quad in itertools.combinations(delta.labels, 4):
        s = _pairings(delta, quad)
        if s[1] != s[2]:
            return False
    return True


def star_topology(labels: Sequence[str]) -> UnrootedTopology:
    return UnrootedTopology(tuple(labels), frozenset())


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _sign_constraints(topology: UnrootedTopology, mode: str, width: int, offset: int = 0):
    cons = []
    for k in range(len(topology.edges)):
        if mode == GRASSMANNIAN and topology.edge_is_leaf(k):
            continue
        e = [0] * width
        e[offset + k] = 1
        cons.append(lp.ge(e, 0))
    return cons


def _columns(topology: UnrootedTopology) -> list[list[int]]:
    """Path matrix transposed: one row per leaf pair, one column per edge."""
    rows = topology.path_matrix()
    return [list(col) for col in zip(*rows)]


def weight_constraints(delta: DissimilarityMap, topology: UnrootedTopology, mode: str,
                       radius) -> list[lp.LinearConstraint]:
    """Edge weights of ``topology`` whose metric lies within ``radius`` of delta."""
    _check_mode(mode)
    if topology.labels != delta.labels:
        raise TopologyError(f"label mismatch: {topology.labels} vs {delta.labels}")
    radius = rational(radius)
    width = len(topology.edges)
    cons = []
    for row, v in zip(_columns(topology), delta.values):
        cons.append(lp.le(row, v + radius))
        cons.append(lp.ge(row, v - radius))
    return cons + _sign_constraints(topology, mode, width)


@dataclass(frozen=True)
class TopologyFit:
    topology: UnrootedTopology
    distance: Fraction
    polyhedron: tuple[lp.LinearConstraint, ...]
    dimension: int
    mode: str = TREE

    def metric(self, weights: Sequence) -> DissimilarityMap:
        return tree_metric_on(self.topology, weights)

    def to_json(self) -> dict:
        return {
            "topology": self.topology.format(),
            "splits": [s.format() for s in sorted(self.topology.splits)],
            "distance": format_rational(self.distance),
            "dimension": self.dimension,
        }


def fit_topology(delta: DissimilarityMap, topology: UnrootedTopology, mode: str = TREE,
                 with_dimension: bool = True) -> TopologyFit:
    """Closest metric in the closed cone of ``topology`` (or its Grassmannian relaxation)."""
    _check_mode(mode)
    if topology.labels != delta.labels:
        raise TopologyError(f"label mismatch: {topology.labels} vs {delta.labels}")
    m = len(topology.edges)
    cons = []
    for row, v in zip(_columns(topology), delta.values):
        cons.append(lp.le(row + [-1], v))
        cons.append(lp.ge(row + [1], v))
    cons += _sign_constraints(topology, mode, m + 1)
    out = lp.minimize(m + 1, cons, [0] * m + [1])
    r = out.value
    poly = tuple(weight_constraints(delta, topology, mode, r))
    dim = lp.polyhedron_dimension(poly, m) if with_dimension else -1
    return TopologyFit(topology, r, poly, dim, mode)


def _guard(delta: DissimilarityMap):
    if delta.n > MAX_TREE_LEAVES:
        raise GuardError(
            f"{delta.n} leaves exceeds the limit of {MAX_TREE_LEAVES} for topology sweeps")
    if delta.n < 3:
        raise ValueError("tree fitting needs at least 3 leaves")


def candidate_topologies(delta: DissimilarityMap) -> list[UnrootedTopology]:
    if delta.n == 3:
        return [star_topology(delta.labels)]
    return enumerate_unrooted_binary(delta.n, labels=delta.labels)


def distance_to_tree_metrics(delta: DissimilarityMap, mode: str = TREE):
    """(distance, table) with one TopologyFit per binary topology.

    Dimensions are computed only for the attaining topologies; the others
    carry ``dimension = -1``.
    """
    _guard(delta)
    _check_mode(mode)
    fits = [fit_topology(delta, t, mode, with_dimension=False) for t in candidate_topologies(delta)]
    best = min(f.distance for f in fits)
    table = {}
    for f in fits:
        if f.distance == best:
            f = TopologyFit(f.topology, f.distance, f.polyhedron,
                            lp.polyhedron_dimension(f.polyhedron, len(f.topology.edges)), mode)
        table[f.topology] = f
    return best, table


@dataclass(frozen=True)
class ComponentReport:
    distance: Fraction
    mode: str
    attaining: tuple[TopologyFit, ...]
    adjacency: tuple[tuple[int, int], ...]
    components: tuple[tuple[int, ...], ...]

    @property
    def component_count(self) -> int:
        return len(self.components)

    @property
    def dimension(self) -> int:
        return max(f.dimension for f in self.attaining)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "distance": format_rational(self.distance),
            "dimension": self.dimension,
            "attaining": [f.to_json() for f in self.attaining],
            "adjacency": [list(e) for e in self.adjacency],
            "components": [list(c) for c in self.components],
            "component_count": self.component_count,
        }


def _meet(delta: DissimilarityMap, a: TopologyFit, b: TopologyFit) -> bool:
    """Do the two closed attaining polyhedra share a metric?"""
    ma, mb = len(a.topology.edges), len(b.topology.edges)
    width = ma + mb
    cons = []
    for c in a.polyhedron:
        cons.append(lp.LinearConstraint(c.coefficients + (Fraction(0),) * mb, c.relation, c.rhs))
    for c in b.polyhedron:
        cons.append(lp.LinearConstraint((Fraction(0),) * ma + c.coefficients, c.relation, c.rhs))
    for ra, rb in zip(_columns(a.topology), _columns(b.topology)):
        cons.append(lp.eq(ra + [-x for x in rb], 0))
    return lp.feasible_point(cons, width) is not None


def closest_tree_components(delta: DissimilarityMap, mode: str = TREE) -> ComponentReport:
    best, table = distance_to_tree_metrics(delta, mode)
    attaining = tuple(sorted((f for f in table.values() if f.distance == best),
                             key=lambda f: f.topology.format()))
    graph = nx.Graph()
    graph.add_nodes_from(range(len(attaining)))
    for i, j in itertools.combinations(range(len(attaining)), 2):
        if _meet(delta, attaining[i], attaining[j]):
            graph.add_edge(i, j)
    comps = tuple(sorted(tuple(sorted(c)) for c in nx.connected_components(graph)))
    return ComponentReport(best, mode, attaining, tuple(sorted(graph.edges())), comps)


# -- dimension construction ---------------------------------------------------

def tree_space(topology: UnrootedTopology) -> LinearSubspace:
    """Linear span of the metrics on ``topology`` (all edge weights free)."""
    return LinearSubspace.spanned_by(topology.path_matrix())


def quartet_equalities(topology: UnrootedTopology) -> list[tuple[Fraction, ...]]:
    """Rows of x_ik + x_jl - x_il - x_jk = 0 for every induced quartet ij|kl."""
    index = {frozenset(p): k for k, p in enumerate(itertools.combinations(topology.labels, 2))}
    rows = []
    for q in quartets(topology):
        (i, j), (k, l) = (sorted(s) for s in q.sides)
        row = [Fraction(0)] * len(index)
        row[index[frozenset((i, k))]] += 1
        row[index[frozenset((j, l))]] += 1
        row[index[frozenset((i, l))]] -= 1
        row[index[frozenset((j, k))]] -= 1
        rows.append(tuple(row))
    return rows


def quartet_hull_dimension(topology: UnrootedTopology) -> int:
    rows = quartet_equalities(topology)
    npairs = topology.n * (topology.n - 1) // 2
    if not rows:
        return npairs
    return len(kernel_basis(RatMatrix.from_rows(rows, cols=npairs)))


def quartet_sign_vector(topology: UnrootedTopology, quartet: Split) -> SignVector:
    """``+`` at il and jk, ``-`` at ik and jl, for the quartet ij|kl."""
    (i, j), (k, l) = _quartet_sides(topology, quartet)
    signs = {frozenset((i, l)): "+", frozenset((j, k)): "+",
             frozenset((i, k)): "-", frozenset((j, l)): "-"}
    return SignVector("".join(signs.get(frozenset(p), "0")
                              for p in itertools.combinations(topology.labels, 2)))


def _quartet_sides(topology: UnrootedTopology, quartet: Split):
    four = frozenset(quartet.labels)
    if len(four) != 4:
        raise TopologyError(f"{quartet} is not a quartet")
    induced = {q.format() for q in quartets(topology)}
    if Split.of(quartet.side, sorted(four)).format() not in induced:
        raise TopologyError(f"quartet {quartet.format()} is not displayed by {topology.format()}")
    a, b = quartet.sides
    return tuple(sorted(a)), tuple(sorted(b))


def construct_tree_dim_witness(topology: UnrootedTopology, z: DissimilarityMap, quartet: Split,
                               eps) -> DissimilarityMap:
    """delta = z + eps(e_ik + e_jl - e_il - e_jk) for the quartet ij|kl of ``topology``.

    Verifies that ``topology`` alone attains the tree-metric distance and that
    its closest set has dimension 2n - 6; raises ValueError otherwise (for
    instance when eps is too large).
    """
    if not topology.is_binary:
        raise TopologyError("the construction needs a binary topology")
    eps = rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    (i, j), (k, l) = _quartet_sides(topology, quartet)
    bump = {frozenset((i, k)): eps, frozenset((j, l)): eps,
            frozenset((i, l)): -eps, frozenset((j, k)): -eps}
    delta = DissimilarityMap.from_function(
        z.labels, lambda a, b: z[a, b] + bump.get(frozenset((a, b)), 0))
    n = topology.n
    best, table = distance_to_tree_metrics(delta, TREE)
    winners = [t for t, f in table.items() if f.distance == best]
    if winners != [topology]:
        raise ValueError(f"eps={eps} too large: attaining topologies {[t.format() for t in winners]}")
    if table[topology].dimension != 2 * n - 6:
        raise ValueError(f"closest set has dimension {table[topology].dimension}, expected {2 * n - 6}")
    return delta


def witness_sign_rank(topology: UnrootedTopology, quartet: Split) -> int:
    return sign_rank(quartet_sign_vector(topology, quartet), tree_space(topology))


def type_in_tree_space(delta: DissimilarityMap, topology: UnrootedTopology) -> SignVector:
    return type_of(delta.values, tree_space(topology))
