"""Leaf-labelled tree topologies, rooted and unrooted, polytomies allowed.

A rooted topology is stored as its hierarchy: the set of leaf clusters below
each internal vertex (the root cluster included).  An unrooted topology is
stored as its set of nontrivial splits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .dissim import DissimilarityMap, default_labels, label_key
from .ratlin import format_rational

MAX_ENUMERATION_LEAVES = 7

Cluster = frozenset


class TopologyError(ValueError):
    pass


class NotUltrametric(ValueError):
    pass


def _sorted_labels(labels: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(labels, key=label_key))


def _compact(labels: Iterable[str]) -> bool:
    return all(len(l) == 1 for l in labels)


def double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass(frozen=True)
class RootedTopology:
    labels: tuple[str, ...]
    clusters: frozenset[Cluster]

    def __post_init__(self):
        leaves = frozenset(self.labels)
        if len(leaves) != len(self.labels):
            raise TopologyError(f"duplicate leaf labels in {self.labels}")
        object.__setattr__(self, "labels", _sorted_labels(self.labels))
        clusters = frozenset(frozenset(c) for c in self.clusters if len(c) >= 2)
        if len(leaves) >= 2 and leaves not in clusters:
            clusters = clusters | {leaves}
        for c in clusters:
            if not c <= leaves:
                raise TopologyError(f"cluster {sorted(c)} uses unknown leaves")
        for a, b in itertools.combinations(clusters, 2):
            if a & b and not (a <= b or b <= a):
                raise TopologyError(f"clusters {sorted(a)} and {sorted(b)} overlap")
        object.__setattr__(self, "clusters", clusters)

    @classmethod
    def star(cls, labels: Sequence[str]) -> "RootedTopology":
        return cls(tuple(labels), frozenset())

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> Cluster:
        return frozenset(self.labels)

    @cached_property
    def internal_nodes(self) -> tuple[Cluster, ...]:
        """Internal clusters, smallest first (children before parents)."""
        return tuple(sorted(self.clusters, key=lambda c: (len(c), _cluster_key(c))))

    def parent(self, cluster: Cluster) -> Cluster | None:
        above = [c for c in self.clusters if cluster < c]
        return min(above, key=len) if above else None

    def children(self, cluster: Cluster) -> list[Cluster]:
        """Maximal proper sub-clusters plus singleton leaves not covered by one."""
        subs = [c for c in self.clusters if c < cluster]
        maximal = [c for c in subs if not any(c < d for d in subs)]
        covered = frozenset().union(*maximal) if maximal else frozenset()
        leaves = [frozenset((l,)) for l in cluster if l not in covered]
        return leaves + maximal

    def lca(self, a: str, b: str) -> Cluster:
        return min((c for c in self.clusters if a in c and b in c), key=len)

    @cached_property
    def lca_table(self) -> dict[frozenset, Cluster]:
        return {frozenset((a, b)): self.lca(a, b) for a, b in itertools.combinations(self.labels, 2)}

    @property
    def is_binary(self) -> bool:
        return all(len(self.children(c)) == 2 for c in self.clusters)

    @property
    def is_star(self) -> bool:
        return len(self.clusters) <= 1

    def polytomies(self) -> list[Cluster]:
        return [c for c in self.internal_nodes if len(self.children(c)) > 2]

    def format(self) -> str:
        sep = "" if _compact(self.labels) else ","

        def render(cluster: Cluster) -> str:
            kids = self.children(cluster)
            leaves = sorted((next(iter(k)) for k in kids if len(k) == 1), key=label_key)
            subtrees = sorted(render(k) for k in kids if len(k) > 1)
            return "(" + sep.join(leaves + subtrees) + ")"

        if self.n == 1:
            return self.labels[0]
        return render(self.root)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"RootedTopology({self.format()!r})"

    def __lt__(self, other: "RootedTopology"):
        return self.format() < other.format()

    def restrict(self, subset: Iterable[str]) -> "RootedTopology":
        subset = frozenset(subset)
        return RootedTopology(tuple(subset), frozenset(c & subset for c in self.clusters))

    def relabel(self, mapping: Mapping[str, str]) -> "RootedTopology":
        return RootedTopology(tuple(mapping[l] for l in self.labels),
                              frozenset(frozenset(mapping[l] for l in c) for c in self.clusters))

    def contract(self, cluster: Cluster) -> "RootedTopology":
        """Remove the edge above a non-root internal vertex."""
        if cluster not in self.clusters or cluster == self.root:
            raise TopologyError(f"{sorted(cluster)} is not a non-root internal vertex")
        return RootedTopology(self.labels, self.clusters - {cluster})

    def refines(self, other: "RootedTopology") -> bool:
        return self.labels == other.labels and other.clusters <= self.clusters

    def unrooted(self) -> "UnrootedTopology":
        n = self.n
        splits = [Split.of(c, self.labels) for c in self.clusters if 2 <= len(c) <= n - 2]
        return UnrootedTopology(self.labels, frozenset(splits))


def _cluster_key(c: Cluster):
    return tuple(label_key(l) for l in sorted(c, key=label_key))


@dataclass(frozen=True)
class Split:
    """Bipartition of the leaf set, stored by the side avoiding the first leaf."""

    side: frozenset[str]
    labels: tuple[str, ...]

    @classmethod
    def of(cls, part: Iterable[str], labels: Sequence[str]) -> "Split":
        labels = _sorted_labels(labels)
        part = frozenset(part)
        if not part <= frozenset(labels):
            raise TopologyError(f"split side {sorted(part)} uses unknown leaves")
        if labels[0] in part:
            part = frozenset(labels) - part
        return cls(part, labels)

    @property
    def sides(self) -> tuple[frozenset[str], frozenset[str]]:
        return frozenset(self.labels) - self.side, self.side

    def separates(self, a: str, b: str) -> bool:
        return (a in self.side) != (b in self.side)

    @property
    def is_trivial(self) -> bool:
        return min(len(s) for s in self.sides) <= 1

    def format(self) -> str:
        a, b = self.sides
        if (len(b), sorted(map(label_key, b))) < (len(a), sorted(map(label_key, a))):
            a, b = b, a
        sep = "" if _compact(self.labels) else ","
        return (sep.join(sorted(a, key=label_key)) + "|" + sep.join(sorted(b, key=label_key)))

    def __str__(self):
        return self.format()

    def __lt__(self, other: "Split"):
        return self.format() < other.format()


@dataclass(frozen=True)
class UnrootedTopology:
    labels: tuple[str, ...]
    splits: frozenset[Split]

    def __post_init__(self):
        object.__setattr__(self, "labels", _sorted_labels(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise TopologyError(f"duplicate leaf labels in {self.labels}")
        splits = frozenset(Split.of(s.side, self.labels) for s in self.splits)
        splits = frozenset(s for s in splits if not s.is_trivial)
        for a, b in itertools.combinations(splits, 2):
            if not _compatible(a.side, b.side, frozenset(self.labels)):
                raise TopologyError(f"incompatible splits {a} and {b}")
        object.__setattr__(self, "splits", splits)

    @classmethod
    def from_split_strings(cls, labels: Sequence[str], texts: Iterable[str]) -> "UnrootedTopology":
        labels = tuple(labels)
        out = []
        for t in texts:
            left = t.split("|")[0]
            part = left.split(",") if "," in left else list(left)
            out.append(Split.of(part, labels))
        return cls(labels, frozenset(out))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def is_binary(self) -> bool:
        return len(self.splits) == max(self.n - 3, 0)

    @cached_property
    def edges(self) -> tuple[Split, ...]:
        """Leaf edges (in label order) followed by internal edges (sorted)."""
        leaf = tuple(Split.of((l,), self.labels) for l in self.labels)
        return leaf + tuple(sorted(self.splits))

    def edge_is_leaf(self, k: int) -> bool:
        return k < self.n

    def path_matrix(self) -> list[list[int]]:
        """Rows indexed by edges, columns by leaf pairs in lexicographic order."""
        pairs = list(itertools.combinations(self.labels, 2))
        return [[int(e.separates(a, b)) for a, b in pairs] for e in self.edges]

    def format(self) -> str:
        return "{" + ",".join(s.format() for s in sorted(self.splits)) + "}"

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"UnrootedTopology({self.format()!r})"

    def __lt__(self, other: "UnrootedTopology"):
        return self.format() < other.format()

    def relabel(self, mapping: Mapping[str, str]) -> "UnrootedTopology":
        labels = tuple(mapping[l] for l in self.labels)
        return UnrootedTopology(labels, frozenset(
            Split.of((mapping[l] for l in s.side), labels) for s in self.splits))


def _compatible(a: frozenset, b: frozenset, leaves: frozenset) -> bool:
    ac, bc = leaves - a, leaves - b
    return not (a & b) or not (a & bc) or not (ac & b) or not (ac & bc)


# -- parsing -----------------------------------------------------------------

def parse_topology(text: str) -> RootedTopology:
    """Parse nested-parenthesis notation such as ``(D(C(AB)))`` or ``(10,(3,12))``.

    Without commas every character other than parentheses and whitespace is
    its own leaf label.  A trailing ``;`` is ignored.
    """
    s = text.strip()
    if s.endswith(";"):
        s = s[:-1].rstrip()
    if not s:
        raise TopologyError("empty topology string")
    delimited = "," in s
    tokens: list[str] = []
    buf = ""
    for ch in s:
        if ch in "(),":
            if buf.strip():
                tokens.append(buf.strip())
            buf = ""
            if ch != ",":
                tokens.append(ch)
        elif ch.isspace():
            if delimited:
                buf += ch
        elif delimited:
            buf += ch
        else:
            tokens.append(ch)
    if buf.strip():
        tokens.append(buf.strip())

    pos = 0
    clusters: list[frozenset] = []
    leaves: list[str] = []

    def node() -> frozenset:
        nonlocal pos
        if pos >= len(tokens):
            raise TopologyError(f"unexpected end of input in {text!r}")
        tok = tokens[pos]
        if tok == ")":
            raise TopologyError(f"unexpected ')' at token {pos} in {text!r}")
        if tok != "(":
            pos += 1
            leaves.append(tok)
            return frozenset((tok,))
        pos += 1
        kids = []
        while pos < len(tokens) and tokens[pos] != ")":
            kids.append(node())
        if pos >= len(tokens):
            raise TopologyError(f"unbalanced parentheses in {text!r}")
        pos += 1
        if len(kids) < 2:
            raise TopologyError(f"internal vertex with fewer than two children in {text!r}")
        c = frozenset().union(*kids)
        clusters.append(c)
        return c

    node()
    if pos != len(tokens):
        raise TopologyError(f"trailing input after position {pos} in {text!r}")
    if len(set(leaves)) != len(leaves):
        dup = sorted({l for l in leaves if leaves.count(l) > 1})
        raise TopologyError(f"duplicate leaf labels {dup} in {text!r}")
    if len(set(clusters)) != len(clusters):
        raise TopologyError(f"internal vertex with a single child in {text!r}")
    return RootedTopology(tuple(leaves), frozenset(clusters))


def format_topology(t: RootedTopology) -> str:
    return t.format()


# -- enumeration -------------------------------------------------------------

def _binary_hierarchies(items: Sequence) -> list[frozenset[frozenset]]:
    """All rooted binary hierarchies on ``items`` by successive leaf insertion."""
    items = list(items)
    if len(items) == 1:
        return [frozenset()]
    first = frozenset(items[:2])
    trees = [frozenset({first})]
    for x in items[2:]:
        grown = []
        for clusters in trees:
            leaves = frozenset().union(*clusters)
            nodes = list(clusters) + [frozenset((l,)) for l in leaves]
            for v in nodes:
                new = {c | {x} if v < c else c for c in clusters}
                new.add(v | {x})
                grown.append(frozenset(new))
        trees = grown
    return trees


def _check_n(n: int, lo: int, hi: int):
    if not lo <= n <= hi:
        raise ValueError(f"enumeration supports {lo} <= n <= {hi}, got n={n}")


def enumerate_rooted(n: int, binary_only: bool = False,
                     labels: Sequence[str] | None = None) -> list[RootedTopology]:
    """RB(n) or RP(n), sorted by canonical string."""
    _check_n(n, 2, MAX_ENUMERATION_LEAVES)
    labels = _sorted_labels(labels) if labels is not None else default_labels(n)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels given for n={n}")
    binary = _binary_hierarchies(labels)
    if binary_only:
        out = {RootedTopology(labels, h) for h in binary}
    else:
        root = frozenset(labels)
        out = set()
        for h in binary:
            inner = [c for c in h if c != root]
            for k in range(len(inner) + 1):
                for drop in itertools.combinations(inner, k):
                    out.add(RootedTopology(labels, h - frozenset(drop)))
    return sorted(out, key=lambda t: t.format())


def enumerate_unrooted_binary(n: int, labels: Sequence[str] | None = None) -> list[UnrootedTopology]:
    """B(n): unrooted binary trees, obtained by hanging the first leaf above RB(n-1)."""
    _check_n(n, 4, MAX_ENUMERATION_LEAVES)
    labels = _sorted_labels(labels) if labels is not None else default_labels(n)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels given for n={n}")
    rest = labels[1:]
    root = frozenset(rest)
    out = set()
    for h in _binary_hierarchies(rest):
        splits = frozenset(Split.of(c, labels) for c in h if c != root)
        out.add(UnrootedTopology(labels, splits))
    return sorted(out, key=lambda t: t.format())


# -- induced substructures ---------------------------------------------------

def triples(t: RootedTopology) -> list[RootedTopology]:
    """Resolved rooted triples (k(ij)) displayed by t."""
    out = []
    for trio in itertools.combinations(t.labels, 3):
        r = t.restrict(trio)
        if r.is_binary:
            out.append(r)
    return sorted(out, key=lambda r: r.format())


def splits(t) -> list[Split]:
    if isinstance(t, RootedTopology):
        t = t.unrooted()
    return sorted(t.splits)


def quartets(t) -> list[Split]:
    """Induced quartets ij|kl, each as a split of its four leaves."""
    if isinstance(t, RootedTopology):
        t = t.unrooted()
    out = []
    for four in itertools.combinations(t.labels, 4):
        fs = frozenset(four)
        for s in t.splits:
            part = s.side & fs
            if len(part) == 2:
                out.append(Split.of(part, four))
                break
    return sorted(out)


def resolutions(t: RootedTopology) -> list[RootedTopology]:
    """All binary refinements of t; t itself when it is already binary."""
    options = []
    for v in t.polytomies():
        kids = t.children(v)
        per_node = []
        for h in _binary_hierarchies(range(len(kids))):
            per_node.append(frozenset(
                frozenset().union(*(kids[i] for i in c)) for c in h if len(c) < len(kids)))
        options.append(per_node)
    out = set()
    for combo in itertools.product(*options):
        out.add(RootedTopology(t.labels, t.clusters.union(*combo)))
    return sorted(out, key=lambda r: r.format())


# -- ultrametrics and equidistant trees --------------------------------------

@dataclass(frozen=True)
class EquidistantRepresentation:
    """Rooted topology with a height at every internal vertex.

    u(i, j) is the height of lca(i, j); heights strictly increase towards the
    root.  Leaves sit at height 0 in the vertex-weight picture, so leaf edge
    weights may be negative.
    """

    topology: RootedTopology
    heights: Mapping[Cluster, Fraction]

    def __post_init__(self):
        t = self.topology
        if set(self.heights) != set(t.clusters):
            raise TopologyError("heights must be given for exactly the internal vertices")
        for c in t.clusters:
            p = t.parent(c)
            if p is not None and not self.heights[c] < self.heights[p]:
                raise TopologyError(f"height of {sorted(c)} is not below its parent's")

    def to_dissimilarity(self) -> DissimilarityMap:
        t = self.topology
        return DissimilarityMap.from_function(t.labels, lambda a, b: self.heights[t.lca(a, b)])

    def sorted_heights(self) -> list[Fraction]:
        return sorted(self.heights.values())

    def newick(self) -> str:
        """Newick string whose path lengths reproduce the ultrametric."""
        t = self.topology

        def render(c: Cluster, parent_height) -> str:
            kids = t.children(c)
            parts = []
            for k in sorted(kids, key=lambda k: (len(k) > 1, _cluster_key(k))):
                if len(k) == 1:
                    leaf = next(iter(k))
                    parts.append(f"{leaf}:{format_rational(self.heights[c] / 2)}")
                else:
                    parts.append(render(k, self.heights[c]))
            body = "(" + ",".join(parts) + ")"
            if parent_height is None:
                return body
            return f"{body}:{format_rational((parent_height - self.heights[c]) / 2)}"

        return render(t.root, None) + ";"


def is_ultrametric(u: DissimilarityMap) -> bool:
    """Three-point condition: the two largest of u_ij, u_ik, u_jk agree."""
    for a, b, c in itertools.combinations(u.labels, 3):
        x, y, z = sorted((u[a, b], u[a, c], u[b, c]))
        if y != z:
            return False
    return True


def topology_of_ultrametric(u: DissimilarityMap) -> EquidistantRepresentation:
    """Single-linkage dendrogram; simultaneous merges at one height form polytomies."""
    if not is_ultrametric(u):
        raise NotUltrametric(f"{u} violates the three-point condition")
    parent = {l: l for l in u.labels}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    heights: dict[Cluster, Fraction] = {}
    for h in sorted(set(u.values)):
        for (a, b), v in zip(u.pairs(), u.values):
            if v == h:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        groups: dict[str, set] = {}
        for l in u.labels:
            groups.setdefault(find(l), set()).add(l)
        for g in groups.values():
            g = frozenset(g)
            if len(g) >= 2 and g not in heights:
                heights[g] = h
    topo = RootedTopology(u.labels, frozenset(heights))
    rep = EquidistantRepresentation(topo, heights)
    if rep.to_dissimilarity() != u:
        raise NotUltrametric(f"{u} is not reproduced by its dendrogram")
    return rep


def ultrametric_on(t: RootedTopology, heights: Mapping[Cluster, object] | None = None) -> DissimilarityMap:
    """Ultrametric realizing t; default heights are the cluster sizes."""
    if heights is None:
        heights = {c: Fraction(len(c)) for c in t.clusters}
    return EquidistantRepresentation(t, {c: Fraction(h) for c, h in heights.items()}).to_dissimilarity()


def tree_metric_on(t: UnrootedTopology, weights: Sequence) -> DissimilarityMap:
    """Path-length metric for edge weights in ``t.edges`` order."""
    rows = t.path_matrix()
    if len(weights) != len(rows):
        raise ValueError(f"{len(weights)} weights for {len(rows)} edges")
    w = [Fraction(x) for x in weights]
    npairs = len(rows[0]) if rows else 0
    return DissimilarityMap(t.labels, tuple(
        sum((w[e] for e in range(len(rows)) if rows[e][p]), Fraction(0)) for p in range(npairs)))
