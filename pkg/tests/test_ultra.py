import random
import warnings
from fractions import Fraction

import pytest

from linf_trees import ultra
from linf_trees.dissim import DissimilarityMap
from linf_trees.trees import (RootedTopology, enumerate_rooted, is_ultrametric, parse_topology,
                              resolutions, topology_of_ultrametric, ultrametric_on)
from linf_trees.ultra import (GuardError, binary_fit, canonical_closest, closest_set_components,
                              closest_set_dimension, construct_dim_witness,
                              construct_polytomy_witness, distance_to_ultrametrics, district,
                              district_census, height_constraints, in_closest_set,
                              sample_closest_ultrametrics, subdominant, three_leaf_district,
                              top_set)

from conftest import affine_dimension, dm, vertices


def names(tops):
    return sorted(t.format() for t in tops)


# -- golden values -------------------------------------------------------------

@pytest.mark.parametrize("delta, sub, r, canon", [
    ((2, 4, 6, 8, 10, 12), (2, 4, 6, 4, 6, 6), 3, (5, 7, 9, 7, 9, 9)),
    ((5, 8, 9, 6, 9, 9), (5, 6, 9, 6, 9, 9), 1, (6, 7, 10, 7, 10, 10)),
    ((5, 5, 10, 5, 9, 11), (5, 5, 9, 5, 9, 9), 1, (6, 6, 10, 6, 10, 10)),
])
def test_subdominant_and_canonical(delta, sub, r, canon):
    d = dm(*delta)
    assert subdominant(d).values == sub
    assert distance_to_ultrametrics(d) == r
    assert canonical_closest(d).values == canon
    assert in_closest_set(d, canonical_closest(d))


def test_is_ultrametric_examples():
    assert ultra.is_ultrametric(dm(5, 7, 9, 7, 9, 9))
    assert not ultra.is_ultrametric(dm(2, 4, 6, 8, 10, 12))
    assert ultra.is_ultrametric(dm(3, 3, 3, 3, 3, 3))


def test_ultrametric_is_its_own_subdominant():
    u = dm(5, 7, 9, 7, 9, 9)
    assert subdominant(u) == u and distance_to_ultrametrics(u) == 0


def test_small_n_distance():
    assert distance_to_ultrametrics(dm(7)) == 0


def test_three_leaf_example():
    d = dm(1, 1, 3)
    assert distance_to_ultrametrics(d) == 1
    for u in [(2, 1, 2), (1, 2, 2), (2, 2, 2)]:
        assert in_closest_set(d, dm(*u))
    assert not in_closest_set(d, d)
    assert district(d) == "{(123),(2(13)),(3(12))}"
    assert district(dm(5, 5, 5)) == "{(123)}"
    assert district(dm(10, 20, 1)) == "{(1(23))}"


def test_polytomy_membership_points():
    d = dm(5, 5, 10, 5, 9, 11, labels="ABCD")
    for u in [(4, 6, 10, 6, 10, 10), (6, 4, 10, 6, 10, 10), (6, 6, 10, 4, 10, 10)]:
        assert in_closest_set(d, dm(*u, labels="ABCD"))
    tops = top_set(d)
    t = parse_topology("(D(ABC))")
    assert {t, *resolutions(t)} <= tops


def test_nonconvexity_examples():
    d1 = dm(10, 20, 21, 23, 25, 27)
    d2 = dm(10, 23, 21, 20, 25, 27)
    assert subdominant(d1) == subdominant(d2) == dm(10, 20, 21, 20, 21, 21)
    assert names(top_set(d1)) == names(top_set(d2)) == ["(4(3(12)))"]
    mid = d1.with_values((a + b) / 2 for a, b in zip(d1.values, d2.values))
    assert mid.values == (10, Fraction(43, 2), 21, Fraction(43, 2), 25, 27)
    assert names(top_set(mid)) == ["(3(4(12)))"]
    mx = d1.with_values(max(a, b - Fraction(3, 2)) for a, b in zip(d1.values, d2.values))
    assert names(top_set(mx)) == ["(3(4(12)))"]


def test_ordering_pair_computed_values():
    """Independently derived districts of the ordering pair.

    With r = 5, leaf 4 is pinned to height 17 and {1,2,3} is free below it;
    with r = 1, the three-point condition on {1,2,3} forces (3(12)).
    """
    wide = dm(4, 8, 12, 9, 21, 22)
    assert distance_to_ultrametrics(wide) == 5
    assert names(top_set(wide)) == ["(4(1(23)))", "(4(123))", "(4(2(13)))", "(4(3(12)))"]
    for u in [(8, 8, 17, 8, 17, 17), (4, 8, 17, 8, 17, 17), (8, 4, 17, 8, 17, 17),
              (8, 8, 17, 4, 17, 17)]:
        assert in_closest_set(wide, dm(*u))
    narrow = dm(4, 8, 12, 9, 13, 14)
    assert distance_to_ultrametrics(narrow) == 1
    assert names(top_set(narrow)) == ["(4(3(12)))"]


def test_closest_set_dimension_examples():
    assert closest_set_dimension(dm(5, 8, 9, 6, 9, 9)) == 2
    assert closest_set_dimension(dm(5, 7, 9, 7, 9, 9)) == 0


@pytest.mark.parametrize("values", [(2, 4, 6, 8, 10, 12), (5, 8, 9, 6, 9, 9), (1, 5, 2, 7, 3, 3),
                                    (4, 8, 12, 9, 21, 22)])
def test_dimension_against_vertex_oracle(values):
    d = dm(*values)
    r = distance_to_ultrametrics(d)
    best = -1
    for t in enumerate_rooted(4, binary_only=True):
        cons = height_constraints(d, t, r, strict=False)
        dim = affine_dimension(vertices(cons, len(t.internal_nodes)))
        if dim is not None:
            best = max(best, dim)
    assert closest_set_dimension(d) == best


def test_guard():
    big = DissimilarityMap.of(range(21))
    with pytest.raises(GuardError):
        top_set(big)
    with pytest.raises(GuardError):
        closest_set_dimension(big)


# -- constructions -------------------------------------------------------------

def test_polytomy_witness_reproduces_example():
    t = parse_topology("(D(ABC))")
    u = dm(5, 5, 10, 5, 10, 10, labels="ABCD")
    assert construct_polytomy_witness(t, 1, u, ("C", "B", "D")).values == (5, 5, 10, 5, 9, 11)


def test_polytomy_witness_errors():
    with pytest.raises(ValueError):
        construct_polytomy_witness(RootedTopology.star("1234"), 1)
    t = parse_topology("(4(123))")
    with pytest.raises(ValueError):
        construct_polytomy_witness(t, 5)
    with pytest.raises(ValueError):
        construct_polytomy_witness(t, 0)


POLYTOMY_TREES = [t for t in enumerate_rooted(4) if not t.is_binary and not t.is_star]


@pytest.mark.parametrize("t", POLYTOMY_TREES, ids=lambda t: t.format())
@pytest.mark.parametrize("fraction", [Fraction(1, 4), Fraction(1, 2), Fraction(9, 10)])
def test_polytomy_proposition(t, fraction):
    u = ultrametric_on(t)
    i, j, k = next((i, j, k) for i in u.labels for j in u.labels for k in u.labels
                   if len({i, j, k}) == 3 and u[i, j] < u[i, k] == u[j, k])
    eps = fraction * (u[i, k] - u[i, j])
    delta = construct_polytomy_witness(t, eps, u, (i, j, k))
    assert {t, *resolutions(t)} <= top_set(delta)


def test_tritomy_witness_has_five_binary_topologies():
    t = parse_topology("(34(12))")
    delta = construct_polytomy_witness(t, Fraction(3, 2))
    assert delta.values == (2, Fraction(11, 2), 4, Fraction(5, 2), 4, 4)
    binary = [s for s in top_set(delta) if s.is_binary]
    assert len(binary) == 15 // 3


def test_dim_witness_reproduces_example():
    t = parse_topology("(D(C(AB)))")
    u = dm(5, 7, 9, 7, 9, 9, labels="ABCD")
    delta = construct_dim_witness(t, u, ("A", "B", "C"), 1)
    assert delta.values == (5, 8, 9, 6, 9, 9)
    assert names(top_set(delta)) == ["(D(C(AB)))"]


def test_dim_witness_five_leaves():
    t = parse_topology("(5(4(3(12))))")
    delta = construct_dim_witness(t, ultrametric_on(t), ("1", "2", "3"), Fraction(1, 4))
    assert closest_set_dimension(delta) == 3
    r = distance_to_ultrametrics(delta)
    cons = height_constraints(delta, t, r, strict=False)
    assert affine_dimension(vertices(cons, len(t.internal_nodes))) == 3


def test_dim_witness_five_leaves_rejects_tie():
    # r equals eps here, so eps = 1/2 lets the two top heights meet
    t = parse_topology("(5(4(3(12))))")
    with pytest.raises(ValueError):
        construct_dim_witness(t, ultrametric_on(t), ("1", "2", "3"), Fraction(1, 2))


def test_dim_witness_rejects_large_eps():
    t = parse_topology("(D(C(AB)))")
    u = dm(5, 7, 9, 7, 9, 9, labels="ABCD")
    with pytest.raises(ValueError):
        construct_dim_witness(t, u, ("A", "B", "C"), 5)
    with pytest.raises(ValueError):
        construct_dim_witness(t, u, ("A", "C", "B"), 1)


# -- properties on seeded random inputs ----------------------------------------

def random_map(rng, n, lo=0, hi=6):
    return DissimilarityMap.of([rng.randint(lo, hi) for _ in range(n * (n - 1) // 2)])


@pytest.mark.parametrize("seed", range(5))
def test_three_leaf_closed_form(seed):
    rng = random.Random(seed)
    for _ in range(200):
        d = random_map(rng, 3, 0, 4)
        assert three_leaf_district(d) == district(d)


@pytest.mark.parametrize("seed", range(6))
def test_interval_method_matches_lp(seed):
    rng = random.Random(50 + seed)
    for _ in range(40):
        d = random_map(rng, 4, 0, 5)
        assert top_set(d, "lp") == top_set(d, "interval")
    d = random_map(rng, 5, 0, 9)
    assert top_set(d, "lp") == top_set(d, "interval")


@pytest.mark.parametrize("seed", range(6))
def test_subdominant_properties(seed):
    rng = random.Random(100 + seed)
    d = random_map(rng, rng.randint(3, 6), -5, 20)
    s = subdominant(d)
    assert is_ultrametric(s) and s.dominated_by(d)
    for _ in range(10):
        t = rng.choice(enumerate_rooted(d.n))
        w = ultrametric_on(t).scale(rng.randint(1, 5))
        v = w.shift(-max(a - b for a, b in zip(w.values, d.values)))
        assert v.dominated_by(d) and v.dominated_by(s)


@pytest.mark.parametrize("seed", range(6))
def test_distance_formula_matches_lp_oracle(seed):
    rng = random.Random(200 + seed)
    n = rng.choice([3, 4, 5])
    d = random_map(rng, n, -3, 12)
    oracle = min(binary_fit(d, t) for t in enumerate_rooted(n, binary_only=True))
    assert distance_to_ultrametrics(d) == oracle


@pytest.mark.parametrize("seed", range(6))
def test_canonical_point_properties(seed):
    rng = random.Random(300 + seed)
    d = random_map(rng, 4, 0, 20)
    c = canonical_closest(d)
    assert in_closest_set(d, c)
    assert topology_of_ultrametric(c).topology in top_set(d)
    for u in sample_closest_ultrametrics(d, rng, 8):
        assert in_closest_set(d, u)
        assert u.dominated_by(c)


@pytest.mark.parametrize("seed", range(6))
def test_top_set_invariances(seed):
    rng = random.Random(400 + seed)
    d = random_map(rng, 4, 0, 8)
    tops = top_set(d)
    assert top_set(d.shift(Fraction(-7, 3))) == tops
    assert top_set(d.scale(Fraction(5, 2))) == tops


def test_connectivity_is_reported():
    rng = random.Random(500)
    disconnected = []
    for _ in range(15):
        d = random_map(rng, 4, 0, 10)
        if len(closest_set_components(d)) != 1:
            disconnected.append(d)
    if disconnected:
        warnings.warn(f"closest sets with several components: {[str(d) for d in disconnected]}")
    assert len(closest_set_components(dm(2, 4, 6, 8, 10, 12))) == 1
    assert len(closest_set_components(dm(0, 0, 0, 0, 0, 2))) == 1


# -- census --------------------------------------------------------------------

def test_census_labels_are_top_sets():
    counts = district_census(4, 10, seed=7)
    assert sum(counts.values()) == 10
    pts = ultra.census_points(10, 7)
    assert sorted(counts) == sorted(set(district(DissimilarityMap.of(p)) for p in pts))


def test_census_degenerate_box():
    assert district_census(4, 25, seed=1, box=(3, 3)) == {"{(1234)}": 25}


def test_census_is_deterministic():
    assert district_census(4, 30, seed=11) == district_census(4, 30, seed=11)
    assert district_census(4, 30, seed=11, workers=2) == district_census(4, 30, seed=11)


def test_census_only_for_four_leaves():
    with pytest.raises(ValueError):
        district_census(5, 10)
