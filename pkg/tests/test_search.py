import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from crosscomp.compositions import CompositionSpace
from crosscomp.families import Family, FamilySystem, is_cross_t_intersecting, make_star
from crosscomp.io import dumps, result_to_json
from crosscomp.search import (
    SearchProblem,
    SearchResult,
    brute_oracle,
    closure_r2,
    compat_set,
    max_product_general,
    max_product_r2,
    verify_extremal,
)
from conftest import naive_agree, naive_max_product

P = CompositionSpace


def brute_compat(spaces, target, chosen, t):
    l = min(s.l for s in spaces)
    pools = [chosen[k].members() for k in range(len(spaces)) if k != target]
    keep = []
    for v in spaces[target]:
        ok = True
        for combo in itertools.product(*pools):
            tup = list(combo)
            tup.insert(target, v)
            if len(naive_agree(tup, l)) < t:
                ok = False
                break
        if ok:
            keep.append(v)
    return keep


# ---------------------------------------------------------------- compat / closure


def test_compat_set_of_nothing_is_everything():
    spaces = (P(2, 3), P(3, 3))
    assert compat_set(spaces, 1, [Family(spaces[0]), None], 1) == Family.full(spaces[1])


def test_compat_set_examples():
    spaces = (P(1, 3), P(1, 3))
    S = Family.from_members(spaces[0], [(1, 0, 0)])
    assert brute_compat(spaces, 1, [S, None], 1) == list(spaces[1])
    assert compat_set(spaces, 1, [S, None], 1) == Family.full(spaces[1])

    spaces = (P(3, 3), P(3, 3))
    S = Family.from_members(spaces[0], [(3, 0, 0)])
    expected = brute_compat(spaces, 1, [S, None], 2)
    assert expected == [(3, 0, 0)]
    assert compat_set(spaces, 1, [S, None], 2).members() == expected


@pytest.mark.parametrize("seed", range(25))
def test_compat_set_matches_brute_force(seed):
    rng = random.Random(seed)
    r = rng.choice([2, 3])
    spaces = [P(rng.randint(0, 3), rng.randint(3, 4)) for _ in range(r)]
    t = rng.choice([1, 2])
    chosen = [Family.from_members(s, [u for u in s if rng.random() < 0.3]) for s in spaces]
    target = rng.randrange(r)
    if not all(chosen[k] for k in range(r) if k != target):
        return
    assert compat_set(spaces, target, chosen, t).members() == brute_compat(spaces, target, chosen, t)


def test_closure_r2_examples():
    problem = SearchProblem.of([(2, 3), (3, 3)], 1)
    s1, s2 = problem.spaces
    polar, closed = closure_r2(problem, Family(s1))
    assert polar == Family.full(s2)
    assert closed == compat_set(problem.spaces, 0, [None, polar], 1)

    polar, closed = closure_r2(problem, Family.full(s1))
    assert closed == Family.full(s1)

    problem = SearchProblem.of([(3, 3), (3, 3)], 1)
    star = make_star(problem.spaces[0], [1])
    polar, _ = closure_r2(problem, star)
    expected = brute_compat(problem.spaces, 1, [star, None], 1)
    assert polar.members() == expected
    assert make_star(problem.spaces[1], [1]).issubset(polar)


def test_closure_r2_rejects_more_families():
    problem = SearchProblem.of([(1, 3)] * 3, 1)
    with pytest.raises(ValueError):
        closure_r2(problem, Family(problem.spaces[0]))


SHAPES = [([(3, 3), (3, 3)], 1), ([(2, 4), (3, 4)], 2), ([(4, 3), (2, 5)], 1), ([(2, 3), (5, 4)], 1)]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SHAPES), st.data())
def test_galois_laws(shape, data):
    spaces, t = shape
    problem = SearchProblem.of(spaces, t)
    s1 = problem.spaces[0]
    mask = data.draw(st.integers(0, (1 << s1.cardinality) - 1))
    extra = data.draw(st.integers(0, (1 << s1.cardinality) - 1))
    S, S_big = Family(s1, mask), Family(s1, mask | extra)
    polar, closed = closure_r2(problem, S)
    polar_big, _ = closure_r2(problem, S_big)
    assert S.issubset(closed)
    assert polar_big.issubset(polar)
    assert closure_r2(problem, closed)[0] == polar


# ---------------------------------------------------------------- r = 2 search


def test_p13_squared_t1_is_nine():
    problem = SearchProblem.of([(1, 3), (1, 3)], 1)
    assert naive_max_product([(1, 3), (1, 3)], 1) == 9
    for result in (max_product_r2(problem), brute_oracle(problem), max_product_general(problem)):
        assert result.product == 9 and result.optimal
        assert result.witnesses == (Family.full(problem.spaces[0]), Family.full(problem.spaces[1]))
    assert problem.star_product() == 4


def test_p13_squared_full_agreement():
    problem = SearchProblem.of([(1, 3), (1, 3)], 3)
    assert naive_max_product([(1, 3), (1, 3)], 3) == 1
    assert max_product_r2(problem).product == 1
    assert brute_oracle(problem).product == 1


@pytest.mark.parametrize("n2", [0, 1, 2, 3])
@pytest.mark.parametrize("t", [1, 2])
def test_zero_space_pairs_with_its_compat_set(n2, t):
    problem = SearchProblem.of([(0, 4), (n2, 4)], t)
    zero = Family.full(problem.spaces[0])
    expected = compat_set(problem.spaces, 1, [zero, None], t).size
    assert brute_oracle(problem).product == expected
    assert max_product_r2(problem).product == expected


@pytest.mark.parametrize("search", [max_product_r2, brute_oracle, max_product_general])
def test_t_above_l_gives_zero(search):
    problem = SearchProblem.of([(1, 3), (2, 3)], 4)
    result = search(problem)
    assert result.product == 0 and result.optimal
    assert all(f.size == 0 for f in result.witnesses)


@pytest.mark.parametrize(
    "spaces,t",
    [([(1, 3), (1, 3)], 1), ([(2, 2), (2, 2)], 1), ([(2, 3), (1, 3)], 1),
     ([(1, 4), (1, 3)], 2), ([(2, 3), (2, 3)], 1)],
)
def test_r2_against_naive_enumeration(spaces, t):
    problem = SearchProblem.of(spaces, t)
    assert max_product_r2(problem).product == naive_max_product(spaces, t)


def _assert_valid_and_maximal(result: SearchResult, t):
    fams = result.witnesses
    assert is_cross_t_intersecting(FamilySystem(fams, t))[0]
    spaces = [f.space for f in fams]
    for j in range(len(fams)):
        assert compat_set(spaces, j, list(fams), t) == fams[j]
    p = 1
    for f in fams:
        p *= f.size
    assert p == result.product


@pytest.mark.parametrize("seed", range(20))
def test_r2_search_agrees_with_oracle_including_maximizers(seed):
    rng = random.Random(seed)
    t = rng.choice([1, 1, 2])
    shapes = [(n, l) for n in range(0, 4) for l in (3, 4, 5) if P(n, l).cardinality <= 15]
    spaces = [rng.choice(shapes), rng.choice(shapes)]
    problem = SearchProblem.of(spaces, t)
    fast = max_product_r2(problem, all_maximizers=True)
    slow = brute_oracle(problem, all_maximizers=True)
    assert fast.product == slow.product
    assert fast.all_maximizers == slow.all_maximizers
    assert fast.witnesses == slow.witnesses
    if fast.product:
        _assert_valid_and_maximal(fast, t)
        assert fast.product >= problem.star_product()


def test_r2_workers_do_not_change_the_result():
    problem = SearchProblem.of([(5, 3), (4, 4)], 1)
    serial = max_product_r2(problem, all_maximizers=True)
    parallel = max_product_r2(problem, all_maximizers=True, workers=2)
    assert dumps(result_to_json(serial)) == dumps(result_to_json(parallel))
    assert dumps(result_to_json(serial)) == dumps(result_to_json(max_product_r2(problem, True)))


def test_r2_budget_exhaustion_is_not_optimal():
    problem = SearchProblem.of([(6, 4), (6, 4)], 1, node_budget=5)
    result = max_product_r2(problem)
    assert not result.optimal
    assert result.product >= problem.star_product()


def test_r2_rejects_three_spaces():
    with pytest.raises(ValueError):
        max_product_r2(SearchProblem.of([(1, 3)] * 3, 1))


# ---------------------------------------------------------------- general search


def test_general_r3_p13_cubed():
    spaces = [(1, 3)] * 3
    expected = naive_max_product(spaces, 1)
    assert expected < 27  # (1,0,0),(0,1,0),(0,0,1) share no coordinate
    problem = SearchProblem.of(spaces, 1)
    assert max_product_general(problem).product == expected
    assert brute_oracle(problem).product == expected


def test_general_r3_stars_are_feasible():
    problem = SearchProblem.of([(2, 3)] * 3, 1)
    assert problem.star_product() == 27
    assert max_product_general(problem).product >= 27


@pytest.mark.parametrize(
    "spaces,t",
    [([(1, 3), (2, 3), (1, 4)], 1), ([(1, 4)] * 3, 2), ([(2, 3)] * 3, 1),
     ([(1, 3), (0, 3), (2, 3)], 1), ([(1, 3)] * 4, 1), ([(1, 4), (1, 4), (2, 4)], 2)],
)
def test_general_against_oracle(spaces, t):
    problem = SearchProblem.of(spaces, t)
    fast = max_product_general(problem, all_maximizers=True)
    slow = brute_oracle(problem, all_maximizers=True)
    assert fast.optimal
    assert fast.product == slow.product
    assert fast.all_maximizers == slow.all_maximizers
    if fast.product:
        _assert_valid_and_maximal(fast, t)


def test_general_r3_small_against_naive():
    spaces = [(1, 3), (1, 3), (0, 3)]
    assert max_product_general(SearchProblem.of(spaces, 1)).product == naive_max_product(spaces, 1)


@pytest.mark.parametrize("spaces,t", [([(3, 3), (3, 3)], 1), ([(2, 4), (3, 4)], 2), ([(4, 3), (1, 5)], 1)])
def test_general_equals_r2(spaces, t):
    problem = SearchProblem.of(spaces, t)
    a, b = max_product_r2(problem), max_product_general(problem)
    assert a.product == b.product
    assert a.witnesses == b.witnesses


def test_general_beyond_micro_limits_is_heuristic():
    problem = SearchProblem.of([(4, 3)] * 3, 1)
    assert not problem.within_limits()
    result = max_product_general(problem)
    assert not result.optimal
    assert result.product >= problem.star_product()


def test_oracle_limits():
    with pytest.raises(ValueError):
        brute_oracle(SearchProblem.of([(4, 3)] * 3, 1))
    with pytest.raises(ValueError):
        brute_oracle(SearchProblem.of([(5, 3), (1, 3)], 1))
    brute_oracle(SearchProblem.of([(1, 3), (5, 3)], 1))
    custom = SearchProblem.of([(3, 3), (1, 3)], 1, micro_limits=(5,))
    with pytest.raises(ValueError):
        brute_oracle(custom)


def test_searches_are_deterministic():
    problem = SearchProblem.of([(2, 3), (2, 3), (1, 4)], 1)
    first = dumps(result_to_json(max_product_general(problem, True)))
    assert first == dumps(result_to_json(max_product_general(problem, True)))


# ---------------------------------------------------------------- extremal structure


def test_verify_extremal_on_stars():
    problem = SearchProblem.of([(6, 3), (6, 3)], 1)
    result = max_product_r2(problem, all_maximizers=True)
    report = verify_extremal(result, 1)
    assert report.is_star and report.unique
    # star {1} holds the lowest ranks, (0,0,6), (0,1,5), ...
    assert report.T_observed == (frozenset({1}), frozenset({2}), frozenset({3}))


def test_verify_extremal_full_pair_is_not_a_star():
    result = brute_oracle(SearchProblem.of([(1, 3), (1, 3)], 1), all_maximizers=True)
    report = verify_extremal(result, 1)
    assert not report.is_star and not report.unique
    assert report.T_observed == (None,)


def test_verify_extremal_empty_witness_is_not_a_star():
    result = max_product_r2(SearchProblem.of([(1, 3), (1, 3)], 4), all_maximizers=True)
    assert not verify_extremal(result, 4).is_star


def test_verify_extremal_requires_optimal_and_maximizers():
    problem = SearchProblem.of([(6, 4), (6, 4)], 1, node_budget=5)
    with pytest.raises(ValueError):
        verify_extremal(max_product_r2(problem, all_maximizers=True), 1)
    with pytest.raises(ValueError):
        verify_extremal(max_product_r2(SearchProblem.of([(2, 3), (2, 3)], 1)), 1)


def test_verify_extremal_declared_star_set():
    spaces = (P(3, 3), P(3, 3))
    systems = [tuple(make_star(s, [i]) for s in spaces) for i in (1, 2, 3)]
    result = SearchResult(16, systems[0], True, 0, systems)
    report = verify_extremal(result, 1)
    assert report.is_star and report.unique
    partial = SearchResult(16, systems[0], True, 0, systems[:2])
    report = verify_extremal(partial, 1)
    assert report.is_star and not report.unique
