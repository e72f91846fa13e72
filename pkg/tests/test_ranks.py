import itertools

import numpy as np
import pytest

from copos.cones import h_membership, q_membership
from copos.graphs import (
    GRAPH_B_MARKED,
    GRAPH_C_MARKED,
    Graph,
    alpha_exact,
    complete,
    cycle,
    disjoint_union,
    empty,
    g_k,
    g_k_labels,
    graph_b,
    graph_c,
    l_k,
    l_k_labels,
    m_matrix,
    path,
    star,
)
from copos.polynomials import HomPoly, multiply, quad_form
from copos.ranks import (
    PreconditionError,
    canonical_hash,
    check_ineq_d,
    find_d,
    multiplier_imax,
    multiplier_theorem,
    rank0_test,
    rank1_sufficient,
    rank_formula_bounds,
    rank_lower_cert,
    rank_lower_search,
    rank_recursive_upper,
    rank_upper_search,
)


def indicator(n, s):
    return np.array([1.0 if i in s else 0.0 for i in range(n)])


def test_check_ineq_d_examples():
    for g in (cycle(5), graph_b(), g_k(2), star(4)):
        assert check_ineq_d(g, np.ones(g.n)).valid
    rep = check_ineq_d(path(3), [0, 1, 0])
    assert not rep.valid and rep.violations == [(1, 0, 2)]
    assert check_ineq_d(graph_b(), indicator(8, GRAPH_B_MARKED)).valid
    with pytest.raises(ValueError):
        check_ineq_d(path(3), [1, -1, 1])


def test_find_d_examples():
    for g in (cycle(6), graph_b(), star(3)):
        d = find_d(g, range(g.n))
        assert d is not None and d.valid and np.all(d.d >= 1 - 1e-9)
    assert find_d(star(3), [0], forced_zero=[1, 2, 3]) is None
    d = find_d(graph_c(), GRAPH_C_MARKED)
    assert d is not None and check_ineq_d(graph_c(), d).valid
    free = find_d(cycle(5))
    assert free is not None and free.valid


def test_rank0_examples():
    assert rank0_test(cycle(4))
    assert not rank0_test(cycle(5))
    assert not rank0_test(graph_b())
    assert rank0_test(Graph(0, frozenset()))


def test_rank1_examples():
    assert rank1_sufficient(graph_b(), GRAPH_B_MARKED) is not None
    assert rank1_sufficient(graph_c(), GRAPH_C_MARKED) is not None
    assert rank1_sufficient(cycle(5), range(5)) is not None
    for k in (1, 2, 3, 4):
        lab = g_k_labels(k)
        s = [lab[f"u{i}"] for i in range(k + 1)] + [lab[f"v{i}"] for i in range(k + 1)]
        rep = rank1_sufficient(g_k(k), s)
        assert rep is not None and rep.bound == 1


def test_rank1_search_mode():
    rep = rank1_sufficient(graph_b())
    assert rep is not None
    assert check_ineq_d(graph_b(), indicator(8, rep.witness["S"])).valid


def test_rank1_rejects_bad_sets():
    # C5 with a single vertex: the other vertices are centres of paths whose ends lie outside S
    assert rank1_sufficient(cycle(5), []) is None
    lab = g_k_labels(2)
    assert rank1_sufficient(g_k(2), [lab["w1"], lab["u0"]]) is None


def test_recursive_upper_examples():
    assert rank_recursive_upper(cycle(5), np.ones(5)).bound == 1
    assert rank_recursive_upper(cycle(6), np.ones(6)).bound == 0
    lab = g_k_labels(2)
    uv = [lab[f"{c}{i}"] for c in "uv" for i in range(3)]
    assert rank_recursive_upper(g_k(2), indicator(8, uv)).bound == 1
    with pytest.raises(PreconditionError):
        rank_recursive_upper(path(3), [0, 1, 0])
    with pytest.raises(PreconditionError):
        rank_recursive_upper(path(3), [0, 0, 0])


def test_formula_bounds_examples():
    by_rule = {r.witness["rule"]: r.bound for r in rank_formula_bounds(cycle(5))}
    assert by_rule == {"general": 12, "imax": 24}
    for n in (2, 4, 7):
        by_rule = {r.witness["rule"]: r.bound for r in rank_formula_bounds(complete(n))}
        assert by_rule == {"general": n + 1, "imax": 1 + 2 * n}
    by_rule = {r.witness["rule"]: r.bound for r in rank_formula_bounds(disjoint_union(cycle(5), cycle(5)))}
    assert by_rule["component_sum"] == 2


def test_lower_cert_examples():
    lab = g_k_labels(3)
    rep = rank_lower_cert(g_k(3), [lab[f"w{i}"] for i in (1, 2, 3)])
    assert rep is not None and rep.bound == 2
    lab = l_k_labels(3)
    rep = rank_lower_cert(l_k(3), [lab[f"s{i}"] for i in (1, 2, 3)])
    assert rep is not None and rep.bound == 2
    assert rank_lower_cert(cycle(4), [0, 2]) is None
    with pytest.raises(ValueError):
        rank_lower_cert(cycle(4), [0, 1])
    assert rank_lower_cert(cycle(4), [0]).bound == 0


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lower_cert_g_k(k):
    lab = g_k_labels(k)
    rep = rank_lower_cert(g_k(k), [lab[f"w{i}"] for i in range(1, k + 1)])
    assert rep is not None and rep.bound == k - 1


def test_lower_cert_cross_check_g3():
    # the certificate says nu-rank(G_3) >= 2, so level 1 must fail at t = alpha
    g = g_k(3)
    assert q_membership(m_matrix(g, alpha_exact(g)), 1).status == "not_member"


def test_lower_search_examples():
    assert rank_lower_search(g_k(3)).bound == 2
    assert rank_lower_search(cycle(4)).bound == 0
    assert rank_lower_search(complete(4)).bound == 0
    assert rank_lower_search(cycle(5)).bound in (0, 1)


def test_multiplier_theorem_examples():
    assert multiplier_theorem(complete(1), [1.0]) == HomPoly.linear([1.0])
    p = multiplier_theorem(cycle(5), np.ones(5))
    assert p.degree == 6
    # (sum x_i) * prod_i (x_{i+2} + x_{i+3})
    expected = HomPoly.linear([1.0] * 5)
    for i in range(5):
        c = [0.0] * 5
        c[(i + 2) % 5] = c[(i + 3) % 5] = 1.0
        expected = multiply(expected, HomPoly.linear(c))
    assert p == expected
    lab = g_k_labels(1)
    order = [lab[x] for x in ("u0", "v1", "w1", "u1", "v0")]
    q = multiplier_theorem(g_k(1), np.ones(5))
    # relabel G_1 onto the cycle numbering
    relabelled = HomPoly(5, q.degree, {tuple(m[order[j]] for j in range(5)): c for m, c in q.terms.items()})
    assert relabelled == expected


def test_multiplier_theorem_certifies_c5():
    g = cycle(5)
    p = multiplier_theorem(g, np.ones(5))
    assert h_membership(multiply(p, quad_form(m_matrix(g))), p.degree).member


def test_multiplier_theorem_precondition():
    with pytest.raises(PreconditionError):
        multiplier_theorem(path(3), [0, 1, 0])


def _iso_classes(n):
    pairs = list(itertools.combinations(range(n), 2))
    seen, out = set(), []
    perms = list(itertools.permutations(range(n)))
    for mask in range(1 << len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        key = min(tuple(sorted(tuple(sorted((p[i], p[j]))) for i, j in edges)) for p in perms)
        if key not in seen:
            seen.add(key)
            out.append(Graph(n, frozenset(edges)))
    return out


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_multiplier_theorem_small_graphs(n):
    checked = 0
    for g in _iso_classes(n):
        if alpha_exact(g) > 2:
            continue
        try:
            p = multiplier_theorem(g, np.ones(n))
        except PreconditionError:
            continue
        assert h_membership(multiply(p, quad_form(m_matrix(g))), p.degree).member, g
        checked += 1
    assert checked > 0


def test_multiplier_imax_examples():
    k2 = multiplier_imax(complete(2))
    assert (k2.degree, k2.formula_degree, k2.verified) == (3, 5, True)
    k1 = multiplier_imax(empty(1))
    assert k1.poly == HomPoly(1, k1.degree, {(k1.degree,): 1.0})
    c5 = multiplier_imax(cycle(5), verify=False)
    assert c5.formula_degree == 24
    assert c5.verified is None


def test_upper_search():
    assert rank_upper_search(cycle(4)).bound == 0
    assert rank_upper_search(cycle(5)).bound == 1
    assert rank_upper_search(graph_b()).bound == 1


def test_canonical_hash_relabel_invariant():
    g = cycle(6)
    h = Graph(6, frozenset(tuple(sorted(((i + 2) % 6, (j + 2) % 6))) for i, j in g.edges))
    assert canonical_hash(g) == canonical_hash(h)
    assert canonical_hash(cycle(6)) != canonical_hash(path(6))
