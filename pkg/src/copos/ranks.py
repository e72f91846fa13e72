"""Upper and lower bounds on the nu-rank and nu-tilde-rank of a graph.

Upper bounds come from feasibility at ``t = alpha + eps`` (so "rank <= r" is
meant at precision ``eps``) and from the recursive and closed-form bounds
built on the inequalities ``d_j + d_k >= d_i``. Lower bounds come from the
critical-edge certificate on a stable set.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal

import numpy as np

from .conic import solve_inequality_lp
from .cones import h_membership, q0_split
from .graphs import (
    Graph,
    alpha_exact,
    clique_cover_number,
    critical_subgraph_connected,
    extended_neighborhood,
    m_matrix,
    stable_sets,
)
from .polynomials import HomPoly, multiply, product, quad_form

RANK_EPS = 1e-3
IMAX_VERIFY_DEGREE_CAP = 8


class PreconditionError(ValueError):
    pass


@dataclass
class RankReport:
    kind: Literal["lower", "upper"]
    bound: int
    witness: dict = field(default_factory=dict)
    verified: bool = True

    def to_json(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "verified": self.verified, "witness": _jsonable(self.witness)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{obj:.12g}")
    return obj


@dataclass
class DVector:
    d: np.ndarray
    valid: bool

    def support(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.d > 0))


def _as_array(d, n: int) -> np.ndarray:
    arr = np.asarray(d.d if isinstance(d, DVector) else d, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"d has shape {arr.shape}, expected ({n},)")
    if np.any(arr < 0):
        raise ValueError("d must be nonnegative")
    return arr


def without_neighborhood(g: Graph, s: Iterable[int]) -> Graph:
    """``G minus S^perp``, relabelled."""
    return g.remove(extended_neighborhood(g, s))


# inequalities on d


@dataclass
class IneqDReport:
    valid: bool
    violations: list[tuple[int, int, int]]


def induced_paths(g: Graph) -> list[tuple[int, int, int]]:
    """Triples ``(i, j, k)`` with ``j < k`` adjacent to ``i`` and ``j, k`` non-adjacent."""
    out = []
    for i in range(g.n):
        nb = g.neighbors(i)
        for j, k in itertools.combinations(nb, 2):
            if not g.adjacent(j, k):
                out.append((i, j, k))
    return out


def check_ineq_d(g: Graph, d, tol: float = 1e-12) -> IneqDReport:
    arr = _as_array(d, g.n)
    bad = [(i, j, k) for i, j, k in induced_paths(g) if arr[j] + arr[k] < arr[i] - tol]
    return IneqDReport(not bad, bad)


def find_d(
    g: Graph,
    target_support: Iterable[int] | None = None,
    forced_zero: Iterable[int] = (),
) -> DVector | None:
    """LP search for a ``d`` satisfying the path inequalities.

    With a target, ``d_i >= 1`` there and the total weight is minimised;
    without one, ``sum min(d_i, 1)`` is maximised.
    """
    n = g.n
    if n == 0:
        return None
    zero = set(forced_zero)
    paths = induced_paths(g)
    if target_support is not None:
        target = set(target_support)
        if target & zero:
            return None
        a_ub = np.zeros((len(paths), n))
        for row, (i, j, k) in enumerate(paths):
            a_ub[row, i], a_ub[row, j], a_ub[row, k] = 1.0, -1.0, -1.0
        bounds = [(0.0, 0.0) if i in zero else ((1.0, None) if i in target else (0.0, None)) for i in range(n)]
        x = solve_inequality_lp(np.ones(n), a_ub, np.zeros(len(paths)), bounds)
        if x is None:
            return None
        d = np.where(x > 1e-9, x, 0.0)
    else:
        # variables (d, u): maximise sum u with u <= d, u <= 1
        a_ub = np.zeros((len(paths) + n, 2 * n))
        for row, (i, j, k) in enumerate(paths):
            a_ub[row, i], a_ub[row, j], a_ub[row, k] = 1.0, -1.0, -1.0
        for i in range(n):
            a_ub[len(paths) + i, n + i], a_ub[len(paths) + i, i] = 1.0, -1.0
        bounds = [(0.0, 0.0) if i in zero else (0.0, None) for i in range(n)] + [(0.0, 1.0)] * n
        c = np.concatenate([np.zeros(n), -np.ones(n)])
        x = solve_inequality_lp(c, a_ub, np.zeros(len(a_ub)), bounds)
        if x is None or -(c @ x) <= 1e-9:
            return None
        d = np.where(x[:n] > 1e-9, x[:n], 0.0)
    report = check_ineq_d(g, d, tol=1e-9)
    return DVector(d, report.valid) if report.valid else None


# rank 0 and rank 1


@lru_cache(maxsize=4096)
def _rank0(g: Graph, eps: float) -> bool:
    if g.n == 0:
        return True
    a = g.alpha
    if clique_cover_number(g) == a:
        return True
    _, _, verdict = q0_split(m_matrix(g, a + eps))
    return verdict.member


def rank0_test(g: Graph, eps: float = RANK_EPS) -> bool:
    """``M_G`` (at ``t = alpha + eps``) splits as psd plus nonnegative."""
    return _rank0(g, eps)


def rank1_sufficient(g: Graph, s: Iterable[int] | None = None, eps: float = RANK_EPS) -> RankReport | None:
    """Sufficient test for nu-tilde-rank <= 1 through a vertex set ``S``.

    (i) every ``G minus i^perp`` with ``i`` in ``S`` has rank 0, and
    (ii) no vertex of ``S`` is the centre of an induced path whose ends lie
    outside ``S``. With ``s=None`` a set is searched for greedily.
    """
    n = g.n
    if s is not None:
        s = frozenset(s)
        if not s or not all(0 <= i < n for i in s):
            return None
        if not all(rank0_test(without_neighborhood(g, [i]), eps) for i in s):
            return None
        chi = np.array([1.0 if i in s else 0.0 for i in range(n)])
        if not check_ineq_d(g, chi).valid:
            return None
        return RankReport("upper", 1, {"rule": "rank1_sufficient", "S": sorted(s), "eps": eps})

    cand = {i for i in range(n) if rank0_test(without_neighborhood(g, [i]), eps)}
    while cand:
        chi = np.array([1.0 if i in cand else 0.0 for i in range(n)])
        bad = check_ineq_d(g, chi).violations
        if not bad:
            return RankReport("upper", 1, {"rule": "rank1_sufficient", "S": sorted(cand), "eps": eps})
        counts: dict[int, int] = {}
        for i, _, _ in bad:
            counts[i] = counts.get(i, 0) + 1
        worst = max(sorted(counts), key=lambda v: counts[v])
        cand.discard(worst)
    return None


# recursion


def canonical_hash(g: Graph, rounds: int = 3) -> str:
    """Colour-refinement hash: equal for isomorphic graphs, rarely equal otherwise."""
    colors = [g.degree(i) for i in range(g.n)]
    for _ in range(rounds):
        sig = [(colors[i], tuple(sorted(colors[j] for j in g.neighbors(i)))) for i in range(g.n)]
        palette = {s: k for k, s in enumerate(sorted(set(sig)))}
        colors = [palette[s] for s in sig]
    summary = (g.n, len(g.edges), tuple(sorted(colors)), tuple(sorted(sig for sig in _edge_colors(g, colors))))
    return hashlib.sha1(repr(summary).encode()).hexdigest()


def _edge_colors(g: Graph, colors: list[int]):
    for i, j in g.edges:
        yield tuple(sorted((colors[i], colors[j])))


class _Memo:
    """Rank bounds keyed by a refinement hash, confirmed by exact edge-set equality."""

    def __init__(self) -> None:
        self.table: dict[str, list[tuple[Graph, int, dict]]] = {}

    def get(self, g: Graph):
        for h, bound, tree in self.table.get(canonical_hash(g), []):
            if h == g:
                return bound, tree
        return None

    def put(self, g: Graph, bound: int, tree: dict) -> None:
        self.table.setdefault(canonical_hash(g), []).append((g, bound, tree))


def _rank_upper(g: Graph, memo: _Memo, eps: float, depth: int = 0) -> tuple[int, dict]:
    hit = memo.get(g)
    if hit is not None:
        return hit
    if rank0_test(g, eps):
        out = (0, {"n": g.n, "rule": "rank0"})
    elif (rep := rank1_sufficient(g, None, eps)) is not None:
        out = (1, {"n": g.n, "rule": "rank1_sufficient", "S": rep.witness["S"]})
    else:
        out = _recurse(g, np.ones(g.n), memo, eps, depth)
    memo.put(g, *out)
    return out


def _recurse(g: Graph, d: np.ndarray, memo: _Memo, eps: float, depth: int) -> tuple[int, dict]:
    children = []
    total = 1
    for i in np.flatnonzero(d > 0):
        sub = without_neighborhood(g, [int(i)])
        b, tree = _rank_upper(sub, memo, eps, depth + 1)
        total += b
        children.append({"vertex": int(i), "bound": b, "subtree": tree})
    return total, {"n": g.n, "rule": "recursive", "children": children}


def rank_recursive_upper(g: Graph, d, eps: float = RANK_EPS) -> RankReport:
    """``1 + sum_{d_i > 0} rank(G minus i^perp)`` with the sub-ranks bounded recursively."""
    arr = _as_array(d, g.n)
    if not np.any(arr > 0):
        raise PreconditionError("d must be nonzero")
    rep = check_ineq_d(g, arr)
    if not rep.valid:
        raise PreconditionError(f"d violates the path inequalities at {rep.violations[:5]}")
    if rank0_test(g, eps):
        return RankReport("upper", 0, {"rule": "rank0", "eps": eps})
    bound, tree = _recurse(g, arr, _Memo(), eps, 0)
    return RankReport("upper", bound, {"rule": "recursive", "d": arr, "tree": tree, "eps": eps})


# closed forms


def rank_formula_bounds(g: Graph, eps: float = RANK_EPS) -> list[RankReport]:
    if g.n == 0:
        return [RankReport("upper", 0, {"rule": "empty"})]
    a = g.alpha
    n_max = len(stable_sets(g, "maximum_only").all)
    out = [
        RankReport("upper", math.floor((g.n / a + 1) ** a), {"rule": "general", "n": g.n, "alpha": a}),
        RankReport("upper", a * a + 2**a * n_max, {"rule": "imax", "alpha": a, "imax": n_max}),
    ]
    comps = g.components()
    if len(comps) > 1:
        parts = []
        for comp in comps:
            h = g.induced(comp)
            parts.append(_component_bound(h, eps))
        out.append(RankReport("upper", sum(parts), {"rule": "component_sum", "components": [
            {"vertices": c, "bound": b} for c, b in zip(comps, parts)]}))
    return out


def _component_bound(h: Graph, eps: float) -> int:
    if rank0_test(h, eps):
        return 0
    if rank1_sufficient(h, None, eps) is not None:
        return 1
    a = h.alpha
    n_max = len(stable_sets(h, "maximum_only").all)
    return min(math.floor((h.n / a + 1) ** a), a * a + 2**a * n_max)


# lower bounds


def rank_lower_cert(g: Graph, s: Iterable[int]) -> RankReport | None:
    """nu-rank >= |S| - 1 when both conditions on ``S`` hold, else ``None``.

    (i) ``alpha(G minus S^perp) = alpha(G) - |S|``; (ii) the critical-edge
    graph of ``G minus S'^perp`` is connected for every ``S'`` in ``S`` of
    size ``|S| - 2``.
    """
    s = frozenset(s)
    if not g.is_stable(s):
        raise ValueError(f"{sorted(s)} is not a stable set")
    if len(s) <= 1:
        return RankReport("lower", 0, {"rule": "trivial", "S": sorted(s)})
    rest = without_neighborhood(g, s)
    if rest.alpha != g.alpha - len(s):
        return None
    checked = []
    for sub in itertools.combinations(sorted(s), len(s) - 2):
        h = without_neighborhood(g, sub)
        if not critical_subgraph_connected(h):
            return None
        checked.append(list(sub))
    return RankReport("lower", len(s) - 1, {"rule": "critical_edges", "S": sorted(s), "checked": checked})


def rank_lower_search(g: Graph, size_cap: int | None = None) -> RankReport:
    """Best certificate over all stable sets up to ``size_cap``, largest first."""
    a = g.alpha
    cap = a if size_cap is None else min(size_cap, a)
    family = stable_sets(g, "all_up_to_alpha").all
    for size in range(cap, 1, -1):
        for s in sorted((x for x in family if len(x) == size), key=sorted):
            rep = rank_lower_cert(g, s)
            if rep is not None:
                return rep
    return RankReport("lower", 0, {"rule": "none_found", "size_cap": cap})


# multipliers


def m_s(g: Graph, s: Iterable[int], d: np.ndarray) -> HomPoly:
    """``sum_{i outside S^perp} d_i x_i``, or the constant 1 when ``S^perp`` is everything."""
    perp = extended_neighborhood(g, s)
    coeffs = [0.0 if i in perp else float(d[i]) for i in range(g.n)]
    if not any(coeffs):
        return HomPoly.constant(g.n)
    return HomPoly.linear(coeffs)


def multiplier_theorem(g: Graph, d, eps: float = RANK_EPS) -> HomPoly:
    """``prod_{S in I^-(G[supp d])} m_{S,d}``, after checking the hypotheses."""
    arr = _as_array(d, g.n)
    supp = frozenset(int(i) for i in np.flatnonzero(arr > 0))
    if not supp:
        raise PreconditionError("d must be nonzero")
    rep = check_ineq_d(g, arr)
    if not rep.valid:
        raise PreconditionError(f"d violates the path inequalities at {rep.violations[:5]}")
    family = stable_sets(g, "all_up_to_alpha").all
    for s in family:
        if supp <= extended_neighborhood(g, s) and not rank0_test(without_neighborhood(g, s), eps):
            raise PreconditionError(f"G minus the neighbourhood of {sorted(s)} is not rank 0")
    inside = [s for s in family if s <= supp]
    a_d = max(len(s) for s in inside)
    factors = [m_s(g, s, arr) for s in sorted((s for s in inside if len(s) < a_d), key=lambda x: (len(x), sorted(x)))]
    return product(factors, g.n)


@dataclass
class ImaxMultiplier:
    poly: HomPoly
    degree: int
    formula_degree: int
    verified: bool | None


def multiplier_imax(g: Graph, verify: bool = True) -> ImaxMultiplier:
    """``m_empty^(alpha^2) prod_{U max} prod_{S in U} m_S`` with unit weights.

    Factors with ``S^perp = V`` are the constant 1, so the actual degree can
    be below ``alpha^2 + 2^alpha |I^max|``; both are reported. The product is
    checked by an SDP only when its degree is at most 8.
    """
    if g.n == 0:
        raise ValueError("graph has no vertices")
    a = g.alpha
    ones = np.ones(g.n)
    maxima = stable_sets(g, "maximum_only").all
    factors = [m_s(g, (), ones)] * (a * a)
    for u in sorted(maxima, key=sorted):
        for k in range(len(u) + 1):
            for s in itertools.combinations(sorted(u), k):
                factors.append(m_s(g, s, ones))
    poly = product(factors, g.n)
    verified = None
    if verify and poly.degree <= IMAX_VERIFY_DEGREE_CAP:
        f = multiply(poly, quad_form(m_matrix(g)))
        verified = h_membership(f, poly.degree).member
    return ImaxMultiplier(poly, poly.degree, a * a + 2**a * len(maxima), verified)


def rank_upper_probe(g: Graph, r: int, eps: float = RANK_EPS, tilde: bool = True):
    """Feasibility of ``M_G`` at ``t = alpha + eps`` in Q-tilde^(r) (or Q^(r))."""
    from .cones import q_membership, qtilde_membership

    m = m_matrix(g, g.alpha + eps)
    return qtilde_membership(m, r) if tilde else q_membership(m, r)


def rank_upper_search(g: Graph, max_r: int = 2, eps: float = RANK_EPS) -> RankReport:
    """Cheapest upper bound: combinatorial rules first, then SDP probes up to ``max_r``."""
    if rank0_test(g, eps):
        return RankReport("upper", 0, {"rule": "rank0", "eps": eps})
    rep = rank1_sufficient(g, None, eps)
    if rep is not None:
        return rep
    for r in range(1, max_r + 1):
        v = rank_upper_probe(g, r, eps)
        if v.member:
            return RankReport("upper", r, {"rule": "qtilde_probe", "r": r, "eps": eps})
    best = min(rank_formula_bounds(g, eps), key=lambda x: x.bound)
    return best
