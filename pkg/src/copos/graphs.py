"""Immutable simple graphs and the exact combinatorics the bounds rely on.

Vertex sets are handled internally as Python int bitmasks. Everything here is
exact and exponential in the worst case, so enumeration is capped by
``MAX_VERTICES``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

MAX_VERTICES = 64


class ResourceCapError(RuntimeError):
    """Raised when an exact enumeration would exceed the configured size cap."""


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    name: str = ""

    def __post_init__(self) -> None:
        clean = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge {(i, j)} out of range for n={self.n}")
            clean.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(clean))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        label = f"{self.name}: " if self.name else ""
        return f"Graph({label}n={self.n}, m={len(self.edges)})"

    @cached_property
    def nbr(self) -> tuple[int, ...]:
        """Neighbourhood bitmask of every vertex."""
        out = [0] * self.n
        for i, j in self.edges:
            out[i] |= 1 << j
            out[j] |= 1 << i
        return tuple(out)

    @property
    def vertices(self) -> range:
        return range(self.n)

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.nbr[i] >> j & 1)

    def neighbors(self, i: int) -> list[int]:
        return list(_bits(self.nbr[i]))

    def degree(self, i: int) -> int:
        return self.nbr[i].bit_count()

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def is_stable(self, s: Iterable[int]) -> bool:
        s = list(s)
        return all(not self.adjacent(i, j) for i, j in itertools.combinations(s, 2))

    def is_clique(self, s: Iterable[int]) -> bool:
        s = list(s)
        return all(self.adjacent(i, j) for i, j in itertools.combinations(s, 2))

    def induced(self, keep: Iterable[int], name: str = "") -> Graph:
        """Induced subgraph on ``keep``, relabelled 0.. in increasing order."""
        keep = sorted(set(keep))
        pos = {v: k for k, v in enumerate(keep)}
        es = {(pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos}
        return Graph(len(keep), frozenset(es), name)

    def remove(self, drop: Iterable[int]) -> Graph:
        drop = set(drop)
        return self.induced([v for v in self.vertices if v not in drop])

    def without_edge(self, e: tuple[int, int]) -> Graph:
        e = (min(e), max(e))
        return Graph(self.n, self.edges - {e})

    def complement(self) -> Graph:
        es = {(i, j) for i, j in itertools.combinations(range(self.n), 2) if not self.adjacent(i, j)}
        return Graph(self.n, frozenset(es))

    def components(self) -> list[list[int]]:
        seen = 0
        comps = []
        for v in self.vertices:
            if seen >> v & 1:
                continue
            comp = 1 << v
            frontier = comp
            while frontier:
                nxt = 0
                for u in _bits(frontier):
                    nxt |= self.nbr[u]
                nxt &= ~comp
                comp |= nxt
                frontier = nxt
            seen |= comp
            comps.append(sorted(_bits(comp)))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    @cached_property
    def alpha(self) -> int:
        return alpha_exact(self)


def _check_cap(g: Graph, cap: int | None) -> None:
    cap = MAX_VERTICES if cap is None else cap
    if g.n > cap:
        raise ResourceCapError(f"graph has {g.n} vertices; exact enumeration capped at {cap}")


def _greedy_clique_cover(g: Graph, cand: int) -> int:
    """Number of cliques in a greedy clique partition of ``cand`` (upper bound on alpha)."""
    count = 0
    while cand:
        v = (cand & -cand).bit_length() - 1
        clique_pool = cand & g.nbr[v]
        cand &= ~(1 << v)
        while clique_pool:
            u = (clique_pool & -clique_pool).bit_length() - 1
            cand &= ~(1 << u)
            clique_pool &= g.nbr[u]
        count += 1
    return count


def _max_stable(g: Graph, cand: int, best: list[int], chosen: int, size: int) -> None:
    if not cand:
        if size > best[0]:
            best[0], best[1] = size, chosen
        return
    if size + _greedy_clique_cover(g, cand) <= best[0]:
        return
    branch, branch_deg = -1, -1
    for v in _bits(cand):
        deg = (g.nbr[v] & cand).bit_count()
        if deg <= 1:
            # some maximum stable set of G[cand] contains v
            _max_stable(g, cand & ~g.nbr[v] & ~(1 << v), best, chosen | 1 << v, size + 1)
            return
        if deg > branch_deg:
            branch, branch_deg = v, deg
    v = branch
    _max_stable(g, cand & ~g.nbr[v] & ~(1 << v), best, chosen | 1 << v, size + 1)
    _max_stable(g, cand & ~(1 << v), best, chosen, size)


def max_stable_set(g: Graph, cap: int | None = None) -> list[int]:
    _check_cap(g, cap)
    best = [0, 0]
    _max_stable(g, (1 << g.n) - 1, best, 0, 0)
    return sorted(_bits(best[1]))


def alpha_exact(g: Graph, cap: int | None = None) -> int:
    """Stability number by branch and bound with greedy clique-cover pruning."""
    if "alpha" in g.__dict__:
        return g.__dict__["alpha"]
    return len(max_stable_set(g, cap))


@dataclass(frozen=True)
class StableSetFamily:
    all: list[frozenset[int]]
    alpha: int
    maximal_only: bool = False


StableMode = Literal["all_up_to_alpha", "strictly_below_alpha", "maximum_only"]


def _all_stable(g: Graph, max_size: int) -> list[frozenset[int]]:
    out: list[frozenset[int]] = []

    def rec(cand: int, chosen: list[int]) -> None:
        out.append(frozenset(chosen))
        if len(chosen) == max_size:
            return
        for v in _bits(cand):
            # only extend with larger labels to enumerate each set once
            rec(cand & ~g.nbr[v] & ~((1 << (v + 1)) - 1), chosen + [v])

    rec((1 << g.n) - 1, [])
    return out


def stable_sets(g: Graph, mode: StableMode = "all_up_to_alpha", cap: int | None = None) -> StableSetFamily:
    """Complete enumeration of stable sets; the empty set counts as stable."""
    _check_cap(g, cap)
    a = g.alpha
    sets = _all_stable(g, a)
    if mode == "all_up_to_alpha":
        chosen = sets
    elif mode == "strictly_below_alpha":
        chosen = [s for s in sets if len(s) < a]
    elif mode == "maximum_only":
        chosen = [s for s in sets if len(s) == a]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    chosen.sort(key=lambda s: (len(s), sorted(s)))
    return StableSetFamily(chosen, a, mode == "maximum_only")


def extended_neighborhood(g: Graph, s: Iterable[int]) -> frozenset[int]:
    m = 0
    for v in s:
        m |= 1 << v | g.nbr[v]
    return frozenset(_bits(m))


def local_graph(g: Graph, i: int) -> Graph:
    """``(G minus i-perp)`` disjoint union a clique on ``i-perp``, same labels."""
    ip = extended_neighborhood(g, [i])
    es = {(a, b) for a, b in g.edges if a not in ip and b not in ip}
    es |= {(a, b) for a, b in itertools.combinations(sorted(ip), 2)}
    return Graph(g.n, frozenset(es))


def critical_edges(g: Graph, cap: int | None = None) -> list[tuple[int, int]]:
    _check_cap(g, cap)
    a = g.alpha
    return sorted(e for e in g.edges if alpha_exact(g.without_edge(e)) == a + 1)


def critical_subgraph_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return Graph(g.n, frozenset(critical_edges(g))).is_connected()


def m_matrix(g: Graph, t: float | None = None) -> np.ndarray:
    """``t (A_G + I) - J``; ``t`` defaults to the stability number."""
    if g.n < 1:
        raise ValueError("graph matrix needs at least one vertex")
    t = g.alpha if t is None else t
    return t * (g.adjacency() + np.eye(g.n)) - np.ones((g.n, g.n))


def clique_cover_number(g: Graph, cap: int | None = None) -> int:
    """Minimum number of cliques partitioning V (colouring of the complement)."""
    _check_cap(g, cap)
    if g.n == 0:
        return 0
    order = sorted(g.vertices, key=lambda v: -g.degree(v))

    def fits(k: int) -> bool:
        classes: list[int] = []

        def place(idx: int) -> bool:
            if idx == len(order):
                return True
            v = order[idx]
            for c in range(len(classes)):
                if classes[c] & ~g.nbr[v] == 0:
                    classes[c] |= 1 << v
                    if place(idx + 1):
                        return True
                    classes[c] &= ~(1 << v)
            if len(classes) < k:
                classes.append(1 << v)
                if place(idx + 1):
                    return True
                classes.pop()
            return False

        return place(0)

    k = max(g.alpha, 1)
    while not fits(k):
        k += 1
    return k


# graph families


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)), f"C{n}")


def complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("n must be positive")
    return Graph(n, frozenset(itertools.combinations(range(n), 2)), f"K{n}")


def empty(n: int) -> Graph:
    return Graph(n, frozenset(), f"E{n}")


def path(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)), f"P{n}")


def complete_bipartite(a: int, b: int) -> Graph:
    if a < 1 or b < 1:
        raise ValueError("parts must be non-empty")
    es = {(i, a + j) for i in range(a) for j in range(b)}
    return Graph(a + b, frozenset(es), f"K{a},{b}")


def star(n: int) -> Graph:
    """Centre 0 joined to leaves 1..n."""
    if n < 1:
        raise ValueError("a star needs at least one leaf")
    return Graph(n + 1, frozenset((0, i) for i in range(1, n + 1)), f"T{n}")


# read from the drawn figures: an 8-cycle 0..7 with two chords
GRAPH_B_EDGES = [(i, (i + 1) % 8) for i in range(8)] + [(1, 3), (2, 6)]
GRAPH_C_EDGES = [(i, (i + 1) % 8) for i in range(8)] + [(1, 5), (2, 6)]
GRAPH_B_MARKED = (1, 2, 3, 5, 6, 7)
GRAPH_C_MARKED = (1, 2, 5, 6)

# 1-indexed edge list of the icosahedron figure
_ICOSAHEDRON_EDGES_1 = [
    (1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9), (9, 4), (5, 2),
    (4, 2), (6, 2), (4, 1), (1, 9), (1, 8), (8, 3), (7, 3), (6, 3), (10, 11), (11, 12),
    (12, 10), (10, 5), (5, 11), (10, 4), (10, 9), (12, 9), (12, 8), (7, 12), (7, 11), (11, 6),
]


def graph_b() -> Graph:
    return Graph(8, frozenset(GRAPH_B_EDGES), "B")


def graph_c() -> Graph:
    return Graph(8, frozenset(GRAPH_C_EDGES), "C")


def icosahedron() -> Graph:
    return Graph(12, frozenset((i - 1, j - 1) for i, j in _ICOSAHEDRON_EDGES_1), "icosahedron")


def g_k_labels(k: int) -> dict[str, int]:
    """Labels of ``G_k``: u_0..u_k, then v_0..v_k, then w_1..w_k."""
    labels = {}
    for i in range(k + 1):
        labels[f"u{i}"] = i
        labels[f"v{i}"] = k + 1 + i
    for i in range(1, k + 1):
        labels[f"w{i}"] = 2 * (k + 1) + i - 1
    return labels


def g_k(k: int) -> Graph:
    """K_{k+1,k+1} with each edge u_i v_i (i >= 1) subdivided by w_i."""
    if k < 1:
        raise ValueError("k must be at least 1")
    lab = g_k_labels(k)
    es = set()
    for i in range(k + 1):
        for j in range(k + 1):
            if i == j and i >= 1:
                continue
            es.add((lab[f"u{i}"], lab[f"v{j}"]))
    for i in range(1, k + 1):
        es.add((lab[f"u{i}"], lab[f"w{i}"]))
        es.add((lab[f"v{i}"], lab[f"w{i}"]))
    return Graph(3 * k + 2, frozenset(es), f"G_{k}")


def l_k_labels(k: int) -> dict[str, int]:
    """Labels of ``L_k``: s1..sk, then a_ij, b_ij, c_ij for each pair i<j in lex order."""
    labels = {f"s{i}": i - 1 for i in range(1, k + 1)}
    nxt = k
    for i, j in itertools.combinations(range(1, k + 1), 2):
        for tag in "abc":
            labels[f"{tag}{i}{j}"] = nxt
            nxt += 1
    return labels


def _l_k_edges(k: int, prime: bool) -> set[tuple[int, int]]:
    lab = l_k_labels(k)
    pairs = list(itertools.combinations(range(1, k + 1), 2))
    es = set()
    for i, j in pairs:
        a, b, c = (lab[f"{t}{i}{j}"] for t in "abc")
        si, sj = lab[f"s{i}"], lab[f"s{j}"]
        es |= {(si, a), (a, b), (b, sj), (sj, c), (c, si)}
    for p, q in itertools.combinations(pairs, 2):
        for t1 in "abc":
            for t2 in "abc":
                if prime and (t1 == "c") != (t2 == "c"):
                    continue
                es.add((lab[f"{t1}{p[0]}{p[1]}"], lab[f"{t2}{q[0]}{q[1]}"]))
    return es


def l_k(k: int) -> Graph:
    """5-cycles s_i a_ij b_ij s_j c_ij per pair, complete bipartite between gadgets."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return Graph(k + 3 * (k * (k - 1) // 2), frozenset(_l_k_edges(k, False)), f"L_{k}")


def l_k_prime(k: int) -> Graph:
    """``L_k`` without the gadget-to-gadget edges between a c-vertex and an a/b-vertex."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return Graph(k + 3 * (k * (k - 1) // 2), frozenset(_l_k_edges(k, True)), f"L'_{k}")


def disjoint_union(g: Graph, h: Graph) -> Graph:
    es = set(g.edges) | {(i + g.n, j + g.n) for i, j in h.edges}
    name = f"{g.name}+{h.name}" if g.name and h.name else ""
    return Graph(g.n + h.n, frozenset(es), name)


FAMILIES = {
    "cycle": cycle,
    "complete": complete,
    "empty": empty,
    "path": path,
    "complete_bipartite": complete_bipartite,
    "star": star,
    "graph_B": graph_b,
    "graph_C": graph_c,
    "G_k": g_k,
    "L_k": l_k,
    "L_k_prime": l_k_prime,
    "icosahedron": icosahedron,
}


def generate_family(family: str, *params) -> Graph:
    if family == "disjoint_union":
        return disjoint_union(*params)
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None
    return builder(*(int(p) for p in params))
