"""Copositivity deciders.

:func:`brute_oracle` works directly on the standard simplex and knows nothing
about the cone hierarchies, which makes it a useful referee for
:func:`cop5_test` (exact on 5x5 through Q-tilde^(1)) and for the Q^(0) split
on 4x4 matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import conic
from .cones import q0_split, qtilde_membership

CopVerdict = Literal["copositive", "not_copositive", "unknown"]

DEFAULT_MARGIN = 1e-6


@dataclass
class OracleResult:
    status: CopVerdict
    witness: np.ndarray | None = None
    value: float | None = None
    simplices: int = 0

    def to_json(self) -> dict:
        out = {"status": self.status, "simplices": self.simplices}
        if self.witness is not None:
            out["witness"] = [float(f"{v:.12g}") for v in self.witness]
            out["value"] = float(f"{self.value:.12g}")
        return out


def _symmetric(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    return (m + m.T) / 2


def brute_oracle(m, max_depth: int = 40, max_simplices: int = 200_000, tol: float = 1e-12) -> OracleResult:
    """Simplicial subdivision of the standard simplex.

    A piece with vertices ``v_i`` is settled when every ``v_i^T M v_j`` is
    nonnegative; a vertex with ``v^T M v < 0`` is a witness. Otherwise the
    longest edge is bisected, down to ``max_depth`` levels.
    """
    m = _symmetric(m)
    n = m.shape[0]
    diag = np.diag(m)
    if np.any(diag < -tol):
        i = int(np.argmin(diag))
        return OracleResult("not_copositive", np.eye(n)[i], float(diag[i]), 0)
    stack = [(np.eye(n), m.copy(), 0)]
    count = 0
    exhausted = False
    while stack:
        verts, gram, depth = stack.pop()
        count += 1
        if gram.min() >= -tol:
            continue
        if depth >= max_depth or count >= max_simplices:
            exhausted = True
            if count >= max_simplices:
                break
            continue
        # longest edge in the simplex metric
        sq = np.sum(verts**2, axis=1)
        dist = sq[:, None] + sq[None, :] - 2 * verts @ verts.T
        a, b = np.unravel_index(np.argmax(dist), dist.shape)
        mid = 0.5 * (verts[a] + verts[b])
        mv = m @ mid
        val = float(mid @ mv)
        if val < -tol:
            return OracleResult("not_copositive", mid, val, count)
        cross = verts @ mv
        for drop in (a, b):
            child = verts.copy()
            child[drop] = mid
            g2 = gram.copy()
            g2[drop, :] = cross
            g2[:, drop] = cross
            g2[drop, drop] = val
            stack.append((child, g2, depth + 1))
    return OracleResult("unknown" if exhausted else "copositive", None, None, count)


def _zero_diagonal_reduction(m: np.ndarray, margin: float) -> tuple[CopVerdict | None, np.ndarray]:
    """Drop rows with (near) zero diagonal; their off-diagonal entries must be nonnegative."""
    keep = []
    for i in range(m.shape[0]):
        if m[i, i] < -margin:
            return "not_copositive", m
        if abs(m[i, i]) <= margin:
            others = np.delete(m[i], i)
            if others.size and others.min() < -margin:
                return "not_copositive", m
        else:
            keep.append(i)
    return None, m[np.ix_(keep, keep)]


def cop4_test(m, margin: float = DEFAULT_MARGIN, tols: conic.Tolerances | None = None) -> CopVerdict:
    """For n <= 4 copositivity is exactly ``M = P + N``."""
    m = _symmetric(m)
    if m.shape[0] > 4:
        raise ValueError("psd-plus-nonnegative decides copositivity only up to 4x4")
    if m.shape[0] == 0:
        return "copositive"
    _, _, v = q0_split(m, margin, tols)
    if v.member:
        return "copositive"
    if v.status == "not_member":
        return "not_copositive"
    return "unknown"


def cop5_test(m, margin: float = DEFAULT_MARGIN, tols: conic.Tolerances | None = None) -> CopVerdict:
    """Exact 5x5 test: copositive iff in Q-tilde^(1) (probed with a margin)."""
    m = _symmetric(m)
    if m.shape != (5, 5):
        raise ValueError(f"cop5_test needs a 5x5 matrix, got {m.shape}")
    verdict, reduced = _zero_diagonal_reduction(m, margin)
    if verdict is not None:
        return verdict
    if reduced.shape[0] < 5:
        return cop4_test(reduced, margin, tols)
    d = 1.0 / np.sqrt(np.diag(reduced))
    scaled = d[:, None] * reduced * d[None, :]
    v = qtilde_membership(scaled, 1, margin, tols)
    if v.member:
        return "copositive"
    if v.status == "not_member":
        return "not_copositive"
    return "unknown"


def cop_inner_test(m, r: int, margin: float = 0.0, tols: conic.Tolerances | None = None) -> CopVerdict:
    """Sufficient test only: membership in Q-tilde^(r)."""
    m = _symmetric(m)
    v = qtilde_membership(m, r, margin, tols)
    return "copositive" if v.member else "unknown"


def bordered_horn() -> np.ndarray:
    """Horn bordered by the 2x2 block ``[[1, -1], [-1, 1]]``: a 7x7 copositive matrix."""
    from .cones import horn_matrix

    out = np.zeros((7, 7))
    out[:5, :5] = horn_matrix()
    out[5:, 5:] = [[1, -1], [-1, 1]]
    return out


def _candidate(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        a = rng.uniform(-1, 1, (n, n))
        m = (a + a.T) / 2
        m[np.diag_indices(n)] = rng.uniform(0.2, 1.5, n)
    elif kind == 1:
        b = rng.normal(size=(n, n))
        nn = rng.uniform(0, 1, (n, n))
        m = b @ b.T / n + (nn + nn.T) / 2 - rng.uniform(0, 1.5) * np.ones((n, n))
    else:
        # scaled Horn-type matrices near the boundary; for n = 5 many are
        # copositive without being psd plus nonnegative
        from .cones import horn_matrix

        base = horn_matrix()[:n, :n] if n <= 5 else np.eye(n)
        e = rng.uniform(-1, 1, (n, n))
        shift = rng.uniform(-0.1, 0.3)
        d = np.diag(rng.uniform(0.5, 2.0, n))
        m = d @ (base + shift * np.eye(n) + 0.08 * (e + e.T) / 2) @ d
    return (m + m.T) / 2


def margin_sample(n: int, count: int, seed: int, margin: float = 0.05, max_tries: int = 100_000):
    """Seeded random matrices whose copositivity is settled with room to spare.

    A matrix is labelled copositive when ``M - margin*I`` is certified by the
    oracle and not copositive when ``M + margin*I`` has a witness; anything
    in between is discarded. Returns ``[(M, label)]`` with both labels
    represented as evenly as the generator allows.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[np.ndarray, CopVerdict]] = []
    per_label = {"copositive": 0, "not_copositive": 0}
    half = (count + 1) // 2
    for _ in range(max_tries):
        if len(out) >= count:
            break
        m = _candidate(rng, n)
        eye = np.eye(n)
        if brute_oracle(m - margin * eye).status == "copositive":
            label: CopVerdict = "copositive"
        elif brute_oracle(m + margin * eye).status == "not_copositive":
            label = "not_copositive"
        else:
            continue
        if per_label[label] >= half:
            continue
        per_label[label] += 1
        out.append((m, label))
    return out
