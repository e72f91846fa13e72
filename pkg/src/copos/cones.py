"""Membership tests for the sums-of-squares and polyhedral inner approximations of COP_n.

Every test reduces to coefficient matching of a degree ``r+2`` form against

    sum_{|beta|=r} x^beta x^T P_beta x  +  sum_{A squarefree, |A|=r+2} c_A x^A

(plus higher-degree Gram blocks for the K-cones), assembled once by
:class:`_Assembly` and solved through :mod:`copos.conic`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import conic
from .polynomials import (
    HomPoly,
    Monomial,
    add_exponents,
    group_closure,
    monomial_index,
    monomials,
    multiply,
    normalize_one,
    quad_form,
    simplex_power,
    squarefree_monomials,
)

K_LEVEL_CAP = 3

Verdict = Literal["member", "not_member", "unknown"]


@dataclass
class SosCertificate:
    """``multiplier * x^T M x = sum x^beta z_beta^T P_beta z_beta + sum c_A x^A``.

    ``gram`` maps ``beta`` to a Gram matrix over the monomials of degree
    ``(r + 2 - |beta|) / 2``; for Q-type certificates every block is ``n x n``.
    """

    nvars: int
    r: int
    multiplier: HomPoly
    gram: dict[Monomial, np.ndarray] = field(default_factory=dict)
    c: dict[Monomial, float] = field(default_factory=dict)

    def half_degree(self, beta: Monomial) -> int:
        return (self.r + 2 - sum(beta)) // 2

    def to_json(self) -> dict:
        def fmt(v: float) -> float:
            return float(f"{v:.12g}")

        gram = []
        for beta, mat in self.gram.items():
            entry = {"beta": list(beta), "P": [[fmt(v) for v in row] for row in mat]}
            if self.half_degree(beta) != 1:
                entry["half_degree"] = self.half_degree(beta)
            gram.append(entry)
        return {
            "r": self.r,
            "nvars": self.nvars,
            "multiplier": self.multiplier.to_json(),
            "gram": gram,
            "c": [{"A": [i for i, e in enumerate(a) if e], "value": fmt(v)} for a, v in self.c.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> SosCertificate:
        mult = HomPoly.from_json(data["multiplier"])
        n = int(data.get("nvars", mult.nvars))
        gram = {tuple(g["beta"]): np.asarray(g["P"], dtype=float) for g in data.get("gram", [])}
        c = {}
        for item in data.get("c", []):
            e = [0] * n
            for i in item["A"]:
                e[i] = 1
            c[tuple(e)] = float(item["value"])
        return cls(n, int(data["r"]), mult, gram, c)


@dataclass
class MembershipVerdict:
    status: Verdict
    certificate: SosCertificate | None = None
    margin: float = 0.0
    solver_status: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def member(self) -> bool:
        return self.status == "member"

    def to_json(self) -> dict:
        out = {"status": self.status, "margin": self.margin, "solver_status": self.solver_status}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        out.update(self.detail)
        return out


def _status(result: conic.SolveResult) -> Verdict:
    return {"feasible": "member", "infeasible": "not_member"}.get(result.status, "unknown")


def _shift(m, margin: float) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    m = (m + m.T) / 2
    return m + margin * np.eye(m.shape[0]) if margin else m


class _Assembly:
    """Coefficient-matching rows indexed by the monomials of degree ``r + 2``."""

    def __init__(self, n: int, r: int, k_structure: bool = False):
        self.n, self.r = n, r
        self.prob = conic.FeasibilityProblem()
        self.row_index = monomial_index(n, r + 2)
        self.rows: list[list] = [[] for _ in self.row_index]
        self.rhs = np.zeros(len(self.row_index))
        self.gram_keys: list[Monomial] = []
        self.c_keys: list[Monomial] = []
        self._add_sos_side(k_structure)

    def _add_block(self, beta: Monomial, half: int) -> None:
        basis = monomials(self.n, half)
        key = ("P", beta)
        self.prob.add_psd_block(key, len(basis))
        self.gram_keys.append(beta)
        for a in range(len(basis)):
            for b in range(a, len(basis)):
                gamma = add_exponents(beta, add_exponents(basis[a], basis[b]))
                self.rows[self.row_index[gamma]].append(((key, a, b), -1.0 if a == b else -2.0))

    def _add_sos_side(self, k_structure: bool) -> None:
        n, r = self.n, self.r
        for beta in monomials(n, r):
            self._add_block(beta, 1)
        if k_structure:
            for deg in range(r - 2, -1, -2):
                for beta in monomials(n, deg):
                    self._add_block(beta, (r + 2 - deg) // 2)
        for a in squarefree_monomials(n, r + 2):
            self.prob.add_nonneg(("c", a))
            self.c_keys.append(a)
            self.rows[self.row_index[a]].append((("c", a), -1.0))

    def add_target(self, f: HomPoly, weight: float = 1.0) -> None:
        """Add the fixed form ``weight * f`` to the side being decomposed."""
        for mono, c in f.terms.items():
            self.rhs[self.row_index[mono]] -= weight * c

    def add_variable_term(self, key, f: HomPoly) -> None:
        """Add ``var * f`` on the left-hand side."""
        for mono, c in f.terms.items():
            self.rows[self.row_index[mono]].append((key, c))

    def finish(self) -> conic.FeasibilityProblem:
        for terms, rhs in zip(self.rows, self.rhs):
            self.prob.add_equality(terms, rhs)
        return self.prob

    def certificate(self, result: conic.SolveResult, multiplier: HomPoly, scale: float = 1.0) -> SosCertificate:
        vals = result.assignment
        gram = {beta: scale * vals[("P", beta)] for beta in self.gram_keys}
        c = {a: scale * max(vals[("c", a)], 0.0) for a in self.c_keys if vals[("c", a)] > 0}
        return SosCertificate(self.n, self.r, multiplier, gram, c)


def _check_degree(f: HomPoly, r: int) -> None:
    if f.degree != r + 2 and not f.is_zero():
        raise ValueError(f"polynomial has degree {f.degree}, expected r + 2 = {r + 2}")


def h_membership(f: HomPoly, r: int, tols: conic.Tolerances | None = None, multiplier: HomPoly | None = None) -> MembershipVerdict:
    """Is ``f`` in H_{n,r}?  ``multiplier`` is only recorded on the certificate."""
    _check_degree(f, r)
    n = f.nvars
    asm = _Assembly(n, r)
    asm.add_target(f)
    res = conic.solve(asm.finish(), tols)
    mult = multiplier if multiplier is not None else HomPoly.constant(n)
    cert = asm.certificate(res, mult) if res.feasible else None
    return MembershipVerdict(_status(res), cert, 0.0, res.solver_status)


def q_membership(m, r: int, margin: float = 0.0, tols: conic.Tolerances | None = None) -> MembershipVerdict:
    m = _shift(m, margin)
    n = m.shape[0]
    mult = normalize_one(simplex_power(n, r))
    asm = _Assembly(n, r)
    asm.add_target(multiply(mult, quad_form(m)))
    res = conic.solve(asm.finish(), tols)
    cert = asm.certificate(res, mult) if res.feasible else None
    return MembershipVerdict(_status(res), cert, margin, res.solver_status)


def k_membership(m, r: int, margin: float = 0.0, tols: conic.Tolerances | None = None, cap: int = K_LEVEL_CAP) -> MembershipVerdict:
    if r > cap:
        raise ValueError(f"K-cone level {r} exceeds cap {cap}")
    m = _shift(m, margin)
    n = m.shape[0]
    mult = normalize_one(simplex_power(n, r))
    asm = _Assembly(n, r, k_structure=True)
    asm.add_target(multiply(mult, quad_form(m)))
    res = conic.solve(asm.finish(), tols)
    cert = asm.certificate(res, mult) if res.feasible else None
    return MembershipVerdict(_status(res), cert, margin, res.solver_status)


def _add_multiplier_vars(asm: _Assembly, q: HomPoly, generators: Sequence[Sequence[int]] | None) -> list[Monomial]:
    n, r = asm.n, asm.r
    alphas = list(monomials(n, r))
    for alpha in alphas:
        asm.prob.add_nonneg(("p", alpha))
        shifted = HomPoly(n, r + 2, {add_exponents(alpha, d): c for d, c in q.terms.items()})
        asm.add_variable_term(("p", alpha), shifted)
    asm.prob.add_equality([(("p", a), 1.0) for a in alphas], 1.0)
    if generators:
        for g in group_closure(generators, n):
            for alpha in alphas:
                e = [0] * n
                for i, k in enumerate(alpha):
                    e[g[i]] += k
                image = tuple(e)
                if image != alpha:
                    asm.prob.add_equality([(("p", alpha), 1.0), (("p", image), -1.0)], 0.0)
    return alphas


def _extract_multiplier(result: conic.SolveResult, n: int, r: int, alphas: list[Monomial]) -> HomPoly:
    p = HomPoly(n, r, {a: max(result.assignment[("p", a)], 0.0) for a in alphas})
    return normalize_one(p)


def qtilde_membership(
    m,
    r: int,
    margin: float = 0.0,
    tols: conic.Tolerances | None = None,
    generators: Sequence[Sequence[int]] | None = None,
) -> MembershipVerdict:
    """Search jointly for a multiplier ``p >= 0`` with ``||p||_1 = 1`` and its certificate.

    ``generators`` optionally restricts ``p`` to polynomials invariant under
    the generated permutation group.
    """
    m = _shift(m, margin)
    n = m.shape[0]
    asm = _Assembly(n, r)
    alphas = _add_multiplier_vars(asm, quad_form(m), generators)
    res = conic.solve(asm.finish(), tols)
    cert = None
    if res.feasible:
        cert = asm.certificate(res, _extract_multiplier(res, n, r, alphas))
    return MembershipVerdict(_status(res), cert, margin, res.solver_status)


def q0_split(m, margin: float = 0.0, tols: conic.Tolerances | None = None):
    """``M = P + N`` with ``P`` psd and ``N`` entrywise nonnegative, or ``None``.

    Returns ``(P, N, verdict)``; ``P`` and ``N`` are ``None`` unless member.
    """
    v = q_membership(m, 0, margin, tols)
    if not v.member:
        return None, None, v
    m = _shift(m, margin)
    p = v.certificate.gram[(0,) * m.shape[0]]
    return p, m - p, v


def absorb_nonneg(poly: HomPoly, r: int) -> tuple[dict[Monomial, np.ndarray], dict[Monomial, float]]:
    """Write a form with nonnegative coefficients as diagonal Gram entries plus squarefree terms."""
    n = poly.nvars
    gram: dict[Monomial, np.ndarray] = {}
    c: dict[Monomial, float] = {}
    for mono, coef in poly.terms.items():
        if coef < 0:
            raise ValueError("absorb_nonneg needs nonnegative coefficients")
        if all(e <= 1 for e in mono):
            c[mono] = c.get(mono, 0.0) + coef
            continue
        i = next(k for k, e in enumerate(mono) if e >= 2)
        beta = tuple(e - 2 * (k == i) for k, e in enumerate(mono))
        block = gram.setdefault(beta, np.zeros((n, n)))
        block[i, i] += coef
    return gram, c


def _polyhedral_certificate(mult: HomPoly, m: np.ndarray, r: int) -> SosCertificate:
    prod = multiply(mult, quad_form(m))
    clipped = HomPoly(prod.nvars, prod.degree, {k: max(v, 0.0) for k, v in prod.terms.items()})
    gram, c = absorb_nonneg(clipped, r)
    return SosCertificate(m.shape[0], r, mult, gram, c)


def c_membership(m, r: int, margin: float = 0.0, tol: float = 1e-9) -> MembershipVerdict:
    """Every coefficient of ``(sum x_i)^r x^T M x`` nonnegative."""
    m = _shift(m, margin)
    n = m.shape[0]
    mult = normalize_one(simplex_power(n, r))
    prod = multiply(mult, quad_form(m))
    low = prod.min_coeff()
    if low >= -tol:
        return MembershipVerdict("member", _polyhedral_certificate(mult, m, r), margin, "exact", {"min_coeff": low})
    return MembershipVerdict("not_member", None, margin, "exact", {"min_coeff": low})


def ctilde_membership(m, r: int, margin: float = 0.0, tols: conic.Tolerances | None = None) -> MembershipVerdict:
    """LP: some ``p >= 0``, ``||p||_1 = 1``, with ``p x^T M x`` coefficientwise nonnegative."""
    m = _shift(m, margin)
    n = m.shape[0]
    q = quad_form(m)
    prob = conic.FeasibilityProblem()
    alphas = list(monomials(n, r))
    for a in alphas:
        prob.add_nonneg(("p", a))
    prob.add_equality([(("p", a), 1.0) for a in alphas], 1.0)
    idx = monomial_index(n, r + 2)
    rows: list[list] = [[] for _ in idx]
    for a in alphas:
        for d, c in q.terms.items():
            rows[idx[add_exponents(a, d)]].append((("p", a), c))
    for gamma, k in idx.items():
        prob.add_nonneg(("s", gamma))
        prob.add_equality(rows[k] + [(("s", gamma), -1.0)], 0.0)
    res = conic.solve(prob, tols)
    cert = None
    if res.feasible:
        cert = _polyhedral_certificate(_extract_multiplier(res, n, r, alphas), m, r)
    return MembershipVerdict(_status(res), cert, margin, res.solver_status)


CONES = {
    "Q": q_membership,
    "Qtilde": qtilde_membership,
    "K": k_membership,
    "C": c_membership,
    "Ctilde": ctilde_membership,
}


def membership(cone: str, m, r: int, margin: float = 0.0) -> MembershipVerdict:
    if cone == "Q0":
        return q0_split(m, margin)[2]
    try:
        test = CONES[cone]
    except KeyError:
        raise ValueError(f"unknown cone {cone!r}") from None
    return test(m, r, margin)


def horn_matrix() -> np.ndarray:
    return np.array(
        [
            [1, 1, -1, -1, 1],
            [1, 1, 1, -1, -1],
            [-1, 1, 1, 1, -1],
            [-1, -1, 1, 1, 1],
            [1, -1, -1, 1, 1],
        ],
        dtype=float,
    )
