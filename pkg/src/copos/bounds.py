"""Upper bounds on the stability number from the cone hierarchies.

``nu`` and ``theta`` are single SDPs minimising ``t``. The tilde hierarchies
and both ``zeta`` variants have a multiplier that enters bilinearly with
``t``, so they are computed by bisection over feasibility probes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import conic
from .cones import (
    K_LEVEL_CAP,
    MembershipVerdict,
    SosCertificate,
    _Assembly,
    c_membership,
    ctilde_membership,
    q_membership,
    qtilde_membership,
)
from .graphs import Graph, m_matrix
from .polynomials import multiply, normalize_one, quad_form, simplex_power

log = logging.getLogger(__name__)

DEFAULT_T_TOL = 1e-4
MAX_DOUBLINGS = 8


class BoundError(RuntimeError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class BoundResult:
    value: float
    r: int
    hierarchy: str
    tolerance: float
    certificate: SosCertificate | None = None
    search_trace: list[tuple[float, str]] = field(default_factory=list)
    verified: bool = True
    solver_status: str = ""

    def to_json(self, with_certificate: bool = False) -> dict:
        out = {
            "hierarchy": self.hierarchy,
            "r": self.r,
            "value": _num(self.value),
            "tolerance": self.tolerance,
            "verified": self.verified,
            "solver_status": self.solver_status,
            "search_trace": [{"t": _num(t), "verdict": v} for t, v in self.search_trace],
        }
        if with_certificate and self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


def _num(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _require_vertices(g: Graph) -> None:
    if g.n == 0:
        raise ValueError("bounds are not defined for the graph with no vertices")


# direct SDPs


def _min_t(g: Graph, r: int, hierarchy: str, k_structure: bool, tols: conic.Tolerances | None) -> BoundResult:
    _require_vertices(g)
    n = g.n
    mult = normalize_one(simplex_power(n, r))
    a_plus_i = g.adjacency() + np.eye(n)
    asm = _Assembly(n, r, k_structure=k_structure)
    asm.prob.add_free("t")
    asm.add_variable_term("t", multiply(mult, quad_form(a_plus_i)))
    asm.add_target(multiply(mult, quad_form(-np.ones((n, n)))))
    prob = asm.finish()
    prob.set_objective([("t", 1.0)])
    res = conic.solve(prob, tols)
    if not res.feasible:
        raise BoundError(f"{hierarchy}^({r}) solve ended with {res.status} ({res.solver_status})")
    t = float(res.assignment["t"])
    cert = asm.certificate(res, mult)
    return BoundResult(t, r, hierarchy, res.max_equality_residual, cert, [(t, "optimum")], True, res.solver_status)


def nu_bound(g: Graph, r: int, tols: conic.Tolerances | None = None) -> BoundResult:
    """``min t`` with ``t(A+I) - J`` in Q^(r)."""
    return _min_t(g, r, "nu", False, tols)


def theta_bound(g: Graph, r: int, tols: conic.Tolerances | None = None, cap: int = K_LEVEL_CAP) -> BoundResult:
    """``min t`` with ``t(A+I) - J`` in K^(r)."""
    if r > cap:
        raise ValueError(f"K-cone level {r} exceeds cap {cap}")
    return _min_t(g, r, "theta", True, tols)


# bisection


def bisect(
    probe: Callable[[float], MembershipVerdict],
    lo: float,
    hi: float,
    t_tol: float,
    max_doublings: int = MAX_DOUBLINGS,
) -> tuple[float, MembershipVerdict | None, list[tuple[float, str]], bool]:
    """Smallest feasible ``t`` up to ``t_tol``.

    Returns ``(value, verdict_at_value, trace, clean)``; ``clean`` is false
    when some probe came back unknown (treated as infeasible). If even the
    expanded upper end is infeasible the value is ``inf``.
    """
    trace: list[tuple[float, str]] = []
    clean = True

    def test(t: float) -> MembershipVerdict:
        nonlocal clean
        v = probe(t)
        trace.append((t, v.status))
        if v.status == "unknown":
            clean = False
        return v

    v = test(lo)
    if v.member:
        return lo, v, trace, clean
    best = test(hi)
    doublings = 0
    while not best.member:
        if doublings >= max_doublings:
            return math.inf, None, trace, clean
        lo, hi = hi, 2 * hi
        best = test(hi)
        doublings += 1
    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        v = test(mid)
        if v.member:
            hi, best = mid, v
        else:
            lo = mid
    return hi, best, trace, clean


def _bisect_bound(
    g: Graph, r: int, hierarchy: str, t_tol: float, probe: Callable[[float], MembershipVerdict]
) -> BoundResult:
    _require_vertices(g)
    value, v, trace, clean = bisect(probe, 1.0, float(g.n), t_tol)
    cert = v.certificate if v is not None else None
    status = v.solver_status if v is not None else "infeasible at every probe"
    return BoundResult(value, r, hierarchy, t_tol, cert, trace, clean, status)


def nu_tilde_bound(
    g: Graph,
    r: int,
    t_tol: float = DEFAULT_T_TOL,
    tols: conic.Tolerances | None = None,
    generators=None,
) -> BoundResult:
    """Bisection over ``t`` in ``[1, n]`` with Q-tilde feasibility probes."""
    return _bisect_bound(
        g, r, "nutilde", t_tol, lambda t: qtilde_membership(m_matrix(g, t), r, tols=tols, generators=generators)
    )


def zeta_bounds(
    g: Graph,
    r: int,
    fixed_multiplier: bool = False,
    t_tol: float = DEFAULT_T_TOL,
    tols: conic.Tolerances | None = None,
) -> BoundResult:
    """``zeta^(r)`` (fixed multiplier, exact coefficient test) or the LP bound ``zeta-tilde^(r)``."""
    if fixed_multiplier:
        return _bisect_bound(g, r, "zeta", t_tol, lambda t: c_membership(m_matrix(g, t), r))
    return _bisect_bound(g, r, "zetatilde", t_tol, lambda t: ctilde_membership(m_matrix(g, t), r, tols=tols))


def probe_bound(g: Graph, hierarchy: str, r: int, t: float, tols: conic.Tolerances | None = None) -> MembershipVerdict:
    """Single feasibility probe of ``t(A+I) - J`` for the cone behind ``hierarchy``."""
    m = m_matrix(g, t)
    if hierarchy == "nu":
        return q_membership(m, r, tols=tols)
    if hierarchy == "nutilde":
        return qtilde_membership(m, r, tols=tols)
    if hierarchy == "theta":
        from .cones import k_membership

        return k_membership(m, r, tols=tols)
    if hierarchy == "zeta":
        return c_membership(m, r)
    if hierarchy == "zetatilde":
        return ctilde_membership(m, r, tols=tols)
    raise ValueError(f"unknown hierarchy {hierarchy!r}")


HIERARCHIES = {
    "nu": lambda g, r, t_tol: nu_bound(g, r),
    "theta": lambda g, r, t_tol: theta_bound(g, r),
    "nutilde": lambda g, r, t_tol: nu_tilde_bound(g, r, t_tol),
    "zeta": lambda g, r, t_tol: zeta_bounds(g, r, True, t_tol),
    "zetatilde": lambda g, r, t_tol: zeta_bounds(g, r, False, t_tol),
}


def compute_bound(g: Graph, hierarchy: str, r: int, t_tol: float = DEFAULT_T_TOL) -> BoundResult:
    try:
        fn = HIERARCHIES[hierarchy]
    except KeyError:
        raise ValueError(f"unknown hierarchy {hierarchy!r}") from None
    return fn(g, r, t_tol)
