"""Block-structured conic feasibility problems and the one place a solver is called.

Problems are declared incrementally: scalar variables (free or nonnegative),
symmetric PSD blocks, linear equalities over entries of either, and an
optional linear objective to minimise. :func:`solve` hands problems with
PSD blocks to Clarabel and pure linear programs to HiGHS, and re-checks every
feasible answer itself before reporting it.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Hashable, Literal

import clarabel
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

log = logging.getLogger(__name__)

Status = Literal["feasible", "infeasible", "unknown"]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Tolerances:
    feas_tol: float = 1e-7
    psd_tol: float = 1e-7
    time_limit: float | None = None

    @classmethod
    def from_env(cls, **overrides) -> Tolerances:
        raw = os.environ.get("COPOS_SOLVER_TOL")
        if raw:
            tol = float(raw)
            overrides.setdefault("feas_tol", tol)
            overrides.setdefault("psd_tol", tol)
        return cls(**overrides)


class MalformedProblem(ValueError):
    pass


@dataclass
class SolveResult:
    status: Status
    assignment: dict[Hashable, float | np.ndarray] = field(default_factory=dict)
    objective_value: float | None = None
    max_equality_residual: float = math.inf
    min_block_eigenvalue: float = -math.inf
    min_nonneg_value: float = -math.inf
    solver_status: str = ""
    solve_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _svec_index(i: int, j: int) -> int:
    """Position of entry (i, j), i <= j, in Clarabel's column-major upper-triangle vector."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


class FeasibilityProblem:
    """Variables, equalities and an optional objective, all linear."""

    def __init__(self) -> None:
        self._scalars: dict[Hashable, tuple[int, bool]] = {}
        self._blocks: dict[Hashable, tuple[int, int]] = {}
        self._nvar = 0
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._rhs: list[float] = []
        self._objective: dict[int, float] = {}

    # declarations

    def _fresh(self, key: Hashable) -> None:
        if key in self._scalars or key in self._blocks:
            raise MalformedProblem(f"variable {key!r} declared twice")

    def add_nonneg(self, key: Hashable) -> None:
        self._fresh(key)
        self._scalars[key] = (self._nvar, True)
        self._nvar += 1

    def add_free(self, key: Hashable) -> None:
        self._fresh(key)
        self._scalars[key] = (self._nvar, False)
        self._nvar += 1

    def add_psd_block(self, key: Hashable, dim: int) -> None:
        if dim < 1:
            raise MalformedProblem("PSD blocks need dimension >= 1")
        self._fresh(key)
        self._blocks[key] = (self._nvar, dim)
        self._nvar += dim * (dim + 1) // 2

    @property
    def psd_blocks(self) -> list[tuple[Hashable, int]]:
        return [(k, d) for k, (_, d) in self._blocks.items()]

    @property
    def nonneg_scalars(self) -> list[Hashable]:
        return [k for k, (_, nn) in self._scalars.items() if nn]

    @property
    def free_scalars(self) -> list[Hashable]:
        return [k for k, (_, nn) in self._scalars.items() if not nn]

    @property
    def n_equalities(self) -> int:
        return len(self._rhs)

    # linear functionals

    def _column(self, ref) -> tuple[int, float]:
        """Column and scale for a scalar key or a ``(block, i, j)`` entry reference."""
        if ref in self._scalars:
            return self._scalars[ref][0], 1.0
        if isinstance(ref, tuple) and len(ref) == 3 and ref[0] in self._blocks:
            key, i, j = ref
            start, dim = self._blocks[key]
            if not (0 <= i < dim and 0 <= j < dim):
                raise MalformedProblem(f"entry {(i, j)} outside block {key!r} of size {dim}")
            return start + _svec_index(i, j), (1.0 if i == j else 1.0 / _SQRT2)
        raise MalformedProblem(f"undeclared variable {ref!r}")

    def add_equality(self, terms, rhs: float) -> None:
        """``sum coef * var == rhs``; block entries count once per unordered pair."""
        row = len(self._rhs)
        for ref, coef in terms:
            if coef == 0:
                continue
            col, scale = self._column(ref)
            self._rows.append(row)
            self._cols.append(col)
            self._vals.append(coef * scale)
        self._rhs.append(float(rhs))

    def set_objective(self, terms) -> None:
        self._objective = {}
        for ref, coef in terms:
            col, scale = self._column(ref)
            self._objective[col] = self._objective.get(col, 0.0) + coef * scale

    # assembly

    def equality_matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self._vals, (self._rows, self._cols)), shape=(len(self._rhs), self._nvar)
        )

    def unpack(self, x: np.ndarray) -> dict[Hashable, float | np.ndarray]:
        out: dict[Hashable, float | np.ndarray] = {}
        for key, (col, _) in self._scalars.items():
            out[key] = float(x[col])
        for key, (start, dim) in self._blocks.items():
            mat = np.empty((dim, dim))
            for j in range(dim):
                for i in range(j + 1):
                    v = x[start + _svec_index(i, j)]
                    if i != j:
                        v /= _SQRT2
                    mat[i, j] = mat[j, i] = v
            out[key] = mat
        return out


def _clarabel_status(sol) -> str:
    return str(sol.status).split(".")[-1]


def recheck(problem: FeasibilityProblem, x: np.ndarray) -> tuple[float, float, float]:
    """Equality residual, smallest block eigenvalue and smallest nonneg scalar at ``x``."""
    a = problem.equality_matrix()
    resid = float(np.max(np.abs(a @ x - np.asarray(problem._rhs)))) if problem.n_equalities else 0.0
    values = problem.unpack(x)
    eigs = [float(np.linalg.eigvalsh(values[k])[0]) for k in problem._blocks]
    nonneg = [values[k] for k in problem.nonneg_scalars]
    return resid, min(eigs, default=math.inf), min(nonneg, default=math.inf)


# inconclusive runs near a cone boundary often succeed with more regularization
_REGULARIZATION_LADDER = (1e-8, 1e-7, 1e-6)


def _run_clarabel(p, q, a, b, cones, tols: Tolerances, reg: float):
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_feas = 1e-10
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.max_iter = 400
    settings.static_regularization_constant = reg
    if tols.time_limit:
        settings.time_limit = float(tols.time_limit)
    try:
        return clarabel.DefaultSolver(p, q, a, b, cones, settings).solve()
    except (KeyboardInterrupt, SystemExit):
        raise
    except BaseException as exc:  # Rust panics surface as pyo3 PanicException
        log.warning("clarabel aborted: %s", exc)
        return None


def solve(problem: FeasibilityProblem, tols: Tolerances | None = None) -> SolveResult:
    tols = tols or Tolerances.from_env()
    n = problem._nvar
    if n == 0:
        raise MalformedProblem("problem has no variables")

    if not problem._blocks:
        return _solve_lp(problem, tols)
    return _solve_conic(problem, tols)


def _solve_conic(problem: FeasibilityProblem, tols: Tolerances) -> SolveResult:
    n = problem._nvar
    a_eq = problem.equality_matrix()
    blocks_a = [a_eq]
    b_parts = [np.asarray(problem._rhs, dtype=float)]
    cones = []
    if problem.n_equalities:
        cones.append(clarabel.ZeroConeT(problem.n_equalities))

    nn_cols = [problem._scalars[k][0] for k in problem.nonneg_scalars]
    if nn_cols:
        m = len(nn_cols)
        blocks_a.append(sp.csr_matrix((-np.ones(m), (np.arange(m), nn_cols)), shape=(m, n)))
        b_parts.append(np.zeros(m))
        cones.append(clarabel.NonnegativeConeT(m))
    for _, (start, dim) in problem._blocks.items():
        size = dim * (dim + 1) // 2
        blocks_a.append(
            sp.csr_matrix((-np.ones(size), (np.arange(size), np.arange(start, start + size))), shape=(size, n))
        )
        b_parts.append(np.zeros(size))
        cones.append(clarabel.PSDTriangleConeT(dim))

    a = sp.vstack(blocks_a, format="csc")
    b = np.concatenate(b_parts)
    q = np.zeros(n)
    for col, c in problem._objective.items():
        q[col] = c
    p = sp.csc_matrix((n, n))

    result = None
    for reg in _REGULARIZATION_LADDER:
        result = _interpret(problem, _run_clarabel(p, q, a, b, cones, tols, reg), q, tols)
        log.debug("clarabel (static reg %.0e): %s", reg, result.solver_status)
        if result.status != "unknown":
            break
    else:
        log.info(
            "solver status %s with residual %.2e, min eig %.2e",
            result.solver_status,
            result.max_equality_residual,
            result.min_block_eigenvalue,
        )
    return result


def _interpret(problem: FeasibilityProblem, sol, q: np.ndarray, tols: Tolerances) -> SolveResult:
    if sol is None:
        return SolveResult("unknown", solver_status="SolverPanic")
    raw = _clarabel_status(sol)
    if raw in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return SolveResult("infeasible", solver_status=raw, solve_time=sol.solve_time)
    x = np.asarray(sol.x, dtype=float)
    if x.size != problem._nvar or not np.all(np.isfinite(x)):
        return SolveResult("unknown", solver_status=raw, solve_time=sol.solve_time)
    resid, min_eig, min_nn = recheck(problem, x)
    ok = resid <= tols.feas_tol and min_eig >= -tols.psd_tol and min_nn >= -tols.feas_tol
    status: Status = "feasible" if ok and raw in ("Solved", "AlmostSolved") else "unknown"
    return SolveResult(
        status,
        problem.unpack(x) if status == "feasible" else {},
        float(q @ x) if problem._objective else None,
        resid,
        min_eig,
        min_nn,
        raw,
        sol.solve_time,
    )


# linear programs

_HIGHS_STATUS = {0: "Solved", 1: "IterationLimit", 2: "Infeasible", 3: "Unbounded", 4: "NumericalError"}

# near-degenerate LPs defeat different HiGHS modes on different inputs
_LP_LADDER = (("highs", {}), ("highs-ipm", {}), ("highs-ds", {"presolve": False}))


def _solve_lp(problem: FeasibilityProblem, tols: Tolerances) -> SolveResult:
    """HiGHS first (several modes), Clarabel last; stop at the first definite answer."""
    n = problem._nvar
    c = np.zeros(n)
    for col, coef in problem._objective.items():
        c[col] = coef
    bounds = [(None, None)] * n
    for col, nonneg in problem._scalars.values():
        if nonneg:
            bounds[col] = (0, None)
    eq = problem.equality_matrix() if problem.n_equalities else None
    rhs = np.asarray(problem._rhs) if problem.n_equalities else None
    for method, options in _LP_LADDER:
        if tols.time_limit:
            options = {**options, "time_limit": float(tols.time_limit)}
        res = linprog(c, A_eq=eq, b_eq=rhs, bounds=bounds, method=method, options=options)
        raw = f"{method}:{_HIGHS_STATUS.get(res.status, f'status{res.status}')}"
        if res.status == 2:
            return SolveResult("infeasible", solver_status=raw)
        if res.status == 0:
            x = np.asarray(res.x, dtype=float)
            resid, min_eig, min_nn = recheck(problem, x)
            if resid <= tols.feas_tol and min_nn >= -tols.feas_tol:
                return SolveResult(
                    "feasible",
                    problem.unpack(x),
                    float(c @ x) if problem._objective else None,
                    resid,
                    min_eig,
                    min_nn,
                    raw,
                )
        log.debug("LP attempt %s inconclusive", raw)
    return _solve_conic(problem, tols)


def solve_inequality_lp(c, a_ub, b_ub, bounds) -> np.ndarray | None:
    """``min c x`` subject to ``a_ub x <= b_ub`` and box bounds; ``None`` unless solved."""
    if a_ub is not None and len(a_ub) == 0:
        a_ub = b_ub = None
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    return np.asarray(res.x, dtype=float) if res.status == 0 else None
