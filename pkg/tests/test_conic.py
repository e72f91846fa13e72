import numpy as np
import pytest

from copos import conic
from copos.conic import FeasibilityProblem, MalformedProblem, Tolerances, solve


def test_single_scalar_feasible():
    p = FeasibilityProblem()
    p.add_nonneg("s")
    p.add_equality([("s", 1.0)], 1.0)
    res = solve(p)
    assert res.status == "feasible"
    assert abs(res.assignment["s"] - 1) < 1e-7
    assert res.max_equality_residual <= 1e-7


def test_single_scalar_infeasible():
    p = FeasibilityProblem()
    p.add_nonneg("s")
    p.add_equality([("s", 1.0)], -1.0)
    assert solve(p).status == "infeasible"


def test_minimize_psd_entry():
    p = FeasibilityProblem()
    p.add_psd_block("X", 1)
    p.set_objective([(("X", 0, 0), 1.0)])
    res = solve(p)
    assert res.status == "feasible"
    assert abs(res.objective_value) < 1e-7


def test_psd_block_off_diagonal_convention():
    # X = [[1, a], [a, 1]] with a = 0.5 fixed by one equality on the (0, 1) entry
    p = FeasibilityProblem()
    p.add_psd_block("X", 2)
    p.add_equality([(("X", 0, 0), 1.0)], 1.0)
    p.add_equality([(("X", 1, 1), 1.0)], 1.0)
    p.add_equality([(("X", 0, 1), 1.0)], 0.5)
    res = solve(p)
    assert res.feasible
    assert np.allclose(res.assignment["X"], [[1, 0.5], [0.5, 1]], atol=1e-7)
    # an off-diagonal entry of 2 is not psd-compatible
    q = FeasibilityProblem()
    q.add_psd_block("X", 2)
    q.add_equality([(("X", 0, 0), 1.0)], 1.0)
    q.add_equality([(("X", 1, 1), 1.0)], 1.0)
    q.add_equality([(("X", 0, 1), 1.0)], 2.0)
    assert solve(q).status == "infeasible"


def test_feasible_results_are_rechecked():
    p = FeasibilityProblem()
    p.add_psd_block("X", 3)
    p.add_free("t")
    p.add_equality([(("X", i, i), 1.0) for i in range(3)] + [("t", -1.0)], 0.0)
    p.add_equality([("t", 1.0)], 3.0)
    res = solve(p)
    assert res.feasible
    resid, eig, _ = conic.recheck(p, np.concatenate([[0.0] * 0, _flatten(p, res)]))
    assert resid <= 1e-7 and eig >= -1e-7


def _flatten(p, res):
    x = np.zeros(p._nvar)
    for key, (col, _) in p._scalars.items():
        x[col] = res.assignment[key]
    for key, (start, dim) in p._blocks.items():
        mat = res.assignment[key]
        for j in range(dim):
            for i in range(j + 1):
                x[start + conic._svec_index(i, j)] = mat[i, j] * (1 if i == j else np.sqrt(2))
    return x


def test_malformed_problems():
    p = FeasibilityProblem()
    with pytest.raises(MalformedProblem):
        p.add_psd_block("X", 0)
    p.add_nonneg("s")
    with pytest.raises(MalformedProblem):
        p.add_nonneg("s")
    with pytest.raises(MalformedProblem):
        p.add_equality([("ghost", 1.0)], 0.0)
    p.add_psd_block("X", 2)
    with pytest.raises(MalformedProblem):
        p.add_equality([(("X", 0, 2), 1.0)], 0.0)
    with pytest.raises(MalformedProblem):
        solve(FeasibilityProblem())


def test_deterministic_status():
    from copos.cones import horn_matrix, q_membership

    statuses = {q_membership(horn_matrix(), 0).status for _ in range(3)}
    assert statuses == {"not_member"}


def test_tolerance_override(monkeypatch):
    monkeypatch.setenv("COPOS_SOLVER_TOL", "1e-5")
    tols = Tolerances.from_env()
    assert tols.feas_tol == tols.psd_tol == 1e-5
    monkeypatch.delenv("COPOS_SOLVER_TOL")
    assert Tolerances.from_env().feas_tol == 1e-7


def test_solver_panic_maps_to_unknown(monkeypatch):
    monkeypatch.setattr(conic, "_run_clarabel", lambda *a, **k: None)
    p = FeasibilityProblem()
    p.add_psd_block("X", 1)
    p.add_equality([(("X", 0, 0), 1.0)], 1.0)
    res = solve(p)
    assert res.status == "unknown" and res.solver_status == "SolverPanic"


def test_linear_programs_go_to_highs():
    p = FeasibilityProblem()
    p.add_nonneg("a")
    p.add_free("b")
    p.add_equality([("a", 1.0), ("b", 1.0)], 2.0)
    p.set_objective([("a", 1.0)])
    res = solve(p)
    assert res.feasible and res.solver_status.startswith("highs")
    assert abs(res.objective_value) < 1e-9


def test_lp_falls_back_through_the_ladder(monkeypatch):
    from types import SimpleNamespace

    calls = []

    def flaky(c, **kw):
        calls.append(kw["method"])
        return SimpleNamespace(status=4, x=None)

    monkeypatch.setattr(conic, "linprog", flaky)
    p = FeasibilityProblem()
    p.add_nonneg("s")
    p.add_equality([("s", 1.0)], 1.0)
    res = solve(p)
    assert calls == [m for m, _ in conic._LP_LADDER]
    assert res.feasible and res.solver_status == "Solved"
