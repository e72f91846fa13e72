import json

import numpy as np
import pytest

from copos import io
from copos.cli import run
from copos.cones import horn_matrix, q_membership
from copos.graphs import Graph, cycle, generate_family, graph_b


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.mark.parametrize(
    "family,params",
    [("cycle", ["7"]), ("G_k", ["3"]), ("L_k", ["3"]), ("L_k_prime", ["3"]), ("graph_B", []),
     ("icosahedron", []), ("star", ["4"]), ("complete_bipartite", ["2", "3"])],
)
@pytest.mark.parametrize("suffix", [".json", ".dimacs"])
def test_gen_round_trip(tmp_path, family, params, suffix):
    path = tmp_path / f"g{suffix}"
    assert run(["gen", "--family", family, *params, "-o", str(path)]) == 0
    g = io.read_graph(path)
    assert g.edges == generate_family(family, *params).edges


def test_gen_disjoint_union(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.write_graph(cycle(5), a)
    io.write_graph(cycle(3), b)
    out = tmp_path / "u.json"
    assert run(["gen", "--family", "disjoint_union", str(a), str(b), "-o", str(out)]) == 0
    assert io.read_graph(out).n == 8


def test_gen_errors(capsys):
    assert run(["gen", "--family", "cycle", "x"]) == 1
    assert run(["gen", "--family", "nope", "3"]) == 1
    assert run(["gen"]) == 1
    assert run([]) == 1


def test_alpha(tmp_path, capsys):
    path = tmp_path / "b.json"
    io.write_graph(graph_b(), path)
    assert run(["alpha", "-g", str(path)]) == 0
    data = out_json(capsys)
    assert data["alpha"] == 3 and graph_b().is_stable(data["stable_set"])


def test_bound_nu(tmp_path, capsys):
    path = tmp_path / "c5.json"
    io.write_graph(cycle(5), path)
    assert run(["bound", "--hierarchy", "nu", "--r", "0", "-g", str(path)]) == 0
    assert abs(out_json(capsys)["value"] - 2.2361) < 1e-3


def test_bound_zeta_tilde_inf(tmp_path, capsys):
    path = tmp_path / "t3.json"
    io.write_graph(generate_family("star", 3), path)
    assert run(["bound", "--hierarchy", "zetatilde", "--r", "0", "-g", str(path), "--t-tol", "1e-3"]) == 0
    assert out_json(capsys)["value"] == "inf"


def test_membership_and_verify(tmp_path, capsys):
    m = tmp_path / "horn.txt"
    io.write_matrix(horn_matrix(), m)
    cert = tmp_path / "cert.json"
    assert run(["membership", "--cone", "Q", "--r", "1", "-m", str(m), "--certificate-out", str(cert)]) == 0
    assert out_json(capsys)["status"] == "member"
    assert run(["verify-cert", "-m", str(m), "-c", str(cert)]) == 0
    assert out_json(capsys)["pass"] is True
    assert run(["membership", "--cone", "Q0", "-m", str(m)]) == 2
    capsys.readouterr()
    other = tmp_path / "other.json"
    io.write_matrix(horn_matrix() + np.ones((5, 5)), other)
    assert run(["verify-cert", "-m", str(other), "-c", str(cert)]) == 2


def test_verify_dimension_mismatch(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    io.write_certificate(q_membership(horn_matrix(), 1).certificate, cert)
    m = tmp_path / "eye.txt"
    io.write_matrix(np.eye(3), m)
    assert run(["verify-cert", "-m", str(m), "-c", str(cert)]) == 1


def test_rank(tmp_path, capsys):
    path = tmp_path / "g3.json"
    io.write_graph(generate_family("G_k", 3), path)
    assert run(["rank", "--lower", "-g", str(path)]) == 0
    assert out_json(capsys)["bound"] == 2
    c5 = tmp_path / "c5.json"
    io.write_graph(cycle(5), c5)
    assert run(["rank", "--upper", "-g", str(c5)]) == 0
    assert out_json(capsys)["bound"] == 1


def test_cop5_and_copositive(tmp_path, capsys):
    m = tmp_path / "horn.json"
    io.write_matrix(horn_matrix(), m)
    assert run(["cop5", "-m", str(m)]) == 0
    assert out_json(capsys)["status"] == "copositive"
    bad = tmp_path / "bad.json"
    io.write_matrix(horn_matrix() - 0.05 * np.ones((5, 5)), bad)
    assert run(["cop5", "-m", str(bad)]) == 2
    capsys.readouterr()
    small = tmp_path / "small.txt"
    io.write_matrix(np.eye(3), small)
    assert run(["cop5", "-m", str(small)]) == 1
    assert run(["copositive", "-m", str(small)]) == 0
    assert out_json(capsys)["method"] == "psd_plus_nonneg"
    big = tmp_path / "big.txt"
    io.write_matrix(np.eye(6), big)
    assert run(["copositive", "-m", str(big)]) == 0
    assert out_json(capsys)["method"] == "simplex_oracle"


def test_copositive_inner_unknown(tmp_path, capsys):
    m = tmp_path / "horn.json"
    io.write_matrix(horn_matrix(), m)
    assert run(["copositive", "-m", str(m), "--r", "0"]) == 3


def test_reproduce_horn(tmp_path, capsys):
    assert run(["reproduce", "--experiment", "horn", "-o", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "horn.json").read_text())
    assert report["passed"] is True
    assert "version" in report and "tolerances" in report
    assert (tmp_path / "horn.md").exists()


def test_reproduce_star_zeta(tmp_path, capsys):
    assert run(["reproduce", "--experiment", "star-zeta", "-o", str(tmp_path)]) == 0


def test_reproduce_errors(tmp_path):
    assert run(["reproduce", "--experiment", "nope", "-o", str(tmp_path)]) == 1
    assert run(["reproduce", "--experiment", "gk", "-o", str(tmp_path)]) == 1


def test_resource_cap_exit_code(tmp_path):
    path = tmp_path / "big.json"
    io.write_graph(Graph(70, frozenset()), path)
    assert run(["alpha", "-g", str(path)]) == 4


def test_bad_input_files(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2\n1 2\n3 4\n")
    assert run(["cop5", "-m", str(bad)]) == 1
    assert run(["alpha", "-g", str(tmp_path / "missing.json")]) == 1
    g = tmp_path / "g.dimacs"
    g.write_text("e 1 2\n")
    assert run(["alpha", "-g", str(g)]) == 1


def test_io_formats():
    g = io.graph_from_dimacs("c x\np edge 3 2\ne 1 2\ne 2 3\n")
    assert g.edges == {(0, 1), (1, 2)}
    assert io.graph_from_dimacs(io.graph_to_dimacs(g)) == g
    m = io.matrix_from_text("[[1, 2], [2, 1]]")
    assert m.tolist() == [[1, 2], [2, 1]]
    assert np.array_equal(io.matrix_from_text(io.matrix_to_text(horn_matrix())), horn_matrix())
    with pytest.raises(io.FormatError):
        io.matrix_from_text("[[1, 2, 3]]")
    assert io.dumps({"x": 1 / 3, "y": float("inf")}) == '{\n  "x": 0.333333333333,\n  "y": "inf"\n}'
