"""Reading and writing graphs, matrices and certificates.

Graphs: DIMACS (``p edge n m`` then ``e i j``, 1-indexed) or JSON
``{"n": ..., "edges": [[i, j], ...]}`` (0-indexed). Matrices: plain text
(first line ``n``, then ``n`` rows) or a JSON array of rows. Floats are
written with 12 significant digits.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cones import SosCertificate
from .graphs import Graph

SIG_DIGITS = 12


class FormatError(ValueError):
    pass


def fmt_float(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return str(x)
        return fmt_float(x)
    return obj


# graphs


def graph_to_json(g: Graph) -> dict:
    out = {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}
    if g.name:
        out["name"] = g.name
    return out


def graph_from_json(data) -> Graph:
    try:
        return Graph(int(data["n"]), frozenset(tuple(e) for e in data["edges"]), data.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad graph JSON: {exc}") from exc


def graph_to_dimacs(g: Graph) -> str:
    lines = [f"c {g.name}"] if g.name else []
    lines.append(f"p edge {g.n} {len(g.edges)}")
    lines += [f"e {i + 1} {j + 1}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def graph_from_dimacs(text: str) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) < 4 or parts[1] not in ("edge", "col"):
                raise FormatError(f"line {lineno}: expected 'p edge n m'")
            n = int(parts[2])
        elif parts[0] == "e":
            if n is None:
                raise FormatError(f"line {lineno}: edge before header")
            i, j = int(parts[1]) - 1, int(parts[2]) - 1
            edges.append((i, j))
        else:
            raise FormatError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise FormatError("missing 'p edge' header")
    try:
        return Graph(n, frozenset(edges))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def read_graph(path: str | Path) -> Graph:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return graph_from_json(json.loads(text))
    return graph_from_dimacs(text)


def write_graph(g: Graph, path: str | Path) -> None:
    path = Path(path)
    if path.suffix in (".dimacs", ".col", ".clq"):
        path.write_text(graph_to_dimacs(g))
    else:
        path.write_text(dumps(graph_to_json(g)) + "\n")


# matrices


def matrix_from_text(text: str) -> np.ndarray:
    stripped = text.strip()
    if stripped.startswith("["):
        m = np.array(json.loads(stripped), dtype=float)
    else:
        lines = [ln.split() for ln in stripped.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines:
            raise FormatError("empty matrix file")
        try:
            n = int(lines[0][0])
            rows = [[float(v) for v in ln] for ln in lines[1:]]
        except ValueError as exc:
            raise FormatError(f"bad matrix text: {exc}") from exc
        if len(rows) != n or any(len(r) != n for r in rows):
            raise FormatError(f"expected {n} rows of {n} entries")
        m = np.array(rows, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise FormatError(f"matrix must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise FormatError("matrix is not symmetric")
    return m


def read_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_text(Path(path).read_text())


def matrix_to_text(m: np.ndarray) -> str:
    rows = [" ".join(f"{v:.{SIG_DIGITS}g}" for v in row) for row in np.asarray(m)]
    return f"{len(rows)}\n" + "\n".join(rows) + "\n"


def write_matrix(m: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(dumps(np.asarray(m)) + "\n")
    else:
        path.write_text(matrix_to_text(m))


# certificates


def read_certificate(path: str | Path) -> SosCertificate:
    try:
        return SosCertificate.from_json(json.loads(Path(path).read_text()))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad certificate JSON: {exc}") from exc


def write_certificate(cert: SosCertificate, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cert.to_json(), indent=2) + "\n")
