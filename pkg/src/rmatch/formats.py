"""Plain-text and JSON serialisation.

Text format: a header line ``k n`` (hypergraph, ``k`` = edge size) or
``k n m`` (partite graph, edges have ``k+1`` ids and ``X = n+1..n+m``),
then one edge per line as ascending 1-based ids.  Blank lines and ``#``
comments are ignored.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

from .constructions import Family
from .core import Graph, Hypergraph, InputError, Matching, PartiteGraph


def dumps_graph(H: Graph) -> str:
    if isinstance(H, PartiteGraph):
        lines = [f"{H.k} {H.n} {H.m}"]
    else:
        lines = [f"{H.k} {H.n}"]
    lines += [" ".join(map(str, e)) for e in sorted(H.edges)]
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> Graph:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append([int(tok) for tok in line.split()])
    if not rows:
        raise InputError("empty graph file")
    header, body = rows[0], rows[1:]
    if len(header) == 2:
        k, n = header
        return Hypergraph.from_edges(n, k, body)
    if len(header) == 3:
        k, n, m = header
        return PartiteGraph.from_edges(n, m, k, body)
    raise InputError(f"bad header {header}: expected 'k n' or 'k n m'")


def read_graph(path: str | Path) -> Graph:
    return loads_graph(Path(path).read_text())


def write_graph(H: Graph, path: str | Path) -> None:
    Path(path).write_text(dumps_graph(H))


def family_to_json(F: Family) -> dict[str, Any]:
    return {"n": F.n, "k": F.k,
            "graphs": [[list(e) for e in G.sorted_edges] for G in F.graphs]}


def family_from_json(data: dict[str, Any]) -> Family:
    n, k = data["n"], data["k"]
    return Family(n, k, tuple(Hypergraph.from_edges(n, k, g) for g in data["graphs"]))


def read_input(path: str | Path) -> Graph | Family:
    """Load a graph (text format) or a family (JSON object with ``graphs``)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return family_from_json(json.loads(text))
    return loads_graph(text)


def fraction_str(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def witness_to_json(witness: Matching | dict | None) -> Any:
    if witness is None:
        return None
    if isinstance(witness, Matching):
        return [list(e) for e in witness]
    return {str(c): list(e) for c, e in sorted(witness.items())}


def edges_to_json(edges: Iterable[Iterable[int]]) -> list[list[int]]:
    return [list(e) for e in sorted(tuple(sorted(e)) for e in edges)]
