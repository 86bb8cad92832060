"""CSV readers and writers.  All files use original (pre-compaction) node ids."""

from __future__ import annotations

import csv
import hashlib
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import WeightedGraph, build_graph
from .partition import Partition


def _rows(path) -> list[list[str]]:
    """Non-empty, non-comment rows; a leading non-numeric row is a header."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    rows = [[c.strip() for c in r] for r in csv.reader(lines)]
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    return rows


def _node_id(text: str, where: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ValueError(f"{where}: node id {text!r} is not an integer") from None
    if v < 0:
        raise ValueError(f"{where}: node id {v} is negative")
    return v


def read_edges(path) -> WeightedGraph:
    triples = []
    for k, r in enumerate(_rows(path)):
        if len(r) != 3:
            raise ValueError(f"{path}: row {k} needs i,j,weight, got {r}")
        where = f"{path}: row {k}"
        triples.append((_node_id(r[0], where), _node_id(r[1], where), float(r[2])))
    graph, _ = build_graph(triples)
    return graph


def read_signal(path) -> dict[int, float]:
    """``node,value`` rows as a dict keyed by original id."""
    out = {}
    for k, r in enumerate(_rows(path)):
        if len(r) != 2:
            raise ValueError(f"{path}: row {k} needs node,value, got {r}")
        node = _node_id(r[0], f"{path}: row {k}")
        if node in out:
            raise ValueError(f"{path}: node {node} listed twice")
        out[node] = float(r[1])
    return out


def read_partition(path, graph: WeightedGraph) -> Partition:
    labels = {}
    for k, r in enumerate(_rows(path)):
        if len(r) != 2:
            raise ValueError(f"{path}: row {k} needs node,cluster, got {r}")
        labels[_node_id(r[0], f"{path}: row {k}")] = r[1]
    missing = [v for v in graph.node_ids if v not in labels]
    if missing:
        raise ValueError(f"{path}: no cluster for node(s) {missing[:5]}")
    extra = [v for v in labels if v not in graph.index]
    if extra:
        raise ValueError(f"{path}: unknown node(s) {extra[:5]}")
    raw = [labels[v] for v in graph.node_ids]
    try:
        raw = [int(c) for c in raw]
    except ValueError:
        pass
    return Partition.from_labels(raw)


def read_samples(path, graph: WeightedGraph) -> np.ndarray:
    """One node id per row; returns sorted compact indices."""
    ids = []
    for k, r in enumerate(_rows(path)):
        ids.append(_node_id(r[0], f"{path}: row {k}"))
    return np.unique(graph.from_ids(ids))


def _fmt(v: float) -> str:
    return repr(float(v))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(c) if isinstance(c, (float, np.floating)) else c for c in r])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def write_edges(path, graph: WeightedGraph) -> None:
    write_csv(path, ["i", "j", "weight"], graph.edge_triples())


def write_signal(path, graph: WeightedGraph, x) -> None:
    write_csv(path, ["node", "value"], zip(graph.node_ids, map(float, x)))


def write_partition(path, graph: WeightedGraph, part: Partition) -> None:
    write_csv(path, ["node", "cluster"], zip(graph.node_ids, part.cluster_of.tolist()))


def write_samples(path, graph: WeightedGraph, nodes) -> None:
    write_csv(path, ["node"], ([graph.node_ids[int(i)]] for i in nodes))


def write_flow(path, flow) -> None:
    write_csv(path, ["edge_index", "flow"], enumerate(map(float, flow)))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
