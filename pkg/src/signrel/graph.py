"""Interaction multigraph ingestion, node attributes and surveyed relations.

Node ids are opaque strings. Dense indices follow first appearance in the
record stream; every output keeps the original ids.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidWindowError, ParseError

logger = logging.getLogger(__name__)

RELATION_KINDS = ("binary", "ordered", "continuous")


@dataclass(frozen=True)
class IngestReport:
    records: int = 0
    kept: int = 0
    self_loops: int = 0
    out_of_window: int = 0


@dataclass(frozen=True)
class InteractionGraph:
    """Directed multigraph stored as dyad counts ``A[v, w]``.

    Undirected sources are expanded symmetrically, so each undirected event
    contributes one edge in each direction and ``m`` counts edge endpoints.
    """

    nodes: tuple[str, ...]
    edge_counts: Mapping[tuple[int, int], int]
    m: int
    directed: bool
    report: IngestReport = field(default_factory=IngestReport, compare=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def count(self, v: str, w: str) -> int:
        idx = self.index
        return self.edge_counts.get((idx[v], idx[w]), 0)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for (i, j), c in self.edge_counts.items():
            a[i, j] = c
        return a

    def edges_by_id(self) -> dict[tuple[str, str], int]:
        return {(self.nodes[i], self.nodes[j]): c for (i, j), c in self.edge_counts.items()}

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(b"directed" if self.directed else b"undirected")
        for (v, w), c in sorted(self.edges_by_id().items()):
            h.update(f"{v}\x1f{w}\x1f{c}\n".encode())
        return h.hexdigest()[:16]


def _as_record(rec, lineno):
    if isinstance(rec, Mapping):
        rec = (rec.get("source"), rec.get("target"), rec.get("timestamp"), rec.get("weight"))
    if len(rec) < 2 or len(rec) > 4:
        raise ParseError(f"expected 2 to 4 fields, got {len(rec)}", lineno)
    src, dst = rec[0], rec[1]
    ts = rec[2] if len(rec) > 2 else None
    weight = rec[3] if len(rec) > 3 else None
    src = "" if src is None else str(src).strip()
    dst = "" if dst is None else str(dst).strip()
    if not src or not dst:
        raise ParseError("empty node id", lineno)
    if ts is not None and ts != "":
        try:
            ts = int(ts)
        except (TypeError, ValueError):
            raise ParseError(f"timestamp {ts!r} is not an integer", lineno) from None
    else:
        ts = None
    if weight is None or weight == "":
        weight = 1
    else:
        try:
            fw = float(weight)
        except (TypeError, ValueError):
            raise ParseError(f"weight {weight!r} is not a number", lineno) from None
        if fw != int(fw) or fw < 1:
            raise ParseError(f"weight {weight!r} is not a positive integer", lineno)
        weight = int(fw)
    return src, dst, ts, weight


def ingest_interactions(
    records: Iterable,
    directed: bool = False,
    window: tuple[int, int] | None = None,
    nodes: Sequence[str] = (),
) -> InteractionGraph:
    """Build an :class:`InteractionGraph` from ``(source, target[, timestamp][, weight])`` records.

    ``window`` keeps records with ``t0 <= timestamp < t1``. ``nodes`` registers
    ids up front so that survey-only individuals get an index even without
    interactions.
    """
    if window is not None:
        t0, t1 = window
        if t1 <= t0:
            raise InvalidWindowError(f"empty time window [{t0}, {t1})")
    order: dict[str, int] = {}
    for v in nodes:
        order.setdefault(str(v), len(order))
    counts: Counter = Counter()
    n_rec = kept = loops = outside = 0
    for lineno, raw in enumerate(records, start=1):
        src, dst, ts, weight = _as_record(raw, lineno)
        n_rec += 1
        if window is not None:
            if ts is None:
                raise ParseError("time window given but record has no timestamp", lineno)
            if not (window[0] <= ts < window[1]):
                outside += 1
                continue
        i = order.setdefault(src, len(order))
        j = order.setdefault(dst, len(order))
        if i == j:
            loops += 1
            continue
        kept += 1
        counts[i, j] += weight
        if not directed:
            counts[j, i] += weight
    if loops:
        logger.info("dropped %d self-interactions", loops)
    report = IngestReport(records=n_rec, kept=kept, self_loops=loops, out_of_window=outside)
    return InteractionGraph(
        nodes=tuple(order),
        edge_counts=dict(counts),
        m=sum(counts.values()),
        directed=directed,
        report=report,
    )


def degrees(g: InteractionGraph) -> tuple[np.ndarray, np.ndarray]:
    """Out- and in-degree vectors (weighted by multiplicity), indexed like ``g.nodes``."""
    k_out = np.zeros(g.n, dtype=np.int64)
    k_in = np.zeros(g.n, dtype=np.int64)
    for (i, j), c in g.edge_counts.items():
        k_out[i] += c
        k_in[j] += c
    return k_out, k_in


def _read_csv(path, required):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: missing header row") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"{path}: missing required column(s) {', '.join(missing)}", 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: expected {len(header)} fields, got {len(row)}", lineno)
            rows.append((lineno, dict(zip(header, (c.strip() for c in row)))))
    return header, rows


def read_edge_list(
    path,
    directed: bool = False,
    window: tuple[int, int] | None = None,
    nodes: Sequence[str] = (),
) -> InteractionGraph:
    """Load ``source,target[,timestamp][,weight]`` CSV into a graph."""
    _, rows = _read_csv(path, ("source", "target"))
    records = []
    for lineno, row in rows:
        try:
            records.append(_as_record(
                (row["source"], row["target"], row.get("timestamp"), row.get("weight")), lineno
            ))
        except ParseError as exc:
            err = ParseError(f"{path}: {exc}")
            err.line = exc.line
            raise err from None
    return ingest_interactions(records, directed=directed, window=window, nodes=nodes)


def write_edge_list(g: InteractionGraph, path) -> None:
    """Write ``source,target,weight`` in the graph's own orientation.

    Undirected graphs list each pair once, so re-ingesting with
    ``directed=g.directed`` reproduces the counts.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight"])
        for (i, j) in sorted(g.edge_counts):
            if g.directed or i < j:
                w.writerow([g.nodes[i], g.nodes[j], g.edge_counts[i, j]])


@dataclass(frozen=True)
class NodeAttributes:
    values: Mapping[str, Mapping[str, str]]
    categories: Mapping[str, tuple[str, ...]]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.categories)

    def get(self, node: str, attribute: str) -> str | None:
        return self.values.get(node, {}).get(attribute)

    def column(self, attribute: str) -> dict[str, str]:
        return {v: a[attribute] for v, a in self.values.items() if attribute in a}


def load_attributes(
    path,
    categories: Mapping[str, Iterable[str]] | None = None,
    graph: InteractionGraph | None = None,
) -> NodeAttributes:
    """Read ``node,attr1,attr2,...``.

    Empty cells mean the attribute is unknown for that node. When
    ``categories`` declares the allowed values of an attribute, anything else
    is a parse error; otherwise the category set is the observed one.
    """
    header, rows = _read_csv(path, ("node",))
    attrs = [h for h in header if h != "node"]
    declared = {k: tuple(v) for k, v in (categories or {}).items()}
    known = set(graph.nodes) if graph is not None else None
    values: dict[str, dict[str, str]] = {}
    seen: dict[str, set] = {a: set() for a in attrs}
    unknown = 0
    for lineno, row in rows:
        node = row["node"]
        if not node:
            raise ParseError(f"{path}: empty node id", lineno)
        if known is not None and node not in known:
            unknown += 1
            continue
        entry = {}
        for a in attrs:
            val = row[a]
            if val == "":
                continue
            if a in declared and val not in declared[a]:
                raise ParseError(f"{path}: value {val!r} not in declared categories of {a!r}", lineno)
            entry[a] = val
            seen[a].add(val)
        values[node] = entry
    if unknown:
        logger.warning("%s: %d node id(s) not in the interaction graph were skipped", path, unknown)
    cats = {a: declared.get(a, tuple(sorted(seen[a]))) for a in attrs}
    return NodeAttributes(values=values, categories=cats)


@dataclass(frozen=True)
class RelationLabels:
    """Surveyed relations ``r[v, w]`` over a set of surveyed individuals."""

    kind: str
    entries: Mapping[tuple[str, str], float]
    surveyed: frozenset
    levels: int | None = None

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        if self.kind == "ordered" and (self.levels is None or self.levels < 3):
            raise ValueError("ordered relations need levels >= 3")
        for (v, w), r in self.entries.items():
            _check_relation(self.kind, r, self.levels)
            if v not in self.surveyed or w not in self.surveyed:
                raise ValueError(f"labelled dyad ({v}, {w}) outside the surveyed set")

    def __len__(self):
        return len(self.entries)

    def unordered(self) -> dict[tuple[str, str], float]:
        """One value per unordered dyad; both directions are averaged if they differ."""
        out: dict[tuple[str, str], list] = {}
        for (v, w), r in self.entries.items():
            key = (v, w) if v <= w else (w, v)
            out.setdefault(key, []).append(r)
        if self.kind == "binary":
            return {k: float(max(rs)) for k, rs in out.items()}
        if self.kind == "ordered":
            return {k: float(rs[0]) for k, rs in out.items()}
        return {k: float(sum(rs) / len(rs)) for k, rs in out.items()}


def _check_relation(kind, r, levels):
    if kind == "binary" and r not in (0, 1):
        raise ValueError(f"binary relation {r!r} not in {{0, 1}}")
    if kind == "ordered" and (r != int(r) or not 1 <= r <= levels):
        raise ValueError(f"ordered relation {r!r} not in 1..{levels}")
    if kind == "continuous" and not 0.0 < r < 1.0:
        raise ValueError(f"continuous relation {r!r} outside (0, 1)")


def make_relations(
    entries: Mapping[tuple[str, str], float],
    kind: str,
    levels: int | None = None,
    surveyed: Iterable[str] | None = None,
    symmetrize: bool = True,
) -> RelationLabels:
    """Build labels; with ``symmetrize`` a relation declared in one direction holds in both."""
    ent = {(str(v), str(w)): r for (v, w), r in entries.items() if v != w}
    if symmetrize:
        sym = {}
        for (v, w), r in ent.items():
            sym[v, w] = r if kind != "binary" else max(r, sym.get((v, w), 0))
            back = ent.get((w, v))
            if back is None:
                sym[w, v] = r if kind != "binary" else max(r, sym.get((w, v), 0))
        ent = sym
    nodes = set(surveyed) if surveyed is not None else set()
    for v, w in ent:
        nodes.add(v)
        nodes.add(w)
    return RelationLabels(kind=kind, entries=ent, surveyed=frozenset(nodes), levels=levels)


def load_relations(
    path,
    kind: str,
    levels: int | None = None,
    surveyed: Iterable[str] | None = None,
    symmetrize: bool = True,
) -> RelationLabels:
    """Read ``source,target,relation``.

    The surveyed set is every id in the file plus ``surveyed``. Out-of-range
    values raise :class:`ParseError` with the offending line.
    """
    if kind not in RELATION_KINDS:
        raise ParseError(f"unknown relation kind {kind!r}")
    if kind == "ordered" and (levels is None or levels < 3):
        raise ParseError("ordered relations need levels >= 3")
    _, rows = _read_csv(path, ("source", "target", "relation"))
    entries = {}
    for lineno, row in rows:
        v, w = row["source"], row["target"]
        if not v or not w:
            raise ParseError(f"{path}: empty node id", lineno)
        try:
            r = float(row["relation"])
        except ValueError:
            raise ParseError(f"{path}: relation {row['relation']!r} is not a number", lineno) from None
        try:
            _check_relation(kind, r, levels)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", lineno) from None
        if kind != "continuous":
            r = int(r)
        entries[v, w] = r
    return make_relations(entries, kind, levels=levels, surveyed=surveyed, symmetrize=symmetrize)
