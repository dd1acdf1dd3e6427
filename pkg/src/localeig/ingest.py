"""Loaders turning external tables into :class:`Graph` objects.

Sources may be paths or open text streams. Node ids are sorted
lexicographically and parallel weights are combined with ``math.fsum``, so
shuffling input rows never changes the resulting matrices.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from collections import defaultdict
from dataclasses import dataclass

from .exceptions import IngestWarning, InputError
from .graph import Graph

KINEMATIC_ACCEL = 2.0  # m/s^2
SPEED_TO_MS = {"m/s": 1.0, "km/h": 1 / 3.6, "kph": 1 / 3.6, "mph": 0.44704}
ROAD_WEIGHTINGS = ("inverse-one-plus-time", "inverse-time")
CONTACT_WEIGHTINGS = ("count", "duration")
_WEIGHTING_ALIASES = {"inverse-onepluststime": "inverse-one-plus-time"}
STAFF_LABELS = ("Teachers",)


@dataclass(frozen=True)
class ContactRecord:
    t: int
    i: str
    j: str
    ci: str = None
    cj: str = None


@dataclass(frozen=True)
class RoadEdgeRecord:
    u: str
    v: str
    length: float
    speed_limit: float
    unit: str = "mph"

    @property
    def speed_ms(self) -> float:
        return self.speed_limit * SPEED_TO_MS[self.unit]


def _read_text(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return fh.read()
    raise InputError(f"cannot read from {type(source).__name__}")


def _float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{what} {text!r} is not a number", line=line) from None
    if not math.isfinite(value):
        raise InputError(f"{what} {text!r} is not finite", line=line)
    return value


def _pair_key(u: str, v: str, directed: bool):
    return (u, v) if directed or u <= v else (v, u)


def _assemble(weights: dict, nodes, directed: bool, communities=None, coords=None) -> Graph:
    ids = sorted(nodes)
    index = {v: i for i, v in enumerate(ids)}
    edges = tuple((index[u], index[v], math.fsum(ws)) for (u, v), ws in sorted(weights.items()))
    return Graph(tuple(ids), edges, directed, communities, coords)


def load_edge_list(source, directed: bool = False, delimiter: str = ",", header=None) -> Graph:
    """Read ``source,target[,weight]`` rows; weight defaults to 1.

    ``header=None`` skips a first row that looks like column names.
    """
    rows = csv.reader(io.StringIO(_read_text(source)), delimiter=delimiter)
    weights = defaultdict(list)
    nodes = set()
    first = True
    for line, row in enumerate(rows, start=1):
        row = [f.strip() for f in row]
        if not row or not any(row) or row[0].startswith("#"):
            continue
        if first:
            first = False
            looks_like_header = row[0].lower() in ("source", "src", "from") or (
                len(row) == 3 and not _is_number(row[2]))
            if header or (header is None and looks_like_header):
                continue
        if len(row) not in (2, 3) or not row[0] or not row[1]:
            raise InputError(f"expected 'source,target[,weight]', got {row!r}", line=line)
        w = _float(row[2], "weight", line) if len(row) == 3 else 1.0
        if w < 0:
            raise InputError(f"negative weight {w}", line=line)
        u, v = row[0], row[1]
        nodes.update((u, v))
        weights[_pair_key(u, v, directed)].append(w)
    return _assemble(weights, nodes, directed)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_labels(source) -> dict:
    labels = {}
    for line, raw in enumerate(_read_text(source).splitlines(), start=1):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        fields = [f.strip() for f in (raw.split(",") if "," in raw else raw.split())]
        if len(fields) < 2:
            raise InputError(f"expected 'node_id,community', got {raw!r}", line=line)
        if line == 1 and fields[0].lower() in ("node_id", "id", "node"):
            continue
        node, label = fields[0], fields[1]
        if labels.get(node, label) != label:
            raise InputError(f"node {node} listed with labels {labels[node]!r} and {label!r}", line=line)
        labels[node] = label
    return labels


def parse_contacts(source) -> list:
    """Parse ``t i j [Ci Cj]`` whitespace-separated records."""
    records = []
    for line, raw in enumerate(_read_text(source).splitlines(), start=1):
        fields = raw.split()
        if not fields or fields[0].startswith("#"):
            continue
        if len(fields) not in (3, 5):
            raise InputError(f"expected 't i j [Ci Cj]', got {raw.strip()!r}", line=line)
        t = _float(fields[0], "timestamp", line)
        ci, cj = (fields[3], fields[4]) if len(fields) == 5 else (None, None)
        records.append((line, ContactRecord(int(t), fields[1], fields[2], ci, cj)))
    return records


def load_contacts(source, metadata=None, weighting: str = "count",
                  resolution: float = 20.0) -> Graph:
    """Aggregate a temporal contact log into an undirected weighted graph.

    Edge weight is the number of contact records for the pair, or with
    ``weighting='duration'`` that count times ``resolution`` seconds.
    Community labels come from the inline ``Ci Cj`` columns and/or the
    ``metadata`` table; contradictory labels raise InputError.
    """
    if weighting not in CONTACT_WEIGHTINGS:
        raise InputError(f"unknown contact weighting {weighting!r}")
    side = _read_labels(metadata) if metadata is not None else {}
    labels = {}
    counts = defaultdict(int)
    nodes = set()
    self_contacts = 0

    def assign(node, label, line):
        if label is None:
            return
        if labels.get(node, label) != label:
            raise InputError(f"node {node} has labels {labels[node]!r} and {label!r}", line=line)
        labels[node] = label

    for line, rec in parse_contacts(source):
        if rec.i == rec.j:
            self_contacts += 1
            continue
        nodes.update((rec.i, rec.j))
        assign(rec.i, rec.ci, line)
        assign(rec.j, rec.cj, line)
        counts[_pair_key(rec.i, rec.j, False)] += 1
    if self_contacts:
        warnings.warn(f"skipped {self_contacts} self-contact record(s)", IngestWarning, stacklevel=2)
    for node in nodes:
        if node in side:
            assign(node, side[node], None)
    factor = 1.0 if weighting == "count" else float(resolution)
    weights = {pair: [c * factor] for pair, c in counts.items()}
    return _assemble(weights, nodes, False, labels or None)


def travel_time(length: float, speed: float, accel: float = KINEMATIC_ACCEL) -> float:
    """Free-flow time ``length / speed``, floored by ``sqrt(2 * length / accel)``.

    The floor is the time a car starting from rest needs to cover the link.
    """
    if length <= 0 or speed <= 0:
        raise InputError(f"length and speed must be positive, got {length}, {speed}")
    return max(length / speed, math.sqrt(2.0 * length / accel))


def _table(source, required) -> list:
    reader = csv.DictReader(io.StringIO(_read_text(source)))
    if reader.fieldnames is None:
        return []
    fields = [f.strip() for f in reader.fieldnames]
    missing = [c for c in required if c not in fields]
    if missing:
        raise InputError(f"table is missing columns {missing}")
    reader.fieldnames = fields
    # data rows start on line 2
    return [(line, {k: (v or "").strip() for k, v in row.items() if k is not None})
            for line, row in enumerate(reader, start=2)]


def load_road_network(nodes, edges, speed_unit: str = "mph",
                      weighting: str = "inverse-one-plus-time",
                      accel: float = KINEMATIC_ACCEL) -> Graph:
    """Build an undirected travel-time-weighted road graph.

    ``nodes`` has columns ``id,lat,lon``; ``edges`` has ``u,v,length_m,speed``
    and an optional per-row ``speed_unit``. Duplicate or opposite-direction
    links between the same junctions keep the fastest travel time ``t``, and
    the edge weight is ``1 / (1 + t)`` (or ``1 / t`` for ``inverse-time``).
    """
    weighting = _WEIGHTING_ALIASES.get(weighting, weighting)
    if weighting not in ROAD_WEIGHTINGS:
        raise InputError(f"unknown road weighting {weighting!r}")
    if speed_unit not in SPEED_TO_MS:
        raise InputError(f"unknown speed unit {speed_unit!r}")
    coords = {}
    for line, row in _table(nodes, ("id", "lat", "lon")):
        node = row["id"]
        if node in coords:
            raise InputError(f"duplicate node id {node}", line=line)
        coords[node] = (_float(row["lon"], "lon", line), _float(row["lat"], "lat", line))
    best = {}
    loops = 0
    for line, row in _table(edges, ("u", "v", "length_m", "speed")):
        u, v = row["u"], row["v"]
        for end in (u, v):
            if end not in coords:
                raise InputError(f"edge endpoint {end!r} missing from node table", line=line)
        unit = row.get("speed_unit") or speed_unit
        if unit not in SPEED_TO_MS:
            raise InputError(f"unknown speed unit {unit!r}", line=line)
        rec = RoadEdgeRecord(u, v, _float(row["length_m"], "length", line),
                             _float(row["speed"], "speed", line), unit)
        if rec.length <= 0 or rec.speed_limit <= 0:
            raise InputError("length and speed must be positive", line=line)
        if u == v:
            loops += 1
            continue
        t = travel_time(rec.length, rec.speed_ms, accel)
        key = _pair_key(u, v, False)
        best[key] = min(best.get(key, math.inf), t)
    if loops:
        warnings.warn(f"skipped {loops} self-loop road link(s)", IngestWarning, stacklevel=2)
    if weighting == "inverse-one-plus-time":
        weights = {k: [1.0 / (1.0 + t)] for k, t in best.items()}
    else:
        weights = {k: [1.0 / t] for k, t in best.items()}
    return _assemble(weights, coords.keys(), False, coords=coords)


def write_edge_list(g: Graph, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["source", "target", "weight"])
    for i, j, w in g.edges:
        writer.writerow([g.node_ids[i], g.node_ids[j], f"{w:.12g}"])


def write_communities(g: Graph, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["node_id", "community"])
    for node in g.node_ids:
        if g.communities and node in g.communities:
            writer.writerow([node, g.communities[node]])
