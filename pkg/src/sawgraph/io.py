"""Graph files and the tabular (CSV/JSON) output schemas.

Edge-list text format::

    # optional comments, '# name: <label>' is kept as the graph name
    n 10 root 0
    0 1
    0 4
    ...

JSON alternative: ``{"n": 10, "root": 0, "edges": [[0, 1], ...], "name": "..."}``.
Saves are canonical: edges sorted lexicographically with ``u < v``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import EndpointOutOfRange, GraphParseError
from .graph import Graph, build_graph


def _strip_comment(line):
    return line.split("#", 1)[0].strip()


def parse_edge_list(text: str) -> Graph:
    n = root = None
    name = ""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.lower().startswith("name:") and not name:
                name = body[5:].strip()
            continue
        line = _strip_comment(raw)
        if not line:
            continue
        tokens = line.split()
        if n is None:
            if len(tokens) != 4 or tokens[0] != "n" or tokens[2] != "root":
                raise GraphParseError(f"expected header 'n <count> root <id>', got {line!r}", lineno)
            try:
                n, root = int(tokens[1]), int(tokens[3])
            except ValueError:
                raise GraphParseError(f"non-integer header field in {line!r}", lineno) from None
            if n < 0:
                raise GraphParseError("vertex count must be non-negative", lineno)
            continue
        if len(tokens) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"non-integer vertex in {line!r}", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise EndpointOutOfRange(f"line {lineno}: edge ({u}, {v}) outside [0, {n})")
        edges.append((u, v))
    if n is None:
        raise GraphParseError("missing header 'n <count> root <id>'", 1)
    return build_graph(n, edges, root=root, name=name)


def format_edge_list(g: Graph) -> str:
    lines = []
    if g.name:
        lines.append(f"# name: {g.name}")
    lines.append(f"n {g.n} root {g.root}")
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def parse_json_graph(text: str) -> Graph:
    try:
        obj = json.loads(text)
        n, root, edges = int(obj["n"]), int(obj.get("root", 0)), obj["edges"]
    except (ValueError, KeyError, TypeError) as exc:
        raise GraphParseError(f"bad JSON graph: {exc}") from None
    return build_graph(n, [tuple(e) for e in edges], root=root, name=obj.get("name", ""))


def format_json_graph(g: Graph) -> str:
    obj = {"n": g.n, "root": g.root, "edges": [list(e) for e in g.edges()]}
    if g.name:
        obj["name"] = g.name
    return json.dumps(obj, separators=(",", ":")) + "\n"


def load_graph(path) -> Graph:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_json_graph(text)
    return parse_edge_list(text)


def save_graph(g: Graph, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(format_json_graph(g))
    else:
        path.write_text(format_edge_list(g))


# ------------------------------------------------------------------ tables


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (np.integer,)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_table(columns, rows, meta=None, fmt="csv") -> str:
    """Serialize rows (dicts keyed by ``columns``) with a metadata header.

    CSV: ``# key: value`` header lines then a header row. JSON:
    ``{"meta": {...}, "rows": [...]}`` with the same field names.
    """
    meta = meta or {}
    if fmt == "json":
        out = {"meta": meta, "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(out, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        if not isinstance(value, str):
            value = json.dumps(value, sort_keys=True)
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return _fmt(value)
    return value


def _parse_cell(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_table(text: str):
    """Inverse of :func:`format_table` for CSV; returns ``(columns, rows, meta)``.

    Integer cells come back as Python ``int`` (arbitrary precision), so census
    counts survive the round trip exactly.
    """
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        rows = obj["rows"]
        columns = list(rows[0].keys()) if rows else []
        return columns, rows, obj.get("meta", {})
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            value = value.strip()
            try:
                meta[key.strip()] = json.loads(value)
            except ValueError:
                meta[key.strip()] = value
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader, [])
    rows = [{c: _parse_cell(cell) for c, cell in zip(columns, rec)} for rec in reader]
    return columns, rows, meta
