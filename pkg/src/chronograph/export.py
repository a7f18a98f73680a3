"""Byte-stable graph serialization (GraphML, DOT, edge CSV) and atomic writes."""

from __future__ import annotations

import csv
import io
import os
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Any, Mapping, Optional, Union
from xml.sax.saxutils import escape, quoteattr

from .chronology import PeopleGraph
from .records import Gender, Lifespan, PersonRecord

FORMATS = {"graphml": "graphml", "dot": "dot", "edge_csv": "csv"}
GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def write_atomic(path: Union[str, Path], data: Union[str, bytes]) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _person_attrs(person: PersonRecord) -> dict[str, Any]:
    attrs: dict[str, Any] = {"gender": person.gender.value, "lang": person.lang}
    if person.lifespan is not None:
        attrs["birth"] = person.lifespan.birth
        if person.lifespan.death is not None:
            attrs["death"] = person.lifespan.death
        attrs["approx"] = person.lifespan.approx
    if person.categories:
        attrs["categories"] = "|".join(person.categories)
    return attrs


def node_attributes(graph, extra: Optional[Mapping[str, Mapping[str, Any]]] = None) -> dict[str, dict[str, Any]]:
    attrs: dict[str, dict[str, Any]] = {}
    for title in sorted(graph.nodes):
        row: dict[str, Any] = {}
        if isinstance(graph, PeopleGraph):
            row.update(_person_attrs(graph.nodes[title]))
        scores = getattr(graph, "scores", {}).get(title)
        if scores is not None:
            row.update(sentiment=scores.sentiment, emotionality=scores.emotionality, complexity=scores.complexity)
        if extra and title in extra:
            row.update({k: v for k, v in extra[title].items() if v is not None})
        attrs[title] = row
    return attrs


def _graphml_type(value: Any) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "long"
    if isinstance(value, float):
        return "double"
    return "string"


def _graphml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return escape(str(value))


def to_graphml(graph, extra=None) -> str:
    attrs = node_attributes(graph, extra)
    types: dict[str, str] = {}
    for row in attrs.values():
        for k, v in row.items():
            types.setdefault(k, _graphml_type(v))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<graphml xmlns="{GRAPHML_NS}">',
    ]
    for k in sorted(types):
        lines.append(f'  <key id={quoteattr(k)} for="node" attr.name={quoteattr(k)} attr.type="{types[k]}"/>')
    lines.append('  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>')
    kind = "directed" if graph.directed else "undirected"
    lines.append(f'  <graph id="G" edgedefault="{kind}">')
    for title, row in attrs.items():
        if not row:
            lines.append(f"    <node id={quoteattr(title)}/>")
            continue
        lines.append(f"    <node id={quoteattr(title)}>")
        for k in sorted(row):
            lines.append(f'      <data key={quoteattr(k)}>{_graphml_value(row[k])}</data>')
        lines.append("    </node>")
    for src, dst, w in graph.sorted_edges():
        lines.append(f'    <edge source={quoteattr(src)} target={quoteattr(dst)}><data key="weight">{w}</data></edge>')
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(graph, extra=None) -> str:
    arrow = "->" if graph.directed else "--"
    lines = [("digraph" if graph.directed else "graph") + " G {"]
    for title in sorted(graph.nodes):
        lines.append(f"  {_dot_id(title)};")
    for src, dst, w in graph.sorted_edges():
        lines.append(f"  {_dot_id(src)} {arrow} {_dot_id(dst)} [weight={w}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_csv(graph, extra=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["src", "dst", "weight"])
    writer.writerows(graph.sorted_edges())
    return buf.getvalue()


_WRITERS = {"graphml": to_graphml, "dot": to_dot, "edge_csv": to_edge_csv}


def render_graph(graph, fmt: str, extra: Optional[Mapping[str, Mapping[str, Any]]] = None) -> str:
    if fmt not in _WRITERS:
        raise ValueError(f"unknown graph format {fmt!r}; expected one of {sorted(_WRITERS)}")
    if len(graph.nodes) == 0:
        raise ValueError("refusing to export an empty graph")
    return _WRITERS[fmt](graph, extra)


def export_graph(graph, fmt: str, path: Union[str, Path], extra=None) -> Path:
    """Write ``graph`` in ``fmt`` (graphml, dot or edge_csv) to ``path``.

    Nodes are sorted by title and edges by (src, dst), so identical graphs
    always give identical bytes.
    """
    text = render_graph(graph, fmt, extra)
    write_atomic(path, text)
    return Path(path)


def _parse_value(text: Optional[str], kind: str) -> Any:
    text = text or ""
    if kind in ("int", "long"):
        return int(text)
    if kind in ("float", "double"):
        return float(text)
    if kind == "boolean":
        return text.strip().lower() == "true"
    return text


def read_graphml(path: Union[str, Path]) -> PeopleGraph:
    """Load a people graph written by :func:`to_graphml`."""
    tree = ET.parse(path)
    root = tree.getroot()
    ns = {"g": GRAPHML_NS}
    keys = {k.get("id"): (k.get("attr.name"), k.get("attr.type", "string")) for k in root.findall("g:key", ns)}
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise ValueError(f"{path}: no <graph> element")
    graph = PeopleGraph()
    for node in graph_el.findall("g:node", ns):
        data = {}
        for d in node.findall("g:data", ns):
            name, kind = keys.get(d.get("key"), (d.get("key"), "string"))
            data[name] = _parse_value(d.text, kind)
        lifespan = None
        if "birth" in data:
            lifespan = Lifespan(data["birth"], data.get("death"), bool(data.get("approx", False)))
        title = node.get("id")
        graph.nodes[title] = PersonRecord(
            title=title,
            lang=data.get("lang", ""),
            lifespan=lifespan,
            gender=Gender(data.get("gender", "unknown")),
            categories=[c for c in str(data.get("categories", "")).split("|") if c],
        )
    for edge in graph_el.findall("g:edge", ns):
        weight = 1
        for d in edge.findall("g:data", ns):
            if keys.get(d.get("key"), ("",))[0] == "weight":
                weight = int(d.text)
        graph.edges[(edge.get("source"), edge.get("target"))] = weight
    return graph
