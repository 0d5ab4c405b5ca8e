"""Byte-stable serialization for rayed graphs: JSON, edge-list text, DOT."""

from __future__ import annotations

import json
from typing import Any

from .graphs import RayedGraph


def to_json_dict(g: RayedGraph) -> dict[str, Any]:
    return {
        "vertices": list(g.vertices),
        "edges": [
            {"id": eid, "u": uv[0], "v": uv[1]} for eid, uv in sorted(g.edges.items())
        ],
        "rays": [{"id": rid, "at": at} for rid, at in sorted(g.rays.items())],
    }


def from_json_dict(data: dict[str, Any]) -> RayedGraph:
    try:
        vertices = data["vertices"]
        edges = {e["id"]: (e["u"], e["v"]) for e in data.get("edges", [])}
        rays = {r["id"]: r["at"] for r in data.get("rays", [])}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph JSON: {exc}") from exc
    if len(edges) != len(data.get("edges", [])):
        raise ValueError("duplicate edge id in graph JSON")
    if len(rays) != len(data.get("rays", [])):
        raise ValueError("duplicate ray id in graph JSON")
    return RayedGraph(vertices, edges, rays)


def dumps(g: RayedGraph) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_json_dict(g), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> RayedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("graph JSON must be an object")
    return from_json_dict(data)


def save(g: RayedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(g))


def load(path: str) -> RayedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps_map(mapping: dict[str, str]) -> str:
    """Canonical JSON for an edge bijection: {"map": {id: id}}."""
    return json.dumps({"map": dict(sorted(mapping.items()))}, sort_keys=True, indent=2) + "\n"


def loads_map(text: str) -> dict[str, str]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("map"), dict):
        raise ValueError('bijection JSON must be an object with a "map" object')
    out = {}
    for k, v in data["map"].items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ValueError("bijection entries must map strings to strings")
        out[k] = v
    return out


def load_map(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_map(fh.read())


def to_edge_list_text(g: RayedGraph) -> str:
    """Line format: `u v eid` per edge, `RAY at rid` per ray, and
    `VERTEX v` for vertices that no edge or ray would otherwise mention.
    Canonically ordered, deterministic."""
    mentioned = set()
    lines = []
    for eid, (u, v) in sorted(g.edges.items(), key=lambda kv: kv[0]):
        lines.append(f"{u} {v} {eid}")
        mentioned.update((u, v))
    for rid, at in sorted(g.rays.items()):
        lines.append(f"RAY {at} {rid}")
        mentioned.add(at)
    for v in g.vertices:
        if v not in mentioned:
            lines.append(f"VERTEX {v}")
    return "\n".join(lines) + ("\n" if lines else "")


def from_edge_list_text(text: str) -> RayedGraph:
    vertices: set = set()
    edges: dict[str, tuple[str, str]] = {}
    rays: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "VERTEX":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: VERTEX takes one id")
            vertices.add(parts[1])
        elif parts[0] == "RAY":
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: RAY takes attachment and id")
            _, at, rid = parts
            if rid in rays:
                raise ValueError(f"line {lineno}: duplicate ray id {rid!r}")
            rays[rid] = at
            vertices.add(at)
        else:
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: edge lines are `u v id`")
            u, v, eid = parts
            if eid in edges:
                raise ValueError(f"line {lineno}: duplicate edge id {eid!r}")
            edges[eid] = (u, v)
            vertices.update((u, v))
    return RayedGraph(vertices, edges, rays)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: RayedGraph, name: str = "G") -> str:
    """Undirected DOT. Rays render as dashed arrowed stubs to phantom nodes."""
    lines = [f"graph {_dot_quote(name)} {{"]
    for v in g.vertices:
        lines.append(f"  {_dot_quote(v)};")
    for eid, (u, v) in sorted(g.edges.items(), key=lambda kv: kv[0]):
        lines.append(f"  {_dot_quote(u)} -- {_dot_quote(v)} [label={_dot_quote(eid)}];")
    for rid, at in sorted(g.rays.items()):
        stub = _dot_quote(f"ray:{rid}")
        lines.append(f"  {stub} [shape=none, label=\"\"];")
        lines.append(
            f"  {_dot_quote(at)} -- {stub} "
            f"[label={_dot_quote(rid)}, style=dashed, dir=forward, arrowhead=vee];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
