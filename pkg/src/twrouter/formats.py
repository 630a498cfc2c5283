"""Instance files: a JSON document and a DIMACS-like line format.

JSON grammar::

    {"vertices": <n>,                       vertices are 0 .. n-1
     "edges": [[u, v, cap], ...],           cap defaults to 1 when omitted
     "node_caps": [[v, cap], ...],          optional; required in ndp mode
     "pairs": [[s, t], ...],                pair ids are list positions
     "mode": "edp" | "ndp",
     "labels": {"<v>": "<name>", ...}}      optional side table

Line format (``c`` lines are comments)::

    p <n> <m> <k> [edp|ndp]
    e <u> <v> <cap>
    n <v> <cap>
    d <s> <t>
"""

from __future__ import annotations

import json
from pathlib import Path

from .graph import CapGraph, InputError, Instance, Mode


def instance_to_dict(inst: Instance) -> dict:
    g = inst.graph
    n = max(g.vertices, default=-1) + 1
    if set(g.vertices) != set(range(n)):
        raise InputError("serialization needs vertices numbered 0..n-1")
    out = {
        "vertices": n,
        "edges": [[u, v, c] for (u, v), c in g.edges.items()],
        "pairs": [list(inst.pairs[p]) for p in sorted(inst.pairs)],
        "mode": inst.mode.value,
    }
    if g.node_caps is not None:
        out["node_caps"] = [[v, g.node_caps[v]] for v in sorted(g.node_caps)]
    if inst.labels:
        out["labels"] = {str(v): name for v, name in sorted(inst.labels.items())}
    return out


def instance_from_dict(data: dict) -> Instance:
    try:
        n = int(data["vertices"])
        edges = [tuple(e) for e in data.get("edges", [])]
        pairs = {i: (int(s), int(t)) for i, (s, t) in enumerate(data.get("pairs", []))}
        mode = Mode(data.get("mode", "edp"))
        caps = None
        if data.get("node_caps") is not None:
            caps = {int(v): int(c) for v, c in data["node_caps"]}
        labels = {int(v): str(s) for v, s in data.get("labels", {}).items()} or None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed instance document: {exc}") from exc
    for e in edges:
        if len(e) not in (2, 3):
            raise InputError(f"malformed edge {list(e)}")
    g = CapGraph.build(range(n), edges, caps)
    return Instance(g, pairs, mode, labels=labels)


def parse_dimacs(text: str) -> Instance:
    n = None
    mode = None
    edges, caps, pairs = [], {}, []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag, args = parts[0], parts[1:]
        try:
            if tag == "p":
                n, m, k = (int(a) for a in args[:3])
                declared = (m, k)
                if len(args) > 3:
                    mode = Mode(args[3])
            elif tag == "e":
                edges.append(tuple(int(a) for a in args[:3]))
            elif tag == "n":
                caps[int(args[0])] = int(args[1])
            elif tag == "d":
                pairs.append((int(args[0]), int(args[1])))
            else:
                raise InputError(f"line {lineno}: unknown record {tag!r}")
        except (ValueError, IndexError) as exc:
            raise InputError(f"line {lineno}: {raw.strip()!r}") from exc
    if n is None:
        raise InputError("missing problem line")
    if declared != (len(edges), len(pairs)):
        raise InputError(f"problem line declares m, k = {declared}, found {(len(edges), len(pairs))}")
    if mode is None:
        mode = Mode.NDP if caps else Mode.EDP
    g = CapGraph.build(range(n), edges, caps or None)
    return Instance(g, dict(enumerate(pairs)), mode)


def emit_dimacs(inst: Instance) -> str:
    d = instance_to_dict(inst)
    lines = [f"p {d['vertices']} {len(d['edges'])} {len(d['pairs'])} {d['mode']}"]
    lines += [f"e {u} {v} {c}" for u, v, c in d["edges"]]
    lines += [f"n {v} {c}" for v, c in d.get("node_caps", [])]
    lines += [f"d {s} {t}" for s, t in d["pairs"]]
    return "\n".join(lines) + "\n"


def read_instance(path) -> Instance:
    """Read either format; JSON is recognised by a leading ``{``."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from exc
        return instance_from_dict(data)
    return parse_dimacs(text)


def dump_json(doc: dict) -> str:
    """One top-level key per line and one list item per line; inner lists stay inline."""
    lines = []
    for key, val in doc.items():
        if isinstance(val, list) and val:
            items = ",\n  ".join(json.dumps(v) for v in val)
            lines.append(f"{json.dumps(key)}: [\n  {items}\n ]")
        else:
            lines.append(f"{json.dumps(key)}: {json.dumps(val)}")
    return "{\n " + ",\n ".join(lines) + "\n}\n"


def write_instance(inst: Instance, path) -> None:
    path = Path(path)
    if path.suffix in (".gr", ".dimacs", ".txt"):
        path.write_text(emit_dimacs(inst))
    else:
        path.write_text(dump_json(instance_to_dict(inst)))
