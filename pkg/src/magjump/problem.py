"""Problem files: graph, potentials and run parameters in one document.

Schema (JSON, or YAML when the text is not valid JSON)::

    {
      "nodes": [{"id": "0", "mu": 1.0, "v": 0.0}, ...],
      "edges": [{"p": "0", "q": "1", "b": 1.0, "a": 0.0}, ...],
      "run":   {"t": [0.5], "num_paths": 10000, "seed": 0,
                "eps": [1.0, 0.1, 0.01], "f": null,
                "orientation": "from_to", "tolerances": {}}
    }

``mu`` defaults to 1, ``v`` and ``a`` to 0.  Each unordered edge appears once
and ``a`` is read in the direction ``p -> q``.  ``f`` is either a list of
values in node order or a mapping from node id to value; a complex value is
written ``[re, im]``.  Without ``f`` the indicator of the first node is used.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .forms import one_form
from .graph import WeightedGraph

ORIENTATIONS = ("from_to", "to_from")
DEFAULT_SEED_ENV = "MAGJUMP_SEED"


class SchemaError(ValueError):
    """Problem document failed to parse or validate; ``violations`` lists every issue."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class NodeRecord:
    id: str
    mu: float = 1.0
    v: float = 0.0


@dataclass
class EdgeRecord:
    p: str
    q: str
    b: float
    a: float = 0.0


def _default_seed() -> int:
    return int(os.environ.get(DEFAULT_SEED_ENV, "0"))


@dataclass
class RunParams:
    t: list[float] = field(default_factory=lambda: [0.5])
    num_paths: int = 10_000
    seed: int = field(default_factory=_default_seed)
    eps: list[float] = field(default_factory=lambda: [1.0, 0.1, 0.01])
    f: list | dict | None = None
    orientation: str = "from_to"
    tolerances: dict[str, float] = field(default_factory=dict)


@dataclass
class ProblemSpec:
    nodes: list[NodeRecord]
    edges: list[EdgeRecord]
    run: RunParams = field(default_factory=RunParams)

    def graph(self) -> WeightedGraph:
        return WeightedGraph.from_edges(
            [n.id for n in self.nodes],
            {(e.p, e.q): e.b for e in self.edges},
            {n.id: n.mu for n in self.nodes},
        )

    def magnetic_potential(self, G: WeightedGraph | None = None) -> np.ndarray:
        G = self.graph() if G is None else G
        return one_form(G, {(e.p, e.q): e.a for e in self.edges if e.b > 0})

    def electric_potential(self) -> np.ndarray:
        return np.array([n.v for n in self.nodes], dtype=float)

    def initial_function(self) -> np.ndarray:
        ids = [n.id for n in self.nodes]
        f = np.zeros(len(ids), dtype=complex)
        spec = self.run.f
        if spec is None:
            f[0] = 1.0
        elif isinstance(spec, dict):
            for k, val in spec.items():
                f[ids.index(str(k))] = _complex(val)
        else:
            f[:] = [_complex(val) for val in spec]
        return f

    def tolerance(self, name: str, default: float) -> float:
        return float(self.run.tolerances.get(name, default))


def _complex(val) -> complex:
    if isinstance(val, (list, tuple)):
        re, im = val
        return complex(float(re), float(im))
    return complex(float(val))


def _load_tree(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as json_err:
        import yaml

        try:
            tree = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"line {mark.line + 1}" if mark else "unknown line"
            raise SchemaError([f"parse error at {where}: {exc}"]) from None
        if not isinstance(tree, dict):
            raise SchemaError([f"parse error at line {json_err.lineno}: {json_err.msg}"]) from None
        return tree


def _number(rec: dict, key: str, where: str, problems: list, default=None):
    if key not in rec:
        if default is None:
            problems.append(f"{where}.{key}: missing")
        return default
    val = rec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        problems.append(f"{where}.{key}: expected a real number, got {val!r}")
        return default
    if not np.isfinite(val):
        problems.append(f"{where}.{key}: not finite")
    return float(val)


def parse(source: str | os.PathLike) -> ProblemSpec:
    """Parse a problem document from a path or from its text."""
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source
                                            and not source.lstrip().startswith(("{", "["))
                                            and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = str(source)
    tree = _load_tree(text)
    if not isinstance(tree, dict):
        raise SchemaError(["top level must be a mapping with keys nodes, edges, run"])
    problems: list[str] = []
    for key in tree:
        if key not in ("nodes", "edges", "run"):
            problems.append(f"{key}: unknown top-level key")

    nodes = []
    seen_ids = set()
    raw_nodes = tree.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        problems.append("nodes: expected a non-empty list")
        raw_nodes = []
    for i, rec in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(rec, dict) or "id" not in rec:
            problems.append(f"{where}: expected a record with an id")
            continue
        nid = str(rec["id"])
        if nid in seen_ids:
            problems.append(f"{where}.id: duplicate node id {nid!r}")
        seen_ids.add(nid)
        mu = _number(rec, "mu", where, problems, 1.0)
        v = _number(rec, "v", where, problems, 0.0)
        if mu is not None and not mu > 0:
            problems.append(f"{where}.mu: must be positive, got {mu!r}")
        nodes.append(NodeRecord(nid, mu, v))

    edges = []
    seen_pairs = set()
    raw_edges = tree.get("edges", [])
    if not isinstance(raw_edges, list):
        problems.append("edges: expected a list")
        raw_edges = []
    for i, rec in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(rec, dict) or "p" not in rec or "q" not in rec:
            problems.append(f"{where}: expected a record with p and q")
            continue
        p, q = str(rec["p"]), str(rec["q"])
        for key, nid in (("p", p), ("q", q)):
            if nid not in seen_ids:
                problems.append(f"{where}.{key}: unknown vertex {nid!r}")
        if p == q:
            problems.append(f"{where}: self-loop at {p!r}")
        pair = frozenset((p, q))
        if pair in seen_pairs:
            problems.append(f"{where}: duplicate edge {{{p}, {q}}}")
        seen_pairs.add(pair)
        b = _number(rec, "b", where, problems)
        a = _number(rec, "a", where, problems, 0.0)
        if b is not None and b < 0:
            problems.append(f"{where}.b: negative weight {b!r}")
        edges.append(EdgeRecord(p, q, b if b is not None else 0.0, a))

    run = RunParams()
    raw_run = tree.get("run", {}) or {}
    if not isinstance(raw_run, dict):
        problems.append("run: expected a mapping")
        raw_run = {}
    for key, val in raw_run.items():
        where = f"run.{key}"
        if key in ("t", "eps"):
            vals = val if isinstance(val, list) else [val]
            if not vals or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in vals):
                problems.append(f"{where}: expected positive numbers")
            else:
                setattr(run, key, [float(x) for x in vals])
        elif key in ("num_paths", "seed"):
            if isinstance(val, bool) or not isinstance(val, int) or (key == "num_paths" and val < 2):
                problems.append(f"{where}: expected an integer" + (" >= 2" if key == "num_paths" else ""))
            else:
                setattr(run, key, val)
        elif key == "orientation":
            if val not in ORIENTATIONS:
                problems.append(f"{where}: expected one of {ORIENTATIONS}")
            else:
                run.orientation = val
        elif key == "tolerances":
            if not isinstance(val, dict):
                problems.append(f"{where}: expected a mapping")
            else:
                run.tolerances = {str(k): float(x) for k, x in val.items()}
        elif key == "f":
            run.f = val
        else:
            problems.append(f"{where}: unknown run parameter")
    if run.f is not None:
        try:
            spec = ProblemSpec(nodes, edges, run)
            if isinstance(run.f, list) and len(run.f) != len(nodes):
                problems.append("run.f: length differs from number of nodes")
            else:
                spec.initial_function()
        except (ValueError, TypeError) as exc:
            problems.append(f"run.f: {exc}")
    if problems:
        raise SchemaError(problems)
    return ProblemSpec(nodes, edges, run)


def emit(spec: ProblemSpec) -> str:
    """Serialize to the JSON form accepted by :func:`parse`."""
    return json.dumps(asdict(spec), indent=2)
