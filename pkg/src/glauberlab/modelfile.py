"""Model-spec files (YAML; JSON is accepted too).

Ising form::

    name: path3                 # optional, used as the model id
    n: 3
    alphabet: [-1, 1]           # optional; Ising needs exactly [-1, 1]
    beta: 0.2
    edges:                      # [i, j, J_ij]
      - [0, 1, 1.0]
      - [1, 2, 1.0]
    field: [0.0, 0.0, 0.0]      # optional, h_i

Lattice shorthand, replacing ``n`` and ``edges``: ``lattice: {d: 2, L: 1, J: 1.0}``
builds the free-boundary grid on {0..L}^d.

General Markov random field: give ``weights`` (q^n positive numbers, state
index order) and ``edges`` as ``[i, j]`` pairs naming the claimed graph.

Floats are written with ``repr`` so a spec survives load -> dump -> load unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .models import (GibbsMeasure, InteractionGraph, IsingModel, ModelError, build_ising,
                     build_mrf_from_table, lattice_graph)
from .statespace import SPIN, Alphabet, StateSpace

KNOWN_KEYS = ("name", "n", "alphabet", "beta", "edges", "field", "lattice", "weights")


class ModelSpecError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<spec>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class ModelSpec:
    n: int
    alphabet: tuple = (-1, 1)
    beta: float = 1.0
    edges: list = field(default_factory=list)  # [i, j, J] for Ising, [i, j] for weight tables
    field: list | None = None
    lattice: dict | None = None
    weights: list | None = None
    name: str = "model"

    def graph(self) -> InteractionGraph:
        return InteractionGraph(self.n, frozenset((e[0], e[1]) for e in self.edges))

    def build(self, max_states: int | None = None) -> GibbsMeasure:
        alphabet = Alphabet(tuple(self.alphabet))
        if self.weights is not None:
            kw = {} if max_states is None else {"max_states": max_states}
            space = StateSpace(self.n, alphabet, **kw)
            return build_mrf_from_table(space, self.weights, self.graph(), name=self.name)
        if alphabet != SPIN:
            raise ModelError("Ising models need the alphabet [-1, 1]")
        if max_states is not None and 2**self.n > max_states:
            StateSpace(self.n, SPIN, max_states=max_states)  # raises CapExceededError
        couplings = {(e[0], e[1]): e[2] for e in self.edges}
        model = IsingModel(self.graph(), couplings, tuple(self.field or ()), self.beta)
        return build_ising(model, self.name)

    def to_dict(self) -> dict:
        out = {"name": self.name}
        if self.lattice is not None:
            out["lattice"] = dict(self.lattice)
        else:
            out["n"] = self.n
            out["edges"] = [list(e) for e in self.edges]
        out["alphabet"] = list(self.alphabet)
        if self.weights is not None:
            out["weights"] = list(self.weights)
        else:
            out["beta"] = self.beta
        if self.field is not None:
            out["field"] = list(self.field)
        return out


def dump_model_spec(spec: ModelSpec) -> str:
    return yaml.safe_dump(spec.to_dict(), sort_keys=False, default_flow_style=None)


def _line(node) -> int:
    return node.start_mark.line + 1


def _number(node, kind, what, source):
    if not isinstance(node, yaml.ScalarNode):
        raise ModelSpecError(f"{what} must be a number", _line(node), source)
    try:
        value = yaml.safe_load(node.value) if node.tag.endswith(("int", "float")) else None
    except yaml.YAMLError:
        value = None
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ModelSpecError(f"{what} must be {'an integer' if kind is int else 'a number'}, got {node.value!r}",
                         _line(node), source)


def _seq(node, what, source):
    if not isinstance(node, yaml.SequenceNode):
        raise ModelSpecError(f"{what} must be a list", _line(node), source)
    return node.value


def parse_model_spec(text: str, source: str = "<spec>") -> ModelSpec:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ModelSpecError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                             mark.line + 1 if mark else None, source) from None
    if not isinstance(root, yaml.MappingNode):
        raise ModelSpecError("top level must be a mapping", _line(root) if root else None, source)
    nodes = {}
    for k, v in root.value:
        if k.value not in KNOWN_KEYS:
            raise ModelSpecError(f"unknown key {k.value!r}", _line(k), source)
        nodes[k.value] = v

    name = nodes["name"].value if "name" in nodes else Path(source).stem or "model"
    alphabet = (-1, 1)
    if "alphabet" in nodes:
        items = _seq(nodes["alphabet"], "alphabet", source)
        alphabet = tuple(yaml.safe_load(it.value) if isinstance(it, yaml.ScalarNode) else None for it in items)
        if len(alphabet) < 2 or len(set(alphabet)) != len(alphabet) or None in alphabet:
            raise ModelSpecError("alphabet must list at least two distinct scalars", _line(nodes["alphabet"]), source)

    lattice = None
    if "lattice" in nodes:
        lnode = nodes["lattice"]
        if not isinstance(lnode, yaml.MappingNode):
            raise ModelSpecError("lattice must be a mapping {d, L[, J, periodic]}", _line(lnode), source)
        lv = {k.value: v for k, v in lnode.value}
        for key in lv:
            if key not in ("d", "L", "J"):
                raise ModelSpecError(f"unknown lattice key {key!r}", _line(lnode), source)
        if "d" not in lv or "L" not in lv:
            raise ModelSpecError("lattice needs d and L", _line(lnode), source)
        lattice = {"d": _number(lv["d"], int, "lattice d", source), "L": _number(lv["L"], int, "lattice L", source)}
        if "J" in lv:
            lattice["J"] = _number(lv["J"], float, "lattice J", source)
        if lattice["d"] < 1 or lattice["L"] < 1:
            raise ModelSpecError("lattice d and L must be positive", _line(lnode), source)
        if "n" in nodes or "edges" in nodes:
            raise ModelSpecError("give either lattice or n/edges, not both", _line(lnode), source)
        g = lattice_graph(lattice["d"], lattice["L"])
        n = g.n
        J = lattice.get("J", 1.0)
        edges = [[i, j, J] for i, j in sorted(g.edges)]
    else:
        if "n" not in nodes:
            raise ModelSpecError("missing required key 'n' (or 'lattice')", _line(root), source)
        n = _number(nodes["n"], int, "n", source)
        if n < 1:
            raise ModelSpecError("n must be positive", _line(nodes["n"]), source)
        edges = []
        is_table = "weights" in nodes
        seen = set()
        for item in _seq(nodes["edges"], "edges", source) if "edges" in nodes else []:
            parts = _seq(item, "edge", source)
            if len(parts) not in ((2, 3) if is_table else (3,)):
                want = "[i, j]" if is_table else "[i, j, J_ij]"
                raise ModelSpecError(f"edge must be {want}", _line(item), source)
            i = _number(parts[0], int, "edge endpoint", source)
            j = _number(parts[1], int, "edge endpoint", source)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ModelSpecError(f"edge ({i}, {j}) invalid for n={n}", _line(item), source)
            if (min(i, j), max(i, j)) in seen:
                raise ModelSpecError(f"duplicate edge ({i}, {j})", _line(item), source)
            seen.add((min(i, j), max(i, j)))
            if is_table:
                edges.append([i, j])
            else:
                edges.append([i, j, _number(parts[2], float, "coupling", source)])

    beta = _number(nodes["beta"], float, "beta", source) if "beta" in nodes else 1.0
    field_ = None
    if "field" in nodes:
        field_ = [_number(v, float, "field entry", source) for v in _seq(nodes["field"], "field", source)]
        if len(field_) != n:
            raise ModelSpecError(f"field has {len(field_)} entries, expected {n}", _line(nodes["field"]), source)
    weights = None
    if "weights" in nodes:
        weights = [_number(v, float, "weight", source) for v in _seq(nodes["weights"], "weights", source)]
        if len(weights) != len(alphabet) ** n:
            raise ModelSpecError(f"weights has {len(weights)} entries, expected {len(alphabet) ** n}",
                                 _line(nodes["weights"]), source)
        if any(w <= 0 for w in weights):
            raise ModelSpecError("weights must be strictly positive", _line(nodes["weights"]), source)
    return ModelSpec(n, alphabet, beta, edges, field_, lattice, weights, name)


def load_model_spec(path) -> ModelSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelSpecError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_model_spec(text, str(path))
