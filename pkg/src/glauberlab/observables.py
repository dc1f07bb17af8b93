"""Built-in observables f : Sigma^n -> R and the function-spec mini-language used by the CLI.

Boolean built-ins take values in {0, 1}.  "Up" means the last alphabet symbol
(+1 for spins).

Function specs::

    dictator K            1{x_K = up}
    majority              1{#up > #down}; ties go to coordinate 0
    parity [i,j,...]      1{odd number of up among the listed coordinates} (all if omitted)
    tribes W              OR over consecutive blocks of width W of AND(x = up)
    indicator-of-set a,b  1{state index in {a, b, ...}}
    table PATH            truth-table file: lines "index value"; '#' starts a comment
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .statespace import StateSpace


class FunctionSpecError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Observable:
    name: str
    values: np.ndarray

    @property
    def is_boolean(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))


def _up(space: StateSpace) -> np.ndarray:
    return space.configs == space.q - 1


def dictator(space: StateSpace, k: int = 0) -> np.ndarray:
    k = space.check_coordinate(k)
    return _up(space)[:, k].astype(float)


def majority(space: StateSpace) -> np.ndarray:
    up = _up(space)
    margin = 2 * up.sum(axis=1) - space.n
    tie = up[:, 0]
    return np.where(margin > 0, 1.0, np.where(margin < 0, 0.0, tie.astype(float)))


def parity(space: StateSpace, coords=None) -> np.ndarray:
    coords = range(space.n) if coords is None else [space.check_coordinate(c) for c in coords]
    up = _up(space)[:, list(coords)]
    return (up.sum(axis=1) % 2).astype(float)


def tribes(space: StateSpace, width: int) -> np.ndarray:
    if width < 1:
        raise FunctionSpecError("tribe width must be positive")
    up = _up(space)
    blocks = [up[:, s:s + width].all(axis=1) for s in range(0, space.n, width)]
    return np.any(blocks, axis=0).astype(float)


def indicator_of_set(space: StateSpace, indices) -> np.ndarray:
    out = np.zeros(space.total)
    for k in indices:
        if not 0 <= k < space.total:
            raise FunctionSpecError(f"state index {k} out of range")
        out[k] = 1.0
    return out


def load_truth_table(space: StateSpace, path) -> np.ndarray:
    values = np.full(space.total, np.nan)
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            idx, val = int(parts[0]), float(parts[1])
        except (IndexError, ValueError):
            raise FunctionSpecError(f"{path}:{lineno}: expected 'index value'") from None
        if len(parts) != 2 or not 0 <= idx < space.total or not np.isfinite(val):
            raise FunctionSpecError(f"{path}:{lineno}: bad entry {line!r}")
        values[idx] = val
    if np.isnan(values).any():
        missing = int(np.flatnonzero(np.isnan(values))[0])
        raise FunctionSpecError(f"{path}: no value for state index {missing}")
    return values


def write_truth_table(path, values) -> None:
    lines = [f"{k} {float(v)!r}" for k, v in enumerate(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise FunctionSpecError(f"expected a list of integers, got {text!r}") from None


def parse_function_spec(spec: str, space: StateSpace) -> Observable:
    spec = spec.strip()
    head, _, rest = spec.partition(" ")
    rest = rest.strip()
    binary_only = {"majority", "parity", "tribes"}
    if head in binary_only and space.q != 2:
        raise FunctionSpecError(f"{head} needs a binary alphabet")
    if head == "dictator":
        values = dictator(space, _int_list(rest)[0] if rest else 0)
    elif head == "majority":
        values = majority(space)
    elif head == "parity":
        values = parity(space, _int_list(rest) if rest else None)
    elif head == "tribes":
        values = tribes(space, _int_list(rest)[0] if rest else 2)
    elif head == "indicator-of-set":
        values = indicator_of_set(space, _int_list(rest))
    elif head == "table":
        if not rest:
            raise FunctionSpecError("table needs a file path")
        values = load_truth_table(space, rest)
    else:
        raise FunctionSpecError(f"unknown function {head!r}")
    return Observable(spec, values)
