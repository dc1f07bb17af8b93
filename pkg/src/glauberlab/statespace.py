"""Finite configuration spaces Sigma^n with mixed-radix indexing and Hamming geometry.

Coordinate 0 is the least significant digit, so the state index of ``x`` is
``sum_i x_i * q**i``.  Reshaping a length-``q**n`` vector with
``order="F"`` to shape ``(q,) * n`` therefore puts coordinate ``i`` on axis ``i``;
every dense routine in the package relies on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

DEFAULT_MAX_STATES = 2**24


class StateSpaceError(ValueError):
    """Invalid configuration, coordinate, or an over-cap state space."""


class CapExceededError(StateSpaceError):
    pass


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if len(symbols) < 2:
            raise StateSpaceError("alphabet needs at least two symbols")
        if len(set(symbols)) != len(symbols):
            raise StateSpaceError(f"alphabet symbols must be distinct: {symbols}")
        object.__setattr__(self, "symbols", symbols)

    @property
    def q(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise StateSpaceError(f"unknown symbol {symbol!r}") from None


SPIN = Alphabet((-1, 1))


@dataclass(frozen=True)
class StateSpace:
    """The space Sigma^n, enumerated explicitly.

    ``max_states`` caps ``q**n``; dense operators are ``(q**n)**2`` so the cap
    keeps memory predictable.
    """

    n: int
    alphabet: Alphabet = SPIN
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.n < 1:
            raise StateSpaceError("need at least one coordinate")
        total = self.alphabet.q ** self.n
        if total > self.max_states:
            raise CapExceededError(
                f"q^n = {self.alphabet.q}^{self.n} = {total} exceeds cap {self.max_states}"
            )

    @property
    def q(self) -> int:
        return self.alphabet.q

    @property
    def total(self) -> int:
        return self.q**self.n

    @property
    def shape(self) -> tuple:
        return (self.q,) * self.n

    @property
    def strides(self) -> np.ndarray:
        return self.q ** np.arange(self.n)

    @cached_property
    def configs(self) -> np.ndarray:
        """All configurations as a ``(q**n, n)`` array of symbol indices, row = state index."""
        idx = np.arange(self.total)
        configs = (idx[:, None] // self.strides[None, :]) % self.q
        configs.setflags(write=False)
        return configs

    def symbol_values(self) -> np.ndarray:
        """Configurations as symbol values (e.g. +-1 spins) rather than indices."""
        return np.asarray(self.alphabet.symbols)[self.configs]

    def check_config(self, x: Sequence[int]) -> np.ndarray:
        x = np.asarray(x, dtype=int)
        if x.shape != (self.n,):
            raise StateSpaceError(f"configuration has length {x.size}, expected {self.n}")
        if np.any(x < 0) or np.any(x >= self.q):
            raise StateSpaceError(f"symbol index out of range [0, {self.q}) in {x.tolist()}")
        return x

    def check_coordinate(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise StateSpaceError(f"coordinate {i} out of range [0, {self.n})")
        return int(i)

    def index_of(self, x: Sequence[int]) -> int:
        x = self.check_config(x)
        return int(x @ self.strides)

    def config_of(self, index: int) -> tuple:
        if not 0 <= index < self.total:
            raise StateSpaceError(f"state index {index} out of range")
        return tuple(int(v) for v in self.configs[index])

    def to_tensor(self, values: np.ndarray) -> np.ndarray:
        """View a state vector as a tensor with axis i = coordinate i."""
        return np.asarray(values).reshape(self.shape, order="F")

    def from_tensor(self, tensor: np.ndarray) -> np.ndarray:
        return np.asarray(tensor).reshape(self.total, order="F")

    def hamming_neighbors(self, x: Sequence[int], i: int) -> list[tuple]:
        """The q configurations agreeing with ``x`` off coordinate ``i`` (``x`` included)."""
        x = self.check_config(x)
        i = self.check_coordinate(i)
        out = []
        for s in range(self.q):
            y = x.copy()
            y[i] = s
            out.append(tuple(int(v) for v in y))
        return out

    def fiber_indices(self, i: int) -> np.ndarray:
        """``(q**(n-1), q)`` array; row r lists the state indices of one fiber along coordinate i."""
        i = self.check_coordinate(i)
        base = np.flatnonzero(self.configs[:, i] == 0)
        return base[:, None] + np.arange(self.q)[None, :] * self.q**i


def hamming_distance(x: Sequence[int], y: Sequence[int]) -> int:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise StateSpaceError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))
