"""Gibbs measures on Sigma^n, interaction graphs, and their structural constants.

Measures are stored as dense probability vectors over the enumerated state space,
together with the graph they are claimed to be Markov with respect to.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .statespace import SPIN, Alphabet, StateSpace

PROB_TOL = 1e-12
MARKOV_TOL = 1e-10
MAX_LOG_SPREAD = 500.0


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        canon = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ModelError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ModelError(f"edge ({i}, {j}) out of range for n={self.n}")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canon))

    @cached_property
    def adjacency(self) -> tuple:
        nbrs = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    def neighbors(self, i: int) -> frozenset:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    @property
    def max_degree(self) -> int:
        return max((len(s) for s in self.adjacency), default=0)

    def adjacent(self, i: int, j: int) -> bool:
        return j in self.adjacency[i]

    def closure(self, vertices: Iterable[int]) -> frozenset:
        """N^+(U): U together with every neighbor of a vertex in U."""
        out = set(vertices)
        for u in list(out):
            out |= self.adjacency[u]
        return frozenset(out)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs graph distance; unreachable pairs get ``n`` (larger than any real distance)."""
        dist = np.full((self.n, self.n), self.n, dtype=int)
        for s in range(self.n):
            dist[s, s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.adjacency[u]:
                    if dist[s, v] > dist[s, u] + 1:
                        dist[s, v] = dist[s, u] + 1
                        queue.append(v)
        dist.setflags(write=False)
        return dist

    def distance(self, i: int, j: int) -> int:
        return int(self.distances[i, j])


def empty_graph(n: int) -> InteractionGraph:
    return InteractionGraph(n, frozenset())


def path_graph(n: int) -> InteractionGraph:
    return InteractionGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> InteractionGraph:
    if n < 3:
        return path_graph(n)
    return InteractionGraph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> InteractionGraph:
    return InteractionGraph(n, frozenset(itertools.combinations(range(n), 2)))


def lattice_graph(d: int, L: int, periodic: bool = False) -> InteractionGraph:
    """Grid on {0..L}^d, i.e. (L+1)^d vertices, nearest-neighbour edges.

    Free boundary by default.  With ``periodic=True`` the wrap-around bonds are
    added; for side length 2 these coincide with existing bonds and merge.
    """
    side = L + 1
    coords = list(itertools.product(range(side), repeat=d))
    index = {c: k for k, c in enumerate(coords)}
    edges = set()
    for c in coords:
        for axis in range(d):
            nxt = list(c)
            nxt[axis] += 1
            if nxt[axis] == side:
                if not periodic or side < 2:
                    continue
                nxt[axis] = 0
            a, b = index[c], index[tuple(nxt)]
            if a != b:
                edges.add((min(a, b), max(a, b)))
    return InteractionGraph(len(coords), frozenset(edges))


@dataclass(frozen=True, eq=False)
class GibbsMeasure:
    """A full-support probability vector on ``space`` claimed Markov w.r.t. ``graph``."""

    space: StateSpace
    log_probs: np.ndarray
    graph: InteractionGraph
    name: str = "measure"
    probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        logp = np.asarray(self.log_probs, dtype=float)
        if logp.shape != (self.space.total,):
            raise ModelError(f"expected {self.space.total} weights, got {logp.shape}")
        if not np.all(np.isfinite(logp)):
            raise ModelError("non-finite log-weight")
        if self.graph.n != self.space.n:
            raise ModelError("graph and state space disagree on n")
        spread = logp.max() - logp.min()
        if spread > MAX_LOG_SPREAD:
            raise ModelError(f"log-weight spread {spread:.1f} exceeds {MAX_LOG_SPREAD}; probabilities would underflow")
        w = np.exp(logp - logp.max())
        z = w.sum()
        probs = w / z
        logp = logp - logp.max() - np.log(z)
        if abs(probs.sum() - 1.0) > PROB_TOL or np.any(probs <= 0):
            raise ModelError("measure is not a full-support probability vector")
        logp.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "log_probs", logp)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def q(self) -> int:
        return self.space.q

    @property
    def max_degree(self) -> int:
        return self.graph.max_degree

    @cached_property
    def b(self) -> float:
        return pinned_ratio_bound(self)

    def expect(self, f) -> float:
        return float(self.probs @ np.asarray(f, dtype=float))

    @cached_property
    def _laws(self) -> dict:
        return {}

    def conditional_laws(self, i: int) -> np.ndarray:
        """Tensor ``C`` with ``C[x] = Pr(X_i = x_i | X_{-i} = x_{-i})``, axis i = coordinate i."""
        i = self.space.check_coordinate(i)
        if i not in self._laws:
            logt = self.space.to_tensor(self.log_probs)
            laws = np.exp(logt - logsumexp(logt, axis=i, keepdims=True))
            laws.setflags(write=False)
            self._laws[i] = laws
        return self._laws[i]


def measure_from_log_weights(space: StateSpace, log_weights, graph: InteractionGraph | None = None,
                             name: str = "measure") -> GibbsMeasure:
    if graph is None:
        graph = complete_graph(space.n)
    return GibbsMeasure(space, np.asarray(log_weights, dtype=float), graph, name)


def uniform_measure(n: int, alphabet: Alphabet = SPIN, graph: InteractionGraph | None = None) -> GibbsMeasure:
    space = StateSpace(n, alphabet)
    return GibbsMeasure(space, np.zeros(space.total), graph or empty_graph(n), f"uniform-n{n}")


def product_measure(marginals: Sequence[Sequence[float]], alphabet: Alphabet = SPIN) -> GibbsMeasure:
    """Independent coordinates; ``marginals[i]`` is the law of X_i over the alphabet."""
    space = StateSpace(len(marginals), alphabet)
    logm = np.log(np.asarray(marginals, dtype=float))
    if logm.shape != (space.n, space.q):
        raise ModelError("marginals must be an n x q table")
    logw = logm[np.arange(space.n)[None, :], space.configs].sum(axis=1)
    return GibbsMeasure(space, logw, empty_graph(space.n), "product")


@dataclass(frozen=True)
class IsingModel:
    graph: InteractionGraph
    couplings: Mapping = field(default_factory=dict)
    field_: tuple = ()
    beta: float = 1.0

    def __post_init__(self):
        J = {}
        for e, v in dict(self.couplings).items():
            i, j = (int(a) for a in e)
            key = (min(i, j), max(i, j))
            if key not in self.graph.edges:
                raise ModelError(f"coupling on non-edge {key}")
            if not np.isfinite(v):
                raise ModelError(f"non-finite coupling on {key}")
            J[key] = float(v)
        for e in self.graph.edges:
            J.setdefault(e, 0.0)
        h = tuple(float(v) for v in self.field_) or (0.0,) * self.graph.n
        if len(h) != self.graph.n or not all(np.isfinite(h)):
            raise ModelError(f"external field must be {self.graph.n} finite numbers")
        if not np.isfinite(self.beta):
            raise ModelError("beta must be finite")
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "field_", h)

    def log_weights(self, space: StateSpace) -> np.ndarray:
        x = space.symbol_values().astype(float)
        out = x @ np.asarray(self.field_)
        for (i, j), Jij in sorted(self.couplings.items()):
            out = out + self.beta * Jij * x[:, i] * x[:, j]
        return out


def build_ising(model: IsingModel, name: str = "ising") -> GibbsMeasure:
    """nu(x) proportional to exp(beta * sum_{ij in E} J_ij x_i x_j + sum_i h_i x_i) on {-1,+1}^n."""
    space = StateSpace(model.graph.n, SPIN)
    return GibbsMeasure(space, model.log_weights(space), model.graph, name)


def ising(graph: InteractionGraph, beta: float, J: float = 1.0, h: float | Sequence[float] = 0.0,
          name: str | None = None) -> GibbsMeasure:
    """Homogeneous-coupling convenience wrapper around :func:`build_ising`."""
    field_ = tuple(np.broadcast_to(np.asarray(h, dtype=float), (graph.n,)))
    model = IsingModel(graph, {e: J for e in graph.edges}, field_, beta)
    return build_ising(model, name or f"ising-n{graph.n}-beta{beta:g}")


def build_mrf_from_table(space: StateSpace, weights, graph: InteractionGraph,
                         tol: float = MARKOV_TOL, name: str = "mrf") -> GibbsMeasure:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (space.total,):
        raise ModelError(f"expected {space.total} weights, got {weights.shape}")
    if np.any(~(weights > 0)):
        raise ModelError("weights must be strictly positive")
    measure = GibbsMeasure(space, np.log(weights), graph, name)
    ok, worst = verify_markov_property(measure, graph, tol)
    if not ok:
        raise ModelError(f"measure is not Markov w.r.t. the given graph (worst TV discrepancy {worst:.3e})")
    return measure


def _max_pairwise_tv(laws: np.ndarray, outcome_axis: int, compare_axes: Sequence[int]) -> float:
    """Max TV distance between two laws whose indices differ only on ``compare_axes``.

    Uses TV(P, P') = max_A |P(A) - P'(A)| so the max over pairs becomes
    max_A (max P(A) - min P(A)) over each group; exact, and linear in the group size.
    """
    if not compare_axes:
        return 0.0
    q = laws.shape[outcome_axis]
    moved = np.moveaxis(laws, outcome_axis, 0)
    # axis positions once the outcome axis has been summed away
    axes = tuple(a - (a > outcome_axis) for a in compare_axes)
    worst = 0.0
    for r in range(1, q):
        for subset in itertools.combinations(range(q), r):
            mass = moved[list(subset)].sum(axis=0)
            spread = mass.max(axis=axes) - mass.min(axis=axes)
            worst = max(worst, float(spread.max()))
    return worst


def verify_markov_property(measure: GibbsMeasure, graph: InteractionGraph | None = None,
                           tol: float = MARKOV_TOL) -> tuple[bool, float]:
    """Check that each X_i is conditionally independent of the rest given its neighbours.

    Returns ``(passed, worst)`` where ``worst`` is the largest total-variation gap
    between conditional laws of X_i at two configurations that agree on N(i).
    """
    graph = graph or measure.graph
    worst = 0.0
    for i in range(measure.n):
        free = [j for j in range(measure.n) if j != i and j not in graph.neighbors(i)]
        worst = max(worst, _max_pairwise_tv(measure.conditional_laws(i), i, free))
    return worst <= tol, worst


def pinned_ratio_bound(measure: GibbsMeasure) -> float:
    """b = max nu(x)/nu(y) over Hamming-distance-1 pairs (>= 1)."""
    logt = measure.space.to_tensor(measure.log_probs)
    spread = max(float(np.max(logt.max(axis=i) - logt.min(axis=i))) for i in range(measure.n))
    return float(np.exp(spread))


def conditional_distribution(measure: GibbsMeasure, x: Sequence[int], i: int) -> np.ndarray:
    """Law of X_i given X_{-i} = x_{-i}, as a length-q vector."""
    x = measure.space.check_config(x)
    i = measure.space.check_coordinate(i)
    fiber = [measure.space.index_of(y) for y in measure.space.hamming_neighbors(x, i)]
    logp = measure.log_probs[fiber]
    return np.exp(logp - logsumexp(logp))


@dataclass(frozen=True, eq=False)
class DobrushinMatrix:
    entries: np.ndarray
    op_norm: float


def dobrushin_matrix(measure: GibbsMeasure) -> DobrushinMatrix:
    """A_ij = max over y, z of TV between the laws of X_i at y and at y with coordinate j set to z."""
    n = measure.n
    A = np.zeros((n, n))
    for i in range(n):
        laws = measure.conditional_laws(i)
        for j in range(n):
            if j != i:
                A[i, j] = _max_pairwise_tv(laws, i, [j])
    A.setflags(write=False)
    return DobrushinMatrix(A, float(np.linalg.norm(A, 2)))
