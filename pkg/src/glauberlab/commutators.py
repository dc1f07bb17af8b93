"""Iterated commutators of single-site resampling operators and the intertwining series.

For the Glauber generator L = sum_j (P_j - I),

    H_T^{-1} L_i H_T = sum_k T^k/k! [L_i, L]^{(k)},

and because P_i and P_j commute unless i ~ j, the k-th iterated commutator is a
sum of left-nested commutators [...[[P_i, P_j1], P_j2]..., P_jk] over tuples
with each j_m in N^+({i, j_1, ..., j_{m-1}}).  The k = 0 term is L_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .glauber import apply_Li, apply_P, build_P, lp_norm, semigroup
from .models import GibbsMeasure, InteractionGraph

DEFAULT_MAX_ORDER = 14
DEFAULT_K = 12
MAX_LOG_CONDITION = 30.0


class CommutatorError(ValueError):
    pass


@dataclass(frozen=True)
class CommutatorIndexSet:
    i: int
    k: int
    tuples: tuple

    def __len__(self):
        return len(self.tuples)


def s_size_bound(max_degree: int, k: int) -> int:
    """(Delta + 1)^k k^k, with 0^0 = 1."""
    return (max_degree + 1) ** k * k**k


def enumerate_index_set(graph: InteractionGraph, i: int, k: int,
                        max_order: int = DEFAULT_MAX_ORDER) -> CommutatorIndexSet:
    """All (j_1..j_k) with j_m in N^+({i, j_1, ..., j_{m-1}}); nothing is pruned."""
    if k < 0:
        raise CommutatorError("order must be nonnegative")
    if k > max_order:
        raise CommutatorError(f"order {k} exceeds the configured maximum {max_order}")
    out = []

    def grow(prefix, support):
        if len(prefix) == k:
            out.append(prefix)
            return
        for j in sorted(graph.closure(support)):
            grow(prefix + (j,), support | {j})

    grow((), frozenset({i}))
    return CommutatorIndexSet(i, k, tuple(out))


def commutator(A, B):
    return A @ B - B @ A


def dense_P(measure: GibbsMeasure) -> list[np.ndarray]:
    return [build_P(measure, j).toarray() for j in range(measure.n)]


def iterated_commutator(P: list[np.ndarray], i: int, tuple_) -> np.ndarray:
    """[...[[P_i, P_j1], P_j2], ..., P_jk]; for the empty tuple, L_i = P_i - I."""
    if not tuple_:
        return P[i] - np.eye(P[i].shape[0])
    C = P[i]
    for j in tuple_:
        if P[j].shape != C.shape:
            raise CommutatorError("operators live on different state spaces")
        C = commutator(C, P[j])
    return C


def apply_iterated_commutator(measure: GibbsMeasure, i: int, tuple_, f) -> np.ndarray:
    """Matrix-free ([...[P_i, P_j1]..., P_jk]) f; the empty tuple gives L_i f."""
    f = np.asarray(f, dtype=float)
    if not tuple_:
        return apply_Li(measure, f, i)
    if tuple_[0] == i:
        return np.zeros_like(f)

    def apply(m, v):
        if m == 0:
            return apply_P(measure, v, i)
        j = tuple_[m - 1]
        return apply(m - 1, apply_P(measure, v, j)) - apply_P(measure, apply(m - 1, v), j)

    return apply(len(tuple_), f)


def series_terms(measure: GibbsMeasure, i: int, K: int, graph: InteractionGraph | None = None,
                 P: list[np.ndarray] | None = None) -> list[np.ndarray]:
    """[L_i, L]^{(k)} for k = 0..K, each summed over S_{k,i}.

    Tuples are grouped by their support set U = {i, j_1, ..., j_m}: the admissible
    next indices depend only on U and the commutator is linear, so carrying one
    summed operator per U is exact and avoids enumerating (Delta+1)^k k^k tuples.
    """
    graph = graph or measure.graph
    P = P if P is not None else dense_P(measure)
    N = P[i].shape[0]
    terms = [P[i] - np.eye(N)]
    layer = {frozenset({i}): P[i]}
    for _ in range(K):
        nxt: dict = {}
        for U, C in layer.items():
            for j in sorted(graph.closure(U)):
                V = U | {j}
                term = commutator(C, P[j])
                nxt[V] = nxt[V] + term if V in nxt else term
        layer = nxt
        terms.append(sum(layer.values()) if layer else np.zeros((N, N)))
    return terms


def generator_commutators(Li: np.ndarray, L: np.ndarray, K: int) -> list[np.ndarray]:
    """[L_i, L]^{(k)} straight from the definition, as an independent route."""
    out = [Li]
    for _ in range(K):
        out.append(commutator(out[-1], L))
    return out


def default_T(measure: GibbsMeasure) -> float:
    delta = max(measure.max_degree, 1)
    return min(0.1, 1.0 / (measure.q**2 * measure.b**2 * delta**2))


@dataclass(frozen=True, eq=False)
class CommutatorSeries:
    T: float
    i: int
    K: int
    partial_sums: list  # M^{(0)}, ..., M^{(K)}
    reference: np.ndarray  # H_T^{-1} L_i H_T from the spectral factorisation
    residual_op: list = field(default_factory=list)  # ||L_i H_T - H_T M^{(k)}||_2
    residual_fro: list = field(default_factory=list)


def build_M(measure: GibbsMeasure, i: int, T: float, K: int = DEFAULT_K,
            graph: InteractionGraph | None = None, max_order: int = DEFAULT_MAX_ORDER,
            max_log_condition: float = MAX_LOG_CONDITION) -> CommutatorSeries:
    if T < 0:
        raise CommutatorError("T must be nonnegative")
    if K > max_order:
        raise CommutatorError(f"truncation order {K} exceeds {max_order}")
    i = measure.space.check_coordinate(i)
    sg = semigroup(measure)
    if T * -sg.eigenvalues.min() > max_log_condition:
        raise CommutatorError(f"T = {T} makes H_T^(-1) too ill-conditioned")
    terms = series_terms(measure, i, K, graph)
    partial = []
    acc = np.zeros_like(terms[0])
    for k, C in enumerate(terms):
        acc = acc + (T**k / math.factorial(k)) * C
        partial.append(acc)
    H = sg.matrix(T)
    Li = terms[0]
    reference = sg.inverse_matrix(T) @ Li @ H
    lhs = Li @ H
    res_op, res_fro = [], []
    for M in partial:
        R = lhs - H @ M
        res_op.append(float(np.linalg.norm(R, 2)))
        res_fro.append(float(np.linalg.norm(R)))
    return CommutatorSeries(T, i, K, partial, reference, res_op, res_fro)


@dataclass(frozen=True)
class IntertwiningReport:
    i: int
    T: float
    K: int
    residual_op: float
    residual_fro: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.residual_fro <= self.threshold


def verify_intertwining(measure: GibbsMeasure, i: int, T: float, K: int = DEFAULT_K,
                        threshold: float = 1e-6, graph: InteractionGraph | None = None) -> IntertwiningReport:
    """Residual of L_i H_T = H_T M_{T,i} with the series truncated at order K."""
    s = build_M(measure, i, T, K, graph)
    return IntertwiningReport(i, T, K, s.residual_op[-1], s.residual_fro[-1], threshold)


@dataclass(frozen=True)
class TermBoundResult:
    i: int
    k: int
    p: float
    lhs: float
    rhs: float
    tuples: int

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)


def term_bound_check(measure: GibbsMeasure, f, i: int, k: int, p: float = 2.0,
                     graph: InteractionGraph | None = None, max_k: int = 4) -> TermBoundResult:
    """sum over S_{k,i} of ||[...] f||_p^2 against 2(D+1)^k (k+1)^(k+4) (2qb)^(2k+2) max_{d(j,i)<=k} ||L_j f||_p^2."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if k > max_k:
        raise CommutatorError(f"term-bound check limited to k <= {max_k}")
    graph = graph or measure.graph
    idx = enumerate_index_set(graph, i, k)
    lhs = sum(lp_norm(measure, apply_iterated_commutator(measure, i, t, f), p) ** 2 for t in idx.tuples)
    near = [j for j in range(measure.n) if graph.distance(i, j) <= k]
    top = max(lp_norm(measure, apply_Li(measure, f, j), p) ** 2 for j in near)
    delta, qb = graph.max_degree, measure.q * measure.b
    rhs = 2 * (delta + 1) ** k * (k + 1) ** (k + 4) * (2 * qb) ** (2 * k + 2) * top
    return TermBoundResult(i, k, p, float(lhs), float(rhs), len(idx))
