"""Influences, effects and derivative norms of functions under a Gibbs measure."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .glauber import apply_Li, is_boolean, lp_norm
from .models import GibbsMeasure


class NotBooleanError(ValueError):
    pass


def _require_boolean(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if not is_boolean(f):
        raise NotBooleanError("function must take values in {0, 1}")
    return f


def pivotal_mask(measure: GibbsMeasure, f, i: int) -> np.ndarray:
    """States x at which some change of x_i changes f (exact fiber scan)."""
    space = measure.space
    ft = space.to_tensor(np.asarray(f, dtype=float))
    varies = ft.max(axis=i, keepdims=True) != ft.min(axis=i, keepdims=True)
    return space.from_tensor(np.broadcast_to(varies, space.shape))


def influence(measure: GibbsMeasure, f, i: int) -> float:
    """I_i(f) = Pr_nu[exists x_i' with f(X) != f(X with coordinate i set to x_i')]."""
    f = _require_boolean(f)
    return float(measure.probs @ pivotal_mask(measure, f, i))


def influences(measure: GibbsMeasure, f) -> np.ndarray:
    return np.array([influence(measure, f, i) for i in range(measure.n)])


def effect(measure: GibbsMeasure, f, i: int) -> float:
    """Cov_nu[f, x_i] with the binary alphabet embedded as (-1, +1)."""
    if measure.q != 2:
        raise ValueError("effects are defined for binary alphabets only")
    f = _require_boolean(f)
    x = 2.0 * measure.space.configs[:, measure.space.check_coordinate(i)] - 1.0
    nu = measure.probs
    return float(nu @ (f * x) - (nu @ f) * (nu @ x))


def derivative_norms(measure: GibbsMeasure, f, i: int) -> tuple[float, float]:
    d = apply_Li(measure, f, i)
    return lp_norm(measure, d, 1), lp_norm(measure, d, 2)


@dataclass(frozen=True, eq=False)
class InfluenceReport:
    influence: np.ndarray
    effect: np.ndarray | None
    norm1: np.ndarray
    norm2: np.ndarray

    @property
    def max_influence(self) -> float:
        return float(self.influence.max())

    @property
    def argmax(self) -> int:
        # np.argmax returns the first maximiser: ties go to the lowest coordinate
        return int(np.argmax(self.influence))

    @property
    def total_influence(self) -> float:
        return float(self.influence.sum())

    def rows(self):
        for i in range(len(self.influence)):
            e = "" if self.effect is None else repr(float(self.effect[i]))
            yield i, repr(float(self.influence[i])), e, repr(float(self.norm1[i])), repr(float(self.norm2[i]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["coordinate", "influence", "effect", "norm1", "norm2"])
        w.writerows(self.rows())
        return buf.getvalue()


def influence_report(measure: GibbsMeasure, f) -> InfluenceReport:
    f = _require_boolean(f)
    n = measure.n
    eff = np.array([effect(measure, f, i) for i in range(n)]) if measure.q == 2 else None
    norms = np.array([derivative_norms(measure, f, i) for i in range(n)])
    return InfluenceReport(influences(measure, f), eff, norms[:, 0], norms[:, 1])


@dataclass(frozen=True)
class SandwichResult:
    p: float
    min_slack: float  # smallest of I_i - E|L_i f|^p and E|L_i f|^p - I_i/(qb)^p over i
    upper_slack: tuple
    lower_slack: tuple

    @property
    def passed(self) -> bool:
        return self.min_slack >= -1e-12


def sandwich_check(measure: GibbsMeasure, f, p: float = 1.0) -> SandwichResult:
    """I_i(f) >= E|L_i f|^p >= I_i(f)/(qb)^p for boolean f and every coordinate i."""
    if p < 1:
        raise ValueError("p must be >= 1")
    f = _require_boolean(f)
    qb = measure.q * measure.b
    upper, lower = [], []
    for i in range(measure.n):
        I = influence(measure, f, i)
        m = float(measure.probs @ np.abs(apply_Li(measure, f, i)) ** p)
        upper.append(I - m)
        lower.append(m - I / qb**p)
    return SandwichResult(p, float(min(upper + lower)), tuple(upper), tuple(lower))
