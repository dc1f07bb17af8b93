"""Greedy coalitions for monotone voting rules on {-1,+1}^n.

Pinning overwrites coordinates and leaves the measure alone; it is not
conditioning.  :func:`conditional_expectation` is provided only so the two can
be compared.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .glauber import is_boolean, variance
from .influences import influences
from .models import GibbsMeasure
from .statespace import StateSpace


class CoalitionError(ValueError):
    pass


def _binary(space: StateSpace):
    if space.q != 2:
        raise CoalitionError("coalitions are defined on binary alphabets only")


def is_monotone(space: StateSpace, f) -> bool:
    """f(x) <= f(y) whenever x <= y, checked on every covering pair (one coordinate raised)."""
    _binary(space)
    ft = space.to_tensor(np.asarray(f, dtype=float))
    return all(bool(np.all(np.take(ft, 1, axis=i) >= np.take(ft, 0, axis=i))) for i in range(space.n))


def pin(space: StateSpace, f, S, direction: int = 1) -> np.ndarray:
    """g(x) = f(x with every coordinate in S overwritten by ``direction`` (+1 or -1))."""
    _binary(space)
    if direction not in (1, -1):
        raise CoalitionError("direction must be +1 or -1")
    sym = 1 if direction == 1 else 0
    ft = space.to_tensor(np.asarray(f, dtype=float))
    for i in sorted(set(S)):
        i = space.check_coordinate(i)
        ft = np.broadcast_to(np.take(ft, [sym], axis=i), space.shape)
    return space.from_tensor(np.ascontiguousarray(ft)).astype(float)


def pinned_expectation(measure: GibbsMeasure, f, S) -> float:
    """E_{X~nu}[f(X_{~S}, X_S -> 1)] under the unchanged measure."""
    return measure.expect(pin(measure.space, f, S, 1))


def conditional_expectation(measure: GibbsMeasure, f, S) -> float:
    """E_nu[f | X_S = +1], i.e. conditioning rather than pinning."""
    _binary(measure.space)
    mask = np.all(measure.space.configs[:, sorted(set(S))] == 1, axis=1)
    w = measure.probs * mask
    return float(w @ np.asarray(f, dtype=float) / w.sum())


@dataclass(frozen=True, eq=False)
class CoalitionResult:
    S: list
    trajectory: list  # p_t = Pr(f_t = 1), t = 0..len(S)
    chosen_influence: list  # I_{k_t}(f_t)
    implied_alpha: list  # I_{k_t}(f_t) / (Var(f_t) log(n)/n) per step
    epsilon: float
    b: float
    n: int
    succeeded: bool
    gain_slack: list = field(default_factory=list)  # (p_{t+1} - p_t) - I_{k_t}(f_t)/(1+b)

    @property
    def alpha(self) -> float | None:
        """Largest alpha consistent with every step of the run."""
        return min(self.implied_alpha) if self.implied_alpha else None

    @property
    def budget_bound(self) -> float | None:
        a = self.alpha
        if a is None:
            return None
        if self.n < 2:
            return math.inf
        return 4 * (1 + self.b) * math.log(1 / (2 * self.epsilon)) / a * self.n / math.log(self.n)

    @property
    def monotone_trajectory(self) -> bool:
        return all(b >= a - 1e-15 for a, b in zip(self.trajectory, self.trajectory[1:]))

    @property
    def gains_hold(self) -> bool:
        return all(s >= -1e-12 for s in self.gain_slack)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "pinned_coordinate", "p_t", "influence_of_choice"])
        w.writerow([0, "", repr(self.trajectory[0]), ""])
        for t, (k, I) in enumerate(zip(self.S, self.chosen_influence), 1):
            w.writerow([t, k, repr(self.trajectory[t]), repr(I)])
        return buf.getvalue()


def greedy_coalition(measure: GibbsMeasure, f, epsilon: float) -> CoalitionResult:
    """Pin to +1, one coordinate at a time, the currently most influential free coordinate.

    Stops once Pr(f_t = 1) >= 1 - epsilon.  Influences of f_t are computed under
    the original measure; ties go to the lowest index.
    """
    space = measure.space
    _binary(space)
    f = np.asarray(f, dtype=float)
    if not is_boolean(f):
        raise CoalitionError("f must be boolean")
    if not 0 < epsilon < 0.5:
        raise CoalitionError("epsilon must lie in (0, 1/2)")
    if not is_monotone(space, f):
        raise CoalitionError("f is not monotone")
    p = measure.expect(f)
    if p < epsilon:
        raise CoalitionError(f"E[f] = {p:.6g} is below epsilon = {epsilon}")

    n, b = measure.n, measure.b
    S, traj, chosen, alphas, slack = [], [p], [], [], []
    ft = f
    while traj[-1] < 1 - epsilon:
        if len(S) == n:
            raise CoalitionError("pinned every coordinate without reaching 1 - epsilon")
        I = influences(measure, ft)
        I[S] = -1.0
        k = int(np.argmax(I))
        var = variance(measure, ft)
        chosen.append(float(I[k]))
        alphas.append(float(I[k] / (var * math.log(n) / n)) if n > 1 else math.inf)
        S.append(k)
        ft = pin(space, f, S, 1)
        traj.append(measure.expect(ft))
        slack.append(traj[-1] - traj[-2] - chosen[-1] / (1 + b))
    return CoalitionResult(S, traj, chosen, alphas, epsilon, b, n, traj[-1] >= 1 - epsilon, slack)
