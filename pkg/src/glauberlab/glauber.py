"""Continuous-time Glauber dynamics of a Gibbs measure and the L_p(nu) calculus around it.

P_i resamples coordinate i from its conditional law, L_i = P_i - I, L = sum_i L_i
and H_t = exp(tL).  Single-site operators are applied matrix-free through the
tensor layout of :class:`~glauberlab.statespace.StateSpace`; sparse and dense
matrices are available for the algebra that needs them.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .models import GibbsMeasure

ALGEBRA_TOL = 1e-10
SPECTRAL_TOL = 1e-8
DEFAULT_DENSE_MAX = 4096

_semigroups: "weakref.WeakKeyDictionary[GibbsMeasure, Semigroup]" = weakref.WeakKeyDictionary()


class DynamicsError(ValueError):
    pass


class DenseCapError(DynamicsError):
    """A dense operator would exceed the configured size cap."""


def is_boolean(f) -> bool:
    f = np.asarray(f)
    return bool(np.all((f == 0) | (f == 1)))


def apply_P(measure: GibbsMeasure, f, i: int) -> np.ndarray:
    """(P_i f)(x) = E[f(X) | X_{-i} = x_{-i}]."""
    space = measure.space
    laws = measure.conditional_laws(i)
    ft = space.to_tensor(np.asarray(f, dtype=float))
    cond = (laws * ft).sum(axis=i, keepdims=True)
    return space.from_tensor(np.broadcast_to(cond, space.shape))


def apply_Li(measure: GibbsMeasure, f, i: int) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return apply_P(measure, f, i) - f


def apply_L(measure: GibbsMeasure, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return sum(apply_P(measure, f, i) for i in range(measure.n)) - measure.n * f


def build_P(measure: GibbsMeasure, i: int) -> sp.csr_matrix:
    """Sparse matrix of P_i; each row has exactly q nonzeros (the fiber through x)."""
    space = measure.space
    fibers = space.fiber_indices(i)
    laws = measure.conditional_laws(i)
    w = space.from_tensor(laws)[fibers]  # (m, q): law over each fiber
    q = space.q
    rows = np.repeat(fibers, q, axis=1).ravel()
    cols = np.tile(fibers, (1, q)).ravel()
    vals = np.tile(w, (1, q)).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(space.total, space.total))


def build_L(measure: GibbsMeasure) -> tuple[sp.csr_matrix, list[sp.csr_matrix]]:
    """Generator L and the per-site derivatives L_i = P_i - I."""
    eye = sp.identity(measure.space.total, format="csr")
    Ls = [build_P(measure, i) - eye for i in range(measure.n)]
    L = Ls[0].copy()
    for Li in Ls[1:]:
        L = L + Li
    return L.tocsr(), [Li.tocsr() for Li in Ls]


@dataclass(frozen=True, eq=False)
class Semigroup:
    """H_t = exp(tL) through one symmetric eigendecomposition in the nu-weighted inner product.

    With D = diag(nu), S = D^{1/2} L D^{-1/2} is symmetric, S = V diag(eig) V^T, and
    H_t = D^{-1/2} V diag(exp(t eig)) V^T D^{1/2}.  ``eigenvalues`` are those of L
    (all <= 0), ascending in magnitude.
    """

    measure: GibbsMeasure
    eigenvalues: np.ndarray
    basis: np.ndarray

    @classmethod
    def from_measure(cls, measure: GibbsMeasure, max_states: int = DEFAULT_DENSE_MAX) -> "Semigroup":
        N = measure.space.total
        if N > max_states:
            raise DenseCapError(f"dense eigendecomposition refused: {N} states > {max_states}")
        L, _ = build_L(measure)
        s = np.sqrt(measure.probs)
        S = (L.toarray() * s[:, None]) / s[None, :]
        S = 0.5 * (S + S.T)
        eig, V = np.linalg.eigh(S)
        order = np.argsort(-eig)
        eig = np.minimum(eig[order], 0.0)
        V = V[:, order]
        if N > 1 and eig[1] > -1e-12 * max(1.0, -eig[-1]):
            raise DynamicsError("generator has a repeated zero eigenvalue (reducible chain)")
        # pin the stationary direction exactly: eigenvalue 0, eigenvector sqrt(nu)
        V[:, 0] = s
        eig[0] = 0.0
        eig.setflags(write=False)
        V.setflags(write=False)
        return cls(measure, eig, V)

    @property
    def spectral_gap(self) -> float:
        return float(-self.eigenvalues[1])

    def _factor(self, t: float) -> np.ndarray:
        return np.exp(t * self.eigenvalues)

    def apply(self, t: float, f) -> np.ndarray:
        if t < 0:
            raise DynamicsError("semigroup time must be nonnegative")
        s = np.sqrt(self.measure.probs)
        f = np.asarray(f, dtype=float)
        coef = self.basis.T @ (s[:, None] * f.reshape(len(s), -1))
        out = (self.basis @ (self._factor(t)[:, None] * coef)) / s[:, None]
        return out.reshape(f.shape)

    def matrix(self, t: float) -> np.ndarray:
        if t < 0:
            raise DynamicsError("semigroup time must be nonnegative")
        return self._conjugated(self._factor(t))

    def inverse_matrix(self, t: float) -> np.ndarray:
        """H_t^{-1} = exp(-tL)."""
        return self._conjugated(np.exp(-t * self.eigenvalues))

    def _conjugated(self, diag: np.ndarray) -> np.ndarray:
        s = np.sqrt(self.measure.probs)
        return ((self.basis * diag[None, :]) @ self.basis.T) / s[:, None] * s[None, :]

    def generator_matrix(self) -> np.ndarray:
        return self._conjugated(self.eigenvalues)


def semigroup(measure: GibbsMeasure, max_states: int = DEFAULT_DENSE_MAX) -> Semigroup:
    """Cached :class:`Semigroup` for ``measure`` (built once, reused for every t)."""
    sg = _semigroups.get(measure)
    if sg is None:
        sg = Semigroup.from_measure(measure, max_states)
        _semigroups[measure] = sg
    return sg


def apply_semigroup(measure: GibbsMeasure, t: float, f) -> np.ndarray:
    return semigroup(measure).apply(t, f)


def inner(measure: GibbsMeasure, f, g) -> float:
    return float(measure.probs @ (np.asarray(f, dtype=float) * np.asarray(g, dtype=float)))


def variance(measure: GibbsMeasure, f) -> float:
    f = np.asarray(f, dtype=float)
    mean = measure.probs @ f
    return float(measure.probs @ (f - mean) ** 2)


def lp_norm(measure: GibbsMeasure, f, p: float) -> float:
    """||f||_p = (E_nu |f|^p)^(1/p), p >= 1."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(np.asarray(f, dtype=float))
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    a = a / top
    return float(top * (measure.probs @ a**p) ** (1.0 / p))


def entropy(measure: GibbsMeasure, f) -> float:
    """Ent(f) = E[f log f] - E[f] log E[f] for f >= 0, with 0 log 0 = 0.

    Evaluated as E[m((1+u) log(1+u) - u)] with u = f/m - 1, whose terms are all
    nonnegative; this keeps nearly constant f accurate.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("entropy needs a nonnegative function")
    m = float(measure.probs @ f)
    if m == 0.0:
        return 0.0
    u = f / m - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(u > -1.0, (1.0 + u) * np.log1p(u) - u, 1.0)
    return float(m * (measure.probs @ np.maximum(terms, 0.0)))


def dirichlet_form(measure: GibbsMeasure, f, g=None) -> float:
    """E(f, g) = sum_i E[(L_i f)(L_i g)], cross-checked against -E[f Lg]."""
    f = np.asarray(f, dtype=float)
    g = f if g is None else np.asarray(g, dtype=float)
    total = sum(inner(measure, apply_Li(measure, f, i), apply_Li(measure, g, i)) for i in range(measure.n))
    other = -inner(measure, f, apply_L(measure, g))
    scale = max(1.0, abs(total), float(np.max(np.abs(f)) * np.max(np.abs(g))) if f.size else 1.0)
    if abs(total - other) > ALGEBRA_TOL * scale:
        raise ArithmeticError(f"Dirichlet form mismatch: {total!r} vs {other!r}")
    return float(total)


def diff_bound_slack(measure: GibbsMeasure, f, i: int) -> tuple[float, float]:
    """Worst slacks of the two pointwise bounds tying L_i f to differences along coordinate i.

    First: max(|L_i f(y)|, |L_i f(z)|) - |f(y) - f(z)| / 2 over pairs y, z differing only at i.
    Second: max over the fiber of |f(y) - f(z)| minus |L_i f(x)|.  Both must be >= 0.
    """
    f = np.asarray(f, dtype=float)
    fibers = measure.space.fiber_indices(i)
    fv = f[fibers]
    dv = np.abs(apply_Li(measure, f, i)[fibers])
    diffs = np.abs(fv[:, :, None] - fv[:, None, :])
    first = np.maximum(dv[:, :, None], dv[:, None, :]) - 0.5 * diffs
    spread = diffs.max(axis=(1, 2))
    second = spread[:, None] - dv
    return float(first.min()), float(second.min())
