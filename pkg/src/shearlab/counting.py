"""Orbit counting on discriminant quadrics and growth-law fitting.

The orbit of an integer form vector under a discrete group is enumerated
by word search, deduplicated exactly, and counted inside norm balls.  The
two built-in scenarios (full modular group and the thin subgroup, both
acting on x0 = (0, 1, 0)) have trivial stabilizer, so vectors, group
elements, and congruence cosets are in bijection and per-coset counts are
well defined.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import FormVector, IntGroupElement, spin_cover
from .groups import (BudgetExceeded, CosetLabel, GroupSpec, WordBudget,
                     coset_space, enumerate_words)


class InsufficientDataError(ValueError):
    pass


class StabilizerError(RuntimeError):
    """Two distinct words hit the same vector: the bijection assumption
    behind per-coset counts has failed for this orbit."""


def _norm_lt(v: FormVector, t: float, norm: str) -> bool:
    # strict inequality: the ball is open
    if norm == "sup":
        return max(abs(v.p), abs(v.q), abs(v.r)) < t
    if norm == "euclidean":
        return v.p * v.p + v.q * v.q + v.r * v.r < t * t
    raise ValueError(f"unknown norm tag {norm!r}")


@dataclass(frozen=True)
class OrbitQuery:
    spec: GroupSpec
    x0: FormVector
    t_list: tuple
    norm: str = "sup"
    q: Optional[int] = None
    coset_filter: Optional[CosetLabel] = None
    explore_factor: float = 3.0
    budget: WordBudget = field(default_factory=lambda: WordBudget(4096, 10 ** 7))

    def __post_init__(self):
        object.__setattr__(self, "t_list", tuple(float(t) for t in self.t_list))
        if self.x0.entries() == (0, 0, 0):
            raise ValueError("x0 must be nonzero")
        if any(b >= a for a, b in zip(self.t_list[1:], self.t_list)):
            raise ValueError("t_list must be strictly increasing")
        if self.norm not in ("sup", "euclidean"):
            raise ValueError(f"unknown norm tag {self.norm!r}")
        if self.coset_filter is not None and self.q is None:
            raise ValueError("coset_filter requires q")


@dataclass
class CountResult:
    t_list: tuple
    counts: tuple
    saturated: tuple
    wall_time: float
    x0_norm: float = 1.0
    q: Optional[int] = None
    breakdown: Optional[dict] = None  # CosetLabel -> per-T counts

    def __post_init__(self):
        if any(b > a for a, b in zip(self.counts[1:], self.counts)):
            raise ValueError("counts must be nondecreasing in T")

    def largest_saturated_index(self) -> int:
        idx = [i for i, s in enumerate(self.saturated) if s]
        if not idx:
            raise InsufficientDataError("no saturated radius")
        return idx[-1]


def count_orbit(query: OrbitQuery) -> CountResult:
    """Exact ball counts of the orbit x0 * spin_cover(Gamma).

    The search expands a word only while its vector stays inside the
    exploration box (explore_factor times the largest requested radius);
    the box-closure heuristic is validated against brute-force quadric
    enumeration in the tests, and doubling explore_factor is the knob to
    turn if a new scenario is in doubt.  A budget overrun downgrades every
    radius to saturated=False rather than guessing.
    """
    t0 = time.perf_counter()
    t_max = max(query.t_list)
    x0n = query.x0.sup_norm() if query.norm == "sup" else query.x0.euclid_norm()
    gate_r = query.explore_factor * max(t_max, x0n + 1.0)

    def vec_of(g: IntGroupElement) -> FormVector:
        return spin_cover(g, query.x0)

    def in_gate(g: IntGroupElement) -> bool:
        return _norm_lt(vec_of(g), gate_r, query.norm)

    saturated = True
    try:
        res = enumerate_words(query.spec, predicate=None,
                              budget=query.budget, expand=in_gate)
        elements = res.elements
        saturated = res.saturated
    except BudgetExceeded as e:
        elements = e.partial.elements
        saturated = False

    by_vec = {}
    for g in elements:
        v = vec_of(g)
        key = v.entries()
        other = by_vec.get(key)
        if other is not None and other != g:
            raise StabilizerError(f"vector {key} reached by {other.entries()} "
                                  f"and {g.entries()}")
        by_vec[key] = g

    labels = None
    if query.q is not None:
        labels = sorted(coset_space(query.spec, query.q),
                        key=lambda lab: lab.entries)
        per_coset = {lab: [0] * len(query.t_list) for lab in labels}
    counts = []
    for i, t in enumerate(query.t_list):
        n = 0
        for key, g in by_vec.items():
            v = FormVector(*key)
            if not _norm_lt(v, t, query.norm):
                continue
            if query.q is not None:
                lab = CosetLabel.of(g, query.q)
                if query.coset_filter is not None and lab != query.coset_filter:
                    continue
                per_coset[lab][i] += 1
            n += 1
        counts.append(n)
    breakdown = None
    if query.q is not None:
        breakdown = {lab: tuple(cs) for lab, cs in per_coset.items()}
    return CountResult(query.t_list, tuple(counts),
                       tuple(saturated for _ in query.t_list),
                       time.perf_counter() - t0, x0n, query.q, breakdown)


# -- growth-law fitting ------------------------------------------------------

FIT_MODELS = ("t_log_t", "linear", "pure_t_log_t", "power", "t_plus_t_delta")


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: tuple
    residual_norm: float
    rel_residual_top_octave: float
    delta_hat: Optional[float] = None
    t_used: tuple = ()
    n_points: int = 0

    def predict(self, t):
        t = np.asarray(t, dtype=float)
        if self.model == "power":
            c, alpha = self.coefficients
            return c * t ** alpha
        return _design(self.model, t, self.delta_hat) @ np.asarray(self.coefficients)


def _design(model: str, t: np.ndarray, delta: Optional[float] = None) -> np.ndarray:
    if model == "t_log_t":
        return np.column_stack([t * np.log(t), t])
    if model == "linear":
        return t[:, None]
    if model == "pure_t_log_t":
        return (t * np.log(t))[:, None]
    if model == "t_plus_t_delta":
        return np.column_stack([t, t ** delta])
    raise ValueError(f"unknown model {model!r}")


def fit_counting_law(result: CountResult, model: str) -> FitResult:
    """Least squares in the chosen growth model over the saturated radii
    at least 10 * ||x0|| (below that the asymptotic laws have not set in).

    "power" fits C * T^alpha by log-log least squares; "t_plus_t_delta"
    nests a one-dimensional search for delta (coarse grid, then one
    parabolic refinement) around linear least squares for the
    coefficients.  rel_residual_top_octave is the worst relative miss
    over the top octave of fitted radii, the quantity the growth-law
    checks threshold on.
    """
    if model not in FIT_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {FIT_MODELS}")
    keep = [i for i, (t, s) in enumerate(zip(result.t_list, result.saturated))
            if s and t >= 10.0 * result.x0_norm]
    if len(keep) < 4:
        raise InsufficientDataError(
            f"need at least 4 saturated radii at or above {10.0 * result.x0_norm:g}, "
            f"have {len(keep)}")
    t = np.array([result.t_list[i] for i in keep], dtype=float)
    y = np.array([result.counts[i] for i in keep], dtype=float)

    delta = None
    if model == "power":
        if np.any(y <= 0):
            raise InsufficientDataError("power fit needs positive counts")
        a = np.column_stack([np.log(t), np.ones_like(t)])
        sol, *_ = np.linalg.lstsq(a, np.log(y), rcond=None)
        alpha, logc = sol
        coeffs = (math.exp(logc), alpha)
        fitted = coeffs[0] * t ** alpha
    elif model == "t_plus_t_delta":
        def rss(d):
            x = _design(model, t, d)
            sol, *_ = np.linalg.lstsq(x, y, rcond=None)
            r = y - x @ sol
            return float(r @ r), sol
        grid = np.linspace(0.05, 0.99, 95)
        vals = [rss(d)[0] for d in grid]
        k = int(np.argmin(vals))
        # one parabolic refinement through the bracketing triple
        if 0 < k < len(grid) - 1:
            d0, d1, d2 = grid[k - 1:k + 2]
            v0, v1, v2 = vals[k - 1:k + 2]
            denom = (v0 - 2 * v1 + v2)
            delta = d1 if denom == 0 else d1 + 0.5 * (grid[1] - grid[0]) * (v0 - v2) / denom
            delta = float(np.clip(delta, d0, d2))
        else:
            delta = float(grid[k])
        _, sol = rss(delta)
        coeffs = tuple(float(v) for v in sol)
        fitted = _design(model, t, delta) @ sol
    else:
        x = _design(model, t)
        sol, *_ = np.linalg.lstsq(x, y, rcond=None)
        coeffs = tuple(float(v) for v in sol)
        fitted = x @ sol

    resid = y - fitted
    top = t >= max(t) / 2.0
    rel_top = float(np.max(np.abs(resid[top]) / np.maximum(y[top], 1.0)))
    return FitResult(model, coeffs, float(math.sqrt(resid @ resid)), rel_top,
                     delta, tuple(t.tolist()), len(keep))


# -- congruence coset statistics ---------------------------------------------

def coset_disparity(result: CountResult) -> float:
    """Largest per-coset count divided by the mean over the whole coset
    space (empty cosets included) at the largest saturated radius."""
    if result.breakdown is None:
        raise ValueError("result has no coset breakdown; set q in the query")
    i = result.largest_saturated_index()
    vals = [cs[i] for cs in result.breakdown.values()]
    mean = sum(vals) / len(vals)
    if mean == 0:
        return 1.0 if max(vals) == 0 else math.inf
    return max(vals) / mean


def identity_coset_factor(result: CountResult) -> float:
    """Identity-coset count over the coset-space mean at the largest
    saturated radius."""
    if result.breakdown is None or result.q is None:
        raise ValueError("result has no coset breakdown; set q in the query")
    i = result.largest_saturated_index()
    vals = [cs[i] for cs in result.breakdown.values()]
    mean = sum(vals) / len(vals)
    ident = result.breakdown[CosetLabel.identity(result.q)][i]
    if mean == 0:
        return 1.0 if ident == 0 else math.inf
    return ident / mean
