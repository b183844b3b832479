"""Stochastic threshold classifiers over scores in [0, 1].

A threshold pair (t, p) maps a score s and a stored uniform draw z to the
label 1 exactly when ``s > t`` or (``s == t`` and ``z < p``).  The tie test
is an exact float comparison on purpose: score generators in this package
emit exactly representable tie values, and the draw stream is stored with
the data so the same classification can be reproduced bit-for-bit.

The module also carries a small closed-form model of one-dimensional
regression functions (piecewise-linear, or a single atom) so population
confusion matrices can be computed exactly instead of by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    DomainError,
    ParameterDomainError,
    UnsupportedSpecError,
)
from .metrics import ConfusionMatrix

__all__ = [
    "StochasticThreshold",
    "ScoredSample",
    "Piece",
    "RegressionFunctionSpec",
    "classify_sample",
    "classify_batch",
    "empirical_confusion",
    "population_confusion",
    "population_confusion_parts",
    "estimate_margin_probability",
    "as_sample_arrays",
]


@dataclass(frozen=True)
class StochasticThreshold:
    """Threshold location t and tie-acceptance probability p, both in [0, 1]."""

    t: float
    p: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t) and 0.0 <= self.t <= 1.0):
            raise ParameterDomainError(f"threshold t={self.t!r} outside [0, 1]")
        if not (np.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise ParameterDomainError(f"tie probability p={self.p!r} outside [0, 1]")


@dataclass(frozen=True)
class ScoredSample:
    """One scored observation: score in [0, 1], binary label, stored draw."""

    score: float
    label: int
    draw: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ParameterDomainError(f"score {self.score!r} outside [0, 1]")
        if self.label not in (0, 1):
            raise ParameterDomainError(f"label {self.label!r} not in {{0, 1}}")
        if not (np.isfinite(self.draw) and 0.0 <= self.draw <= 1.0):
            raise ParameterDomainError(f"draw {self.draw!r} outside [0, 1]")


def as_sample_arrays(
    samples, *, require_draws: bool = False
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Normalize a sample collection to (scores, labels, draws) arrays.

    Accepts a sequence of :class:`ScoredSample` / (score, label[, draw])
    tuples, or a 2- or 3-tuple of equal-length arrays.  Raises on empty
    input, and on missing draws when ``require_draws`` is set.
    """
    scores = labels = draws = None
    if (
        isinstance(samples, tuple)
        and len(samples) in (2, 3)
        and np.ndim(samples[0]) >= 1
    ):
        scores = np.asarray(samples[0], dtype=np.float64).ravel()
        labels = np.asarray(samples[1]).ravel()
        if len(samples) == 3 and samples[2] is not None:
            draws = np.asarray(samples[2], dtype=np.float64).ravel()
    else:
        rows = list(samples)
        if rows and isinstance(rows[0], ScoredSample):
            scores = np.array([r.score for r in rows], dtype=np.float64)
            labels = np.array([r.label for r in rows], dtype=np.int64)
            draws = np.array([r.draw for r in rows], dtype=np.float64)
        elif rows:
            arr = np.asarray(rows, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] not in (2, 3):
                raise ParameterDomainError(
                    "sample tuples must have 2 or 3 entries (score, label[, draw])"
                )
            scores = arr[:, 0]
            labels = arr[:, 1]
            draws = arr[:, 2] if arr.shape[1] == 3 else None
        else:
            scores = np.empty(0)
            labels = np.empty(0, dtype=np.int64)
    if scores.size == 0:
        raise DegenerateInputError("empty sample collection")
    if scores.shape != labels.shape or (draws is not None and draws.shape != scores.shape):
        raise ParameterDomainError("scores, labels and draws differ in length")
    if not np.all((labels == 0) | (labels == 1)):
        raise ParameterDomainError("labels must be 0/1")
    labels = labels.astype(np.int64)
    if require_draws and draws is None:
        raise DegenerateInputError(
            "this operation needs stored uniform draws for every sample"
        )
    return scores, labels, draws


def classify_sample(th: StochasticThreshold, score: float, draw: float = 0.0) -> int:
    """Label for one score: 1 iff score > t, or score == t and draw < p."""
    if not (np.isfinite(score) and 0.0 <= score <= 1.0):
        raise ParameterDomainError(f"score {score!r} outside [0, 1]")
    if not (np.isfinite(draw) and 0.0 <= draw <= 1.0):
        raise ParameterDomainError(f"draw {draw!r} outside [0, 1]")
    return int(score > th.t or (score == th.t and draw < th.p))


def classify_batch(
    th: StochasticThreshold, scores, draws=None
) -> np.ndarray:
    """Vectorized :func:`classify_sample`; missing draws mean draw = 0."""
    s = np.asarray(scores, dtype=np.float64)
    if draws is None:
        z = np.zeros_like(s)
    else:
        z = np.asarray(draws, dtype=np.float64)
        if z.shape != s.shape:
            raise ParameterDomainError("scores and draws differ in shape")
    return ((s > th.t) | ((s == th.t) & (z < th.p))).astype(np.int64)


def empirical_confusion(th: StochasticThreshold, samples) -> ConfusionMatrix:
    """Confusion fractions of the threshold on a finite sample collection."""
    scores, labels, draws = as_sample_arrays(samples)
    pred = classify_batch(th, scores, draws)
    n = scores.size
    tp = int(np.sum((pred == 1) & (labels == 1)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    fn = int(np.sum((pred == 0) & (labels == 1)))
    tn = n - tp - fp - fn
    return ConfusionMatrix(tn=tn / n, fp=fp / n, fn=fn / n, tp=tp / n)


# ---------------------------------------------------------------------------
# Closed-form regression functions on [0, 1]


@dataclass(frozen=True)
class Piece:
    """Linear segment of a regression function: value v_lo at lo, v_hi at hi."""

    lo: float
    hi: float
    v_lo: float
    v_hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ParameterDomainError(
                f"piece interval [{self.lo!r}, {self.hi!r}] invalid within [0, 1]"
            )
        for v in (self.v_lo, self.v_hi):
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ParameterDomainError(f"piece value {v!r} outside [0, 1]")


@dataclass(frozen=True)
class RegressionFunctionSpec:
    """Exact regression function: piecewise-linear on [0, 1] or a point atom.

    Exactly one of ``pieces`` (contiguous cover of [0, 1]) or ``atom`` (the
    value at the single domain point 0) must be given.  ``r`` is the sup of
    the function — the imbalance degree in the decomposition eta = r * zeta
    with sup zeta = 1.  The identically-zero function is admitted with
    r = 0 as a degenerate special case (its zeta is undefined).
    """

    pieces: tuple[Piece, ...] = ()
    atom: float | None = None

    def __post_init__(self) -> None:
        if (len(self.pieces) > 0) == (self.atom is not None):
            raise ParameterDomainError(
                "exactly one of pieces / atom must be provided"
            )
        if self.atom is not None:
            if not (np.isfinite(self.atom) and 0.0 <= self.atom <= 1.0):
                raise ParameterDomainError(f"atom value {self.atom!r} outside [0, 1]")
            return
        if self.pieces[0].lo != 0.0 or self.pieces[-1].hi != 1.0:
            raise ParameterDomainError("pieces must cover [0, 1]")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.hi != b.lo:
                raise ParameterDomainError(
                    f"pieces not contiguous at {a.hi!r} vs {b.lo!r}"
                )

    @property
    def r(self) -> float:
        """Sup of the function (imbalance degree); 0 only for the zero function."""
        if self.atom is not None:
            return float(self.atom)
        return float(max(max(p.v_lo, p.v_hi) for p in self.pieces))

    def knots(self) -> tuple[float, ...]:
        """Domain breakpoints of the piecewise definition."""
        if self.atom is not None:
            return (0.0,)
        return tuple([p.lo for p in self.pieces] + [self.pieces[-1].hi])

    def evaluate(self, x):
        """Function value at x (scalar or array); out-of-domain points raise."""
        arr = np.asarray(x, dtype=np.float64)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr)
        if self.atom is not None:
            if np.any(pts != 0.0):
                raise DomainError("atom regression function is defined only at 0")
            out = np.full(pts.shape, float(self.atom))
            return float(out[0]) if scalar else out
        if pts.size and (np.min(pts) < 0.0 or np.max(pts) > 1.0):
            raise DomainError("points outside the domain [0, 1]")
        lo = np.array([p.lo for p in self.pieces])
        hi = np.array([p.hi for p in self.pieces])
        v_lo = np.array([p.v_lo for p in self.pieces])
        v_hi = np.array([p.v_hi for p in self.pieces])
        idx = np.clip(np.searchsorted(lo, pts, side="right") - 1, 0, len(lo) - 1)
        frac = (pts - lo[idx]) / (hi[idx] - lo[idx])
        out = v_lo[idx] + (v_hi[idx] - v_lo[idx]) * frac
        return float(out[0]) if scalar else out

    def zeta(self, x):
        """Shape factor eta / r; undefined for the zero function."""
        r = self.r
        if r == 0.0:
            raise DegenerateInputError("zeta undefined for the zero function")
        return self.evaluate(x) / r


def _linear_mass(v_a: float, v_b: float, width: float) -> float:
    """Integral of a linear value running v_a -> v_b over an interval."""
    return width * (v_a + v_b) / 2.0


def population_confusion_parts(
    eta: RegressionFunctionSpec, t: float
) -> tuple[tuple[float, float, float, float], tuple[float, float, float, float]]:
    """Split population cells into (p = 0 base, tie mass moved per unit p).

    Full cells at (t, p) are ``base + p * tie`` componentwise in the order
    (tn, fp, fn, tp).  Exact closed form; no sampling.
    """
    if not (np.isfinite(t) and 0.0 <= t <= 1.0):
        raise ParameterDomainError(f"threshold t={t!r} outside [0, 1]")
    # Mass integrals over the strict-above region A, the tie set E and the
    # rest B: pos_* = integral of eta, neg_* = integral of (1 - eta).
    pos_a = neg_a = pos_e = neg_e = pos_b = neg_b = 0.0
    if eta.atom is not None:
        v = float(eta.atom)
        if v > t:
            pos_a, neg_a = v, 1.0 - v
        elif v == t:
            pos_e, neg_e = v, 1.0 - v
        else:
            pos_b, neg_b = v, 1.0 - v
    elif not eta.pieces:  # pragma: no cover - construction forbids this
        raise UnsupportedSpecError("regression function has no definition")
    else:
        for pc in eta.pieces:
            w = pc.hi - pc.lo
            if pc.v_lo == pc.v_hi:
                c = pc.v_lo
                if c > t:
                    pos_a += c * w
                    neg_a += (1.0 - c) * w
                elif c == t:
                    pos_e += c * w
                    neg_e += (1.0 - c) * w
                else:
                    pos_b += c * w
                    neg_b += (1.0 - c) * w
                continue
            v0, v1 = pc.v_lo, pc.v_hi
            if min(v0, v1) > t:
                m = _linear_mass(v0, v1, w)
                pos_a += m
                neg_a += w - m
            elif max(v0, v1) <= t:
                m = _linear_mass(v0, v1, w)
                pos_b += m
                neg_b += w - m
            else:
                w_cross = (t - v0) * w / (v1 - v0)
                m_left = _linear_mass(v0, t, w_cross)
                m_right = _linear_mass(t, v1, w - w_cross)
                if v0 > t:
                    pos_a += m_left
                    neg_a += w_cross - m_left
                    pos_b += m_right
                    neg_b += (w - w_cross) - m_right
                else:
                    pos_b += m_left
                    neg_b += w_cross - m_left
                    pos_a += m_right
                    neg_a += (w - w_cross) - m_right
    base = (neg_b + neg_e, neg_a, pos_b + pos_e, pos_a)  # tn, fp, fn, tp at p=0
    tie = (-neg_e, neg_e, -pos_e, pos_e)
    return base, tie


def population_confusion(
    eta: RegressionFunctionSpec, th: StochasticThreshold
) -> ConfusionMatrix:
    """Exact population confusion matrix of the threshold under eta.

    Covariates are uniform on the piecewise domain (or all mass at the atom
    point), labels are Bernoulli(eta(x)), and tie draws are independent
    uniforms — all integrated in closed form.
    """
    base, tie = population_confusion_parts(eta, th.t)
    p = th.p
    tn, fp, fn, tp = (b + p * s for b, s in zip(base, tie))
    return ConfusionMatrix(tn=tn, fp=fp, fn=fn, tp=tp)


def estimate_margin_probability(scores, t: float, eps: float) -> float:
    """Fraction of scores within eps of t (closed interval)."""
    if not np.isfinite(eps) or eps < 0.0:
        raise ParameterDomainError(f"margin width eps={eps!r} must be >= 0")
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise DegenerateInputError("empty score array")
    return float(np.mean(np.abs(s - t) <= eps))
