"""Confusion-matrix measures over probability-normalized 2x2 matrices.

A confusion matrix here stores population *fractions*, not counts: the four
cells are nonnegative and sum to one.  A measure maps such a matrix to a
score in which correcting errors never hurts: moving false-positive mass to
true-negative, or false-negative mass to true-positive, may only increase
the value.  :func:`check_cmm_monotonicity` verifies that direction for a
concrete matrix and shift pair.

Ratio-style measures adopt the convention that a zero denominator yields 0,
and the correlation measure returns 0 whenever any of its four marginal
factors vanishes.  These conventions keep every registered measure total on
the whole simplex while preserving the monotone direction above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterDomainError

__all__ = [
    "ConfusionMatrix",
    "CmmSpec",
    "RocCurve",
    "REGISTERED_KINDS",
    "representative_specs",
    "evaluate_cmm",
    "check_cmm_monotonicity",
    "roc_and_auroc",
]

#: Tolerance for cell-range / sum-to-one validation and for the monotonicity
#: comparison.  Cells produced as integer counts divided by n are exact, so
#: this only absorbs float noise from user-constructed matrices.
CELL_TOL = 1e-12

REGISTERED_KINDS = (
    "accuracy",
    "weighted_accuracy",
    "precision",
    "recall",
    "f_beta",
    "mcc",
    "tp_tn_product",
    "tp_pow_theta_tn",
)

_PARAM_FREE = frozenset(
    {"accuracy", "precision", "recall", "mcc", "tp_tn_product"}
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 confusion matrix of population fractions (tn, fp, fn, tp)."""

    tn: float
    fp: float
    fn: float
    tp: float

    def __post_init__(self) -> None:
        cells = (self.tn, self.fp, self.fn, self.tp)
        for name, v in zip(("tn", "fp", "fn", "tp"), cells):
            if not np.isfinite(v) or v < -CELL_TOL or v > 1.0 + CELL_TOL:
                raise ParameterDomainError(
                    f"confusion cell {name}={v!r} outside [0, 1]"
                )
        total = float(sum(cells))
        if abs(total - 1.0) > 4 * CELL_TOL:
            raise ParameterDomainError(
                f"confusion cells must sum to 1 (got {total!r})"
            )

    @classmethod
    def from_counts(cls, tn: int, fp: int, fn: int, tp: int) -> "ConfusionMatrix":
        """Build fractions from raw counts (must not all be zero)."""
        n = tn + fp + fn + tp
        if n <= 0:
            raise DegenerateInputError("confusion counts sum to zero")
        return cls(tn=tn / n, fp=fp / n, fn=fn / n, tp=tp / n)

    @property
    def positive_rate(self) -> float:
        """Fraction of truly positive mass, tp + fn."""
        return self.tp + self.fn


@dataclass(frozen=True)
class CmmSpec:
    """A registered measure kind plus its parameter, if the kind takes one.

    Parametric kinds: ``weighted_accuracy`` (weight in (0, 1)), ``f_beta``
    (beta > 0), ``tp_pow_theta_tn`` (theta > 0).  All other kinds must be
    constructed with ``param=None``.
    """

    kind: str
    param: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in REGISTERED_KINDS:
            raise ParameterDomainError(
                f"unknown measure kind {self.kind!r}; "
                f"registered: {', '.join(REGISTERED_KINDS)}"
            )
        if self.kind in _PARAM_FREE:
            if self.param is not None:
                raise ParameterDomainError(
                    f"measure {self.kind!r} takes no parameter"
                )
            return
        p = self.param
        if p is None or not np.isfinite(p):
            raise ParameterDomainError(
                f"measure {self.kind!r} requires a finite parameter"
            )
        if self.kind == "weighted_accuracy" and not 0.0 < p < 1.0:
            raise ParameterDomainError(
                f"weighted_accuracy weight must lie in (0, 1), got {p!r}"
            )
        if self.kind in ("f_beta", "tp_pow_theta_tn") and not p > 0.0:
            raise ParameterDomainError(
                f"{self.kind} parameter must be positive, got {p!r}"
            )

    @classmethod
    def parse(cls, text: str) -> "CmmSpec":
        """Parse ``"kind"`` or ``"kind:param"`` (e.g. ``"f_beta:1.0"``)."""
        kind, sep, raw = text.partition(":")
        kind = kind.strip()
        if not sep:
            return cls(kind=kind)
        try:
            param = float(raw)
        except ValueError as exc:
            raise ParameterDomainError(
                f"bad measure parameter {raw!r} in {text!r}"
            ) from exc
        return cls(kind=kind, param=param)

    def label(self) -> str:
        """Inverse of :meth:`parse`, used in CSV columns."""
        if self.param is None:
            return self.kind
        return f"{self.kind}:{self.param:g}"


def _cmm_values(spec: CmmSpec, tn, fp, fn, tp):
    """Evaluate the measure on cells given as floats or aligned arrays.

    The optimizer sweeps and the brute-force oracle both funnel through this
    single expression tree, so identical cell values produce bit-identical
    measure values on either path.
    """
    kind = spec.kind
    if kind == "accuracy":
        return tp + tn
    if kind == "weighted_accuracy":
        w = spec.param
        return (1.0 - w) * tp + w * tn
    if kind == "tp_tn_product":
        return tp * tn
    if kind == "tp_pow_theta_tn":
        return np.maximum(tp, 0.0) ** spec.param * tn
    if kind == "precision":
        num, den = tp, tp + fp
    elif kind == "recall":
        num, den = tp, tp + fn
    elif kind == "f_beta":
        b2 = spec.param * spec.param
        num = (1.0 + b2) * tp
        den = (1.0 + b2) * tp + fp + b2 * fn
    elif kind == "mcc":
        den = np.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
        num = tp * tn - fp * fn
    else:  # pragma: no cover - kinds are validated at construction
        raise ParameterDomainError(f"unknown measure kind {kind!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.divide(num, den)  # ufunc: scalar 0/0 yields nan, not a raise
    return np.where(den > 0.0, raw, 0.0)


def evaluate_cmm(spec: CmmSpec, c: ConfusionMatrix) -> float:
    """Value of the measure at ``c``; total on valid matrices."""
    return float(_cmm_values(spec, c.tn, c.fp, c.fn, c.tp))


def check_cmm_monotonicity(
    spec: CmmSpec, c: ConfusionMatrix, eps1: float, eps2: float
) -> bool:
    """True iff correcting errors by (eps1, eps2) does not decrease the value.

    ``eps1`` moves false-positive mass to true-negative; ``eps2`` moves
    false-negative mass to true-positive.  Both must fit inside the matrix's
    error cells.  The comparison allows slack ``CELL_TOL`` for float noise.
    """
    if not 0.0 <= eps1 <= c.fp + CELL_TOL:
        raise ParameterDomainError(
            f"eps1={eps1!r} outside [0, fp={c.fp!r}]"
        )
    if not 0.0 <= eps2 <= c.fn + CELL_TOL:
        raise ParameterDomainError(
            f"eps2={eps2!r} outside [0, fn={c.fn!r}]"
        )
    shifted = ConfusionMatrix(
        tn=c.tn + eps1,
        fp=max(c.fp - eps1, 0.0),
        fn=max(c.fn - eps2, 0.0),
        tp=c.tp + eps2,
    )
    return evaluate_cmm(spec, c) <= evaluate_cmm(spec, shifted) + CELL_TOL


def representative_specs() -> tuple[CmmSpec, ...]:
    """One spec per parameter-free kind, three per parametric kind.

    Convenience enumeration used by invariance tests and benchmarks so that
    "all registered measures" means the same thing everywhere.
    """
    specs: list[CmmSpec] = []
    for kind in REGISTERED_KINDS:
        if kind in _PARAM_FREE:
            specs.append(CmmSpec(kind))
        elif kind == "weighted_accuracy":
            specs.extend(CmmSpec(kind, w) for w in (0.25, 0.5, 0.75))
        else:
            specs.extend(CmmSpec(kind, p) for p in (0.5, 1.0, 2.0))
    return tuple(specs)


@dataclass(frozen=True)
class RocCurve:
    """ROC knots (fpr, tpr) from (0, 0) to (1, 1) plus the area under them.

    Tied scores are collapsed into a single knot per distinct score, so the
    straight segment across a tie group is exactly the set of rates
    achievable by randomized splitting of that group.
    """

    knots: tuple[tuple[float, float], ...]
    auroc: float

    def __post_init__(self) -> None:
        if len(self.knots) < 2:
            raise DegenerateInputError("ROC curve needs at least two knots")
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        if self.knots[0] != (0.0, 0.0) or self.knots[-1] != (1.0, 1.0):
            raise ParameterDomainError("ROC knots must run from (0,0) to (1,1)")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(ys) < 0):
            raise ParameterDomainError("ROC knots must be monotone")
        area = float(np.trapezoid(ys, xs))
        if abs(area - self.auroc) > 1e-9:
            raise ParameterDomainError(
                f"auroc={self.auroc!r} does not match knot area {area!r}"
            )


def roc_and_auroc(scores, labels) -> RocCurve:
    """ROC curve and area for real scores against binary labels.

    Requires at least one positive and one negative label.  Higher scores
    rank as more positive; ties are grouped as described on
    :class:`RocCurve`.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.size == 0:
        raise DegenerateInputError("empty score array")
    if s.shape != y.shape:
        raise ParameterDomainError(
            f"scores and labels differ in length ({s.size} vs {y.size})"
        )
    if not np.all((y == 0) | (y == 1)):
        raise ParameterDomainError("labels must be 0/1")
    y = y.astype(np.int64)
    npos = int(y.sum())
    nneg = int(y.size - npos)
    if npos == 0 or nneg == 0:
        raise DegenerateInputError(
            "ROC needs at least one positive and one negative label"
        )
    order = np.argsort(-s, kind="stable")
    s_desc = s[order]
    y_desc = y[order]
    # Last index of each tied-score group, in descending-score order.
    group_last = np.nonzero(np.append(s_desc[1:] != s_desc[:-1], True))[0]
    cum_tp = np.cumsum(y_desc)
    tp_at = cum_tp[group_last]
    fp_at = (group_last + 1) - tp_at
    fpr = np.concatenate(([0.0], fp_at / nneg))
    tpr = np.concatenate(([0.0], tp_at / npos))
    auroc = float(np.trapezoid(tpr, fpr))
    knots = tuple(zip(map(float, fpr), map(float, tpr)))
    return RocCurve(knots=knots, auroc=auroc)
