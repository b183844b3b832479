"""Dataset container, CSV round-tripping, standardization and splitting.

CSV files are UTF-8 with a header row.  Floats are written with ``repr`` so
a save/load round trip reproduces every value bit-for-bit.  Datasets may
carry a stored uniform draw per row (used by stochastic thresholds to make
tie-breaking reproducible); the draw column is opt-in by name on load so it
is never confused with a feature.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateFeatureError,
    DegenerateInputError,
    ParameterDomainError,
    ParseError,
    SchemaError,
    ShapeError,
    SizeError,
)

__all__ = [
    "LabeledDataset",
    "ZScoreTransform",
    "SplitSpec",
    "load_csv",
    "save_csv",
    "zscore",
    "split",
    "write_results_csv",
]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix (n, d), binary labels (n,), optional stored draws (n,)."""

    covariates: np.ndarray
    labels: np.ndarray
    draws: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.covariates, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ShapeError(f"covariates must be 2-d, got shape {x.shape}")
        y = np.asarray(self.labels).ravel()
        if y.shape[0] != x.shape[0]:
            raise ShapeError(
                f"{x.shape[0]} covariate rows but {y.shape[0]} labels"
            )
        if x.shape[0] == 0:
            raise DegenerateInputError("empty dataset")
        if not np.all((y == 0) | (y == 1)):
            raise SchemaError("labels must be 0/1")
        z = self.draws
        if z is not None:
            z = np.asarray(z, dtype=np.float64).ravel()
            if z.shape[0] != x.shape[0]:
                raise ShapeError(
                    f"{x.shape[0]} rows but {z.shape[0]} draws"
                )
            if z.size and (z.min() < 0.0 or z.max() > 1.0):
                raise SchemaError("draws must lie in [0, 1]")
        names = self.feature_names
        if names is None:
            names = tuple(f"x{j}" for j in range(x.shape[1]))
        else:
            names = tuple(names)
            if len(names) != x.shape[1]:
                raise SchemaError(
                    f"{len(names)} feature names for {x.shape[1]} columns"
                )
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "labels", y.astype(np.int64))
        object.__setattr__(self, "draws", z)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def d(self) -> int:
        return self.covariates.shape[1]

    @property
    def positive_count(self) -> int:
        return int(self.labels.sum())

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            covariates=self.covariates[idx],
            labels=self.labels[idx],
            draws=None if self.draws is None else self.draws[idx],
            feature_names=self.feature_names,
        )


def load_csv(
    path, label_column: str = "label", draw_column: str | None = None
) -> LabeledDataset:
    """Read a headered UTF-8 CSV into a dataset.

    All columns except the label (and the optional draw column) are features,
    kept in header order.  Labels must be exactly 0 or 1; missing cells and
    unparsable numbers raise with the offending line number.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise SchemaError(
                f"{path}: no {label_column!r} column in header {header}"
            )
        if draw_column is not None and draw_column not in header:
            raise SchemaError(
                f"{path}: no {draw_column!r} column in header {header}"
            )
        label_i = header.index(label_column)
        draw_i = header.index(draw_column) if draw_column is not None else None
        feature_is = [
            i for i in range(len(header)) if i != label_i and i != draw_i
        ]
        if not feature_is:
            raise SchemaError(f"{path}: no feature columns besides {label_column!r}")

        rows: list[list[float]] = []
        labels: list[int] = []
        draws: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {line_no}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            vals: list[float] = []
            for i, cell in enumerate(row):
                cell = cell.strip()
                if not cell:
                    raise ParseError(
                        f"{path}: line {line_no}: missing value in column "
                        f"{header[i]!r}"
                    )
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: line {line_no}: cannot parse {cell!r} in "
                        f"column {header[i]!r}"
                    ) from None
            lab = vals[label_i]
            if lab not in (0.0, 1.0):
                raise SchemaError(
                    f"{path}: line {line_no}: label must be 0 or 1, got {row[label_i]!r}"
                )
            labels.append(int(lab))
            if draw_i is not None:
                zv = vals[draw_i]
                if not 0.0 <= zv <= 1.0:
                    raise SchemaError(
                        f"{path}: line {line_no}: draw must lie in [0, 1], "
                        f"got {row[draw_i]!r}"
                    )
                draws.append(zv)
            rows.append([vals[i] for i in feature_is])

    if not rows:
        raise DegenerateInputError(f"{path}: no data rows")
    return LabeledDataset(
        covariates=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        draws=np.asarray(draws, dtype=np.float64) if draw_i is not None else None,
        feature_names=tuple(header[i] for i in feature_is),
    )


def save_csv(ds: LabeledDataset, path, include_draws: bool = True) -> None:
    """Write the dataset back out; floats use repr for exact round trips."""
    path = Path(path)
    with_draws = include_draws and ds.draws is not None
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(ds.feature_names) + ["label"]
        if with_draws:
            header.append("draw")
        writer.writerow(header)
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.covariates[i]]
            row.append(str(int(ds.labels[i])))
            if with_draws:
                row.append(repr(float(ds.draws[i])))
            writer.writerow(row)


@dataclass(frozen=True)
class ZScoreTransform:
    """Per-feature standardization fitted on one dataset, applicable to others.

    Uses the population standard deviation (ddof = 0).
    """

    means: tuple[float, ...]
    sds: tuple[float, ...]

    def apply(self, ds: LabeledDataset) -> LabeledDataset:
        if ds.d != len(self.means):
            raise ShapeError(
                f"transform fitted on {len(self.means)} features, dataset has {ds.d}"
            )
        x = (ds.covariates - np.asarray(self.means)) / np.asarray(self.sds)
        return LabeledDataset(
            covariates=x,
            labels=ds.labels,
            draws=ds.draws,
            feature_names=ds.feature_names,
        )


def zscore(ds: LabeledDataset) -> tuple[LabeledDataset, ZScoreTransform]:
    """Standardize features to mean 0, sd 1; labels and draws pass through."""
    means = ds.covariates.mean(axis=0)
    sds = ds.covariates.std(axis=0)
    flat = np.flatnonzero(sds == 0.0)
    if flat.size:
        name = ds.feature_names[int(flat[0])]
        raise DegenerateFeatureError(
            f"feature {name!r} has zero variance and cannot be standardized"
        )
    transform = ZScoreTransform(
        means=tuple(float(m) for m in means),
        sds=tuple(float(s) for s in sds),
    )
    return transform.apply(ds), transform


@dataclass(frozen=True)
class SplitSpec:
    """Three-way split plan: fractions summing to 1, a seed, and options.

    ``downsample_negative_ratio`` keeps that fraction of negative rows
    (chosen uniformly without replacement) before any splitting.
    ``stratified`` allocates each class to the three parts separately so
    every part holds its proportional positive count to within one row.
    """

    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    seed: int = 0
    stratified: bool = False
    downsample_negative_ratio: float | None = None

    def __post_init__(self) -> None:
        if len(self.fractions) != 3 or any(f <= 0.0 for f in self.fractions):
            raise ParameterDomainError(
                f"fractions {self.fractions!r} must be three positive numbers"
            )
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ParameterDomainError(
                f"fractions {self.fractions!r} must sum to 1"
            )
        ratio = self.downsample_negative_ratio
        if ratio is not None and not 0.0 < ratio <= 1.0:
            raise ParameterDomainError(
                f"downsample ratio {ratio!r} outside (0, 1]"
            )


def _largest_remainder(fractions, m: int) -> list[int]:
    """Integer sizes summing to m, proportional to fractions within one row."""
    base = [int(np.floor(f * m)) for f in fractions]
    rem = m - sum(base)
    # Distribute leftovers by descending fractional part, earlier part wins ties.
    frac_parts = [f * m - b for f, b in zip(fractions, base)]
    for i in sorted(range(len(base)), key=lambda i: (-frac_parts[i], i))[:rem]:
        base[i] += 1
    return base


def split(
    ds: LabeledDataset, spec: SplitSpec
) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Deterministic train/validation/test split under the spec's seed.

    Negative downsampling happens first, then allocation by largest
    remainder, then a seeded permutation assigns rows.  Row order inside
    each part is ascending original index.  Raises when any part would be
    empty.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
    labels = ds.labels
    if spec.downsample_negative_ratio is not None:
        neg = np.flatnonzero(labels == 0)
        keep_n = int(round(spec.downsample_negative_ratio * neg.size))
        kept_neg = np.sort(rng.choice(neg, size=keep_n, replace=False))
        keep = np.sort(np.concatenate((np.flatnonzero(labels == 1), kept_neg)))
    else:
        keep = np.arange(ds.n)

    def allocate(idx: np.ndarray) -> list[np.ndarray]:
        sizes = _largest_remainder(spec.fractions, idx.size)
        perm = rng.permutation(idx)
        out = []
        start = 0
        for size in sizes:
            out.append(perm[start : start + size])
            start += size
        return out

    if spec.stratified:
        pos_parts = allocate(keep[labels[keep] == 1])
        neg_parts = allocate(keep[labels[keep] == 0])
        parts = [
            np.sort(np.concatenate((p, q))) for p, q in zip(pos_parts, neg_parts)
        ]
    else:
        parts = [np.sort(p) for p in allocate(keep)]

    for name, part in zip(("train", "validation", "test"), parts):
        if part.size == 0:
            raise SizeError(
                f"{name} split would be empty for {keep.size} rows with "
                f"fractions {spec.fractions!r}"
            )
    return tuple(ds.subset(p) for p in parts)


def _fmt_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_results_csv(path, header, rows, metadata: dict) -> None:
    """Write results with a '#' key=value preamble (sorted keys, no timestamps)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        for key in sorted(metadata):
            fh.write(f"# {key}={metadata[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])
