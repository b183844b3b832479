"""Command-line interface.

Usage errors (bad flags, malformed option values) exit with code 2; data
and domain errors (missing files, schema violations, infeasible parameter
combinations) exit with code 1 and a message.  A ``--config`` JSON file
supplies defaults that explicit flags override.
"""

from __future__ import annotations

import csv
import functools
import json
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bounds import (
    BoundInputs,
    estimation_error_bound,
    regret_bound,
    shattering_bound,
    uniform_error_bound,
)
from .errors import SchemaError, StochthreshError
from .experiments import (
    ExperimentConfig,
    default_n_grid,
    run_experiment1,
    run_experiment2,
    run_fraud_pipeline,
)
from .io import load_csv, save_csv
from .knn import KnnModel, KSelectionRule, select_k
from .metrics import CmmSpec
from .synth import (
    constant_problem,
    exp1_problem,
    exp2_nonuci_problem,
    exp2_uci_problem,
    generate,
    singleton_problem,
)
from .threshold_opt import brute_force_threshold  # noqa: F401  (re-export for docs)
from .threshold_opt import optimize_threshold, optimize_threshold_deterministic

__all__ = ["main"]


def _friendly(fn):
    """Map package/data errors to exit code 1 with the error message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (StochthreshError, FileNotFoundError, IsADirectoryError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _parse_metric(ctx, param, value):
    if value is None:
        return None
    try:
        return CmmSpec.parse(value)
    except StochthreshError as exc:
        raise click.UsageError(f"--metric: {exc}") from exc


def _parse_int_list(ctx, param, value):
    if value is None:
        return None
    try:
        items = tuple(int(v) for v in value.replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise click.UsageError(f"{param.opts[0]}: {value!r} is not a comma list of ints") from exc
    if not items:
        raise click.UsageError(f"{param.opts[0]}: empty list")
    return items


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise click.ClickException(f"{path}: config must be a JSON object")
    return cfg


def _pick(flag_value, config, key, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


@click.group()
@click.version_option(__version__, prog_name="stochthresh")
def main() -> None:
    """Stochastic threshold classifiers: tuning, experiments, bounds."""


# ---------------------------------------------------------------------------
# experiment


@main.group()
def experiment() -> None:
    """Synthetic experiment drivers with deterministic per-trial seeding."""


def _experiment_options(fn):
    fn = click.option("--config", "config_path", type=str, default=None,
                      help="JSON file with defaults; flags override.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed.")(fn)
    fn = click.option("--trials", type=int, default=None, help="Trials per n.")(fn)
    fn = click.option("--n-grid", callback=_parse_int_list, default=None,
                      help="Comma list of training sizes.")(fn)
    fn = click.option("--test-size", type=int, default=None)(fn)
    fn = click.option("--k-rule", type=click.Choice(["exp1", "exp2", "theorem", "extreme"]),
                      default=None)(fn)
    fn = click.option("--grid", type=int, default=None,
                      help="Population-optimum search grid per axis.")(fn)
    fn = click.option("--workers", type=int, default=None)(fn)
    fn = click.option("--out", type=str, default=None,
                      help="Results CSV path; a *_summary.csv lands beside it.")(fn)
    return fn


def _echo_exp_summary(summary_rows, fmt) -> None:
    for row in summary_rows:
        click.echo(fmt(row))


@experiment.command("exp1")
@_experiment_options
@click.option("--metric", callback=_parse_metric, default=None,
              help="Measure to optimize, e.g. tp_tn_product or f_beta:1.")
@click.option("--score-source", type=click.Choice(["knn", "eta"]), default=None,
              help="Tune on regressor scores (knn) or on true regression values (eta).")
@_friendly
def experiment_exp1(config_path, seed, trials, n_grid, test_size, k_rule, grid,
                    workers, out, metric, score_source):
    """Balanced plateaus: stochastic vs deterministic threshold regret."""
    config = _load_config(config_path)
    cfg = ExperimentConfig(
        experiment="exp1",
        n_grid=tuple(_pick(n_grid, config, "n_grid", default_n_grid())),
        trials=int(_pick(trials, config, "trials", 100)),
        master_seed=int(_pick(seed, config, "seed", 0)),
        metric=(metric if metric is not None
                else CmmSpec.parse(str(config.get("metric", "tp_tn_product")))),
        k_rule=str(_pick(k_rule, config, "k_rule", "exp1")),
        score_source=str(_pick(score_source, config, "score_source", "knn")),
        test_size=int(_pick(test_size, config, "test_size", 1000)),
        workers=int(_pick(workers, config, "workers", 1)),
        grid_t=int(_pick(grid, config, "grid", 401)),
        grid_p=int(_pick(grid, config, "grid", 401)),
    )
    _, summary = run_experiment1(cfg, out=out)
    _echo_exp_summary(
        summary,
        lambda r: f"n={r[0]} {r[1]}: mean_regret={r[4]:.6f} ci95={r[5]:.6f}",
    )


@experiment.command("exp2")
@_experiment_options
@_friendly
def experiment_exp2(config_path, seed, trials, n_grid, test_size, k_rule, grid,
                    workers, out):
    """Shrinking imbalance r = n^-1/2: error norms and F1 regret."""
    config = _load_config(config_path)
    cfg = ExperimentConfig(
        experiment="exp2",
        n_grid=tuple(_pick(n_grid, config, "n_grid", default_n_grid())),
        trials=int(_pick(trials, config, "trials", 100)),
        master_seed=int(_pick(seed, config, "seed", 0)),
        metric=CmmSpec("f_beta", 1.0),
        k_rule=str(_pick(k_rule, config, "k_rule", "exp2")),
        test_size=int(_pick(test_size, config, "test_size", 1000)),
        workers=int(_pick(workers, config, "workers", 1)),
        grid_t=int(_pick(grid, config, "grid", 401)),
        grid_p=int(_pick(grid, config, "grid", 401)),
    )
    _, summary = run_experiment2(cfg, out=out)
    _echo_exp_summary(
        summary,
        lambda r: (
            f"n={r[0]} eta={r[1]}: mean_linf={r[5]:.6f} mean_l1={r[7]:.6f} "
            f"mean_f1_regret={r[9]:.6f}"
        ),
    )


# ---------------------------------------------------------------------------
# fraud pipeline


@main.command()
@click.option("--data", "data_path", type=str, required=True,
              help="CSV with features and a binary label column.")
@click.option("--label-column", type=str, default=None)
@click.option("--draw-column", type=str, default=None,
              help="Optional column of stored uniform draws.")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--k-list", callback=_parse_int_list, default=None,
              help="Comma list of neighborhood sizes.")
@click.option("--downsample", type=float, default=None,
              help="Keep this fraction of negative rows before splitting.")
@click.option("--stratified/--no-stratified", default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=str, default=None)
@click.option("--config", "config_path", type=str, default=None)
@_friendly
def fraud(data_path, label_column, draw_column, trials, seed, k_list, downsample,
          stratified, workers, out, config_path):
    """Imbalanced-data pipeline: z-score, split 60/20/20, tune per k, test F1."""
    config = _load_config(config_path)
    rows, summary = run_fraud_pipeline(
        data_path,
        label_column=str(_pick(label_column, config, "label_column", "label")),
        draw_column=_pick(draw_column, config, "draw_column", None),
        trials=int(_pick(trials, config, "trials", 20)),
        master_seed=int(_pick(seed, config, "seed", 0)),
        k_values=tuple(_pick(k_list, config, "k_list", (2, 4, 8, 16, 32, 64, 128))),
        downsample_negative_ratio=_pick(downsample, config, "downsample", None),
        stratified=bool(_pick(stratified, config, "stratified", False)),
        workers=int(_pick(workers, config, "workers", 1)),
        out=out,
    )
    for row in summary:
        click.echo(f"k={row[0]} {row[1]}: mean_f1={row[3]:.6f} se={row[4]:.6f}")


# ---------------------------------------------------------------------------
# tune-threshold


def _read_scored_csv(path):
    """Read a CSV with columns score,label[,draw] (any order, extra cols rejected)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
    allowed = {"score", "label", "draw"}
    if "score" not in header or "label" not in header:
        raise SchemaError(f"{path}: need 'score' and 'label' columns, got {header}")
    if set(header) - allowed:
        raise SchemaError(
            f"{path}: unexpected columns {sorted(set(header) - allowed)}"
        )
    ds = load_csv(path, label_column="label",
                  draw_column="draw" if "draw" in header else None)
    scores = ds.covariates[:, ds.feature_names.index("score")]
    if scores.min() < 0.0 or scores.max() > 1.0:
        raise SchemaError(f"{path}: scores must lie in [0, 1]")
    return scores, ds.labels, ds.draws


@main.command("tune-threshold")
@click.option("--data", "data_path", type=str, required=True,
              help="CSV with columns score,label[,draw].")
@click.option("--metric", callback=_parse_metric, default=None)
@click.option("--deterministic", is_flag=True, default=False,
              help="Restrict to p = 0 thresholds.")
@click.option("--seed", type=int, default=0,
              help="Seed for synthetic draws when the CSV has no draw column.")
@_friendly
def tune_threshold(data_path, metric, deterministic, seed):
    """Exactly optimize a threshold on scored data; prints JSON."""
    spec = metric if metric is not None else CmmSpec("accuracy")
    scores, labels, draws = _read_scored_csv(data_path)
    if deterministic:
        res = optimize_threshold_deterministic((scores, labels, draws), spec)
        method = "deterministic"
    else:
        if draws is None:
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence(seed, spawn_key=(5,)))
            )
            draws = rng.random(scores.size)
        res = optimize_threshold((scores, labels, draws), spec)
        method = "stochastic"
    _echo_json(
        {
            "method": method,
            "metric": spec.label(),
            "t": res.threshold.t,
            "p": res.threshold.p,
            "value": res.metric_value,
            "prefix_index": res.classification_prefix_index,
        }
    )


# ---------------------------------------------------------------------------
# fit-knn


@main.command("fit-knn")
@click.option("--data", "data_path", type=str, required=True)
@click.option("--label-column", type=str, default="label")
@click.option("--draw-column", type=str, default=None,
              help="Column of stored draws to exclude from the features.")
@click.option("--k", type=int, default=None)
@click.option("--k-rule", type=click.Choice(["exp1", "exp2", "theorem", "extreme"]),
              default=None)
@click.option("--rule-r", type=float, default=1.0,
              help="Imbalance degree fed to the k rule.")
@click.option("--rule-alpha", type=float, default=1.0)
@click.option("--query", "queries", multiple=True,
              help="Query point, comma-separated coordinates; repeatable.")
@_friendly
def fit_knn(data_path, label_column, draw_column, k, k_rule, rule_r, rule_alpha, queries):
    """Fit a k-NN regressor on a CSV and print predictions as JSON."""
    if (k is None) == (k_rule is None):
        raise click.UsageError("provide exactly one of --k / --k-rule")
    ds = load_csv(data_path, label_column=label_column, draw_column=draw_column)
    if k is None:
        if k_rule == "exp1":
            rule = KSelectionRule(alpha=rule_alpha, d=ds.d, r=1.0,
                                  regime="balanced", drop_log=True)
        elif k_rule == "exp2":
            rule = KSelectionRule(alpha=rule_alpha, d=ds.d, r=rule_r,
                                  regime="uci", drop_log=True)
        elif k_rule == "theorem":
            rule = KSelectionRule(alpha=rule_alpha, d=ds.d, r=rule_r, regime="uci")
        else:
            rule = KSelectionRule(regime="extreme")
        k = select_k(rule, ds.n)
    model = KnnModel.fit(ds.covariates, ds.labels, k)
    preds = []
    for q in queries:
        try:
            point = [float(v) for v in q.replace(" ", "").split(",") if v]
        except ValueError as exc:
            raise click.UsageError(f"--query: {q!r} is not numeric") from exc
        if len(point) != ds.d:
            raise click.UsageError(
                f"--query: {q!r} has {len(point)} coordinates, data has d={ds.d}"
            )
        value = model.predict(point[0]) if ds.d == 1 else model.predict(point)
        preds.append({"query": point, "prediction": float(value)})
    _echo_json({"k": int(k), "n": ds.n, "d": ds.d, "predictions": preds})


# ---------------------------------------------------------------------------
# bounds


@main.command("bounds")
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--r", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--l-const", "l_const", type=float, default=None,
              help="Smoothness constant of the regression shape.")
@click.option("--d", type=int, default=None)
@click.option("--p-star", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--eps-star", type=float, default=None)
@click.option("--c-margin", type=float, default=None)
@click.option("--beta-margin", type=float, default=None)
@click.option("--l-metric", type=float, default=None,
              help="Lipschitz constant of the measure.")
@click.option("--sup-err", type=float, default=None,
              help="Regression sup-error to feed the regret bound.")
@click.option("--config", "config_path", type=str, default=None)
@_friendly
def bounds_cmd(n, k, r, alpha, l_const, d, p_star, delta, eps_star, c_margin,
               beta_margin, l_metric, sup_err, config_path):
    """Evaluate the closed-form bounds; prints a JSON record."""
    config = _load_config(config_path)
    n = _pick(n, config, "n", None)
    if n is None:
        raise click.UsageError("--n is required (flag or config)")
    k = _pick(k, config, "k", None)
    out = {
        "n": int(n),
        "d": int(_pick(d, config, "d", 1)),
        "delta": float(_pick(delta, config, "delta", 0.05)),
    }
    out["estimation_error_bound"] = estimation_error_bound(out["n"], out["delta"])
    out["shattering_bound"] = shattering_bound(out["n"], out["d"])
    inputs = None
    if k is not None:
        inputs = BoundInputs(
            n=out["n"],
            k=int(k),
            r=float(_pick(r, config, "r", 1.0)),
            alpha=float(_pick(alpha, config, "alpha", 1.0)),
            L=float(_pick(l_const, config, "L", 1.0)),
            d=out["d"],
            p_star=float(_pick(p_star, config, "p_star", 1.0)),
            delta=out["delta"],
            eps_star=_pick(eps_star, config, "eps_star", None),
            C_margin=float(_pick(c_margin, config, "C_margin", 1.0)),
            beta_margin=float(_pick(beta_margin, config, "beta_margin", 1.0)),
            L_M=float(_pick(l_metric, config, "L_M", 1.0)),
        )
        ub = uniform_error_bound(inputs)
        out["uniform_error_bound"] = {
            "value": ub.value,
            "bias_term": ub.bias_term,
            "deviation_term": ub.deviation_term,
            "variance_term": ub.variance_term,
            "side_failure_probability": ub.side_failure_probability,
        }
    sup_err = _pick(sup_err, config, "sup_err", None)
    if sup_err is not None:
        if inputs is None:
            inputs = BoundInputs(
                n=out["n"],
                k=1,
                r=float(_pick(r, config, "r", 1.0)),
                alpha=float(_pick(alpha, config, "alpha", 1.0)),
                L=float(_pick(l_const, config, "L", 1.0)),
                d=out["d"],
                p_star=float(_pick(p_star, config, "p_star", 1.0)),
                delta=out["delta"],
                C_margin=float(_pick(c_margin, config, "C_margin", 1.0)),
                beta_margin=float(_pick(beta_margin, config, "beta_margin", 1.0)),
                L_M=float(_pick(l_metric, config, "L_M", 1.0)),
            )
        out["regret_bound"] = regret_bound(inputs, float(sup_err))
    _echo_json(out)


# ---------------------------------------------------------------------------
# generate


@main.command("generate")
@click.option("--problem", type=click.Choice(
    ["exp1", "exp2-uci", "exp2-nonuci", "singleton", "constant"]), required=True)
@click.option("--r", type=float, default=None, help="Shape parameter for exp2-*.")
@click.option("--value", type=float, default=None,
              help="Regression value for singleton/constant.")
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=str, required=True)
@click.option("--draws/--no-draws", "with_draws", default=True,
              help="Include the stored uniform draw column.")
@_friendly
def generate_cmd(problem, r, value, n, seed, out, with_draws):
    """Sample a synthetic dataset and write it as CSV."""
    if problem in ("exp2-uci", "exp2-nonuci"):
        if r is None:
            raise click.UsageError(f"--r is required for --problem {problem}")
        prob = exp2_uci_problem(r) if problem == "exp2-uci" else exp2_nonuci_problem(r)
    elif problem in ("singleton", "constant"):
        if value is None:
            raise click.UsageError(f"--value is required for --problem {problem}")
        prob = singleton_problem(value) if problem == "singleton" else constant_problem(value)
    else:
        prob = exp1_problem()
    ds = generate(prob, n, seed)
    save_csv(ds, out, include_draws=with_draws)
    click.echo(f"wrote {ds.n} rows ({ds.positive_count} positive) to {out}")


if __name__ == "__main__":
    main()
