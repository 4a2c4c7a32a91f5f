"""Command-line front end.

Five subcommands cover the whole pipeline:

  simulate  generate a contaminated stream as CSV
  run       drive a learner over a stream CSV, emitting per-step JSONL
  tune      grid-search hyperparameters over seeded repetitions
  eval      turn run output plus ground truth into a JSON metric report
  bounds    tabulate the theoretical bounds over a threshold grid

Every command accepts a YAML config file; explicit flags override it, and
the fully resolved configuration is echoed into each output (as the first
JSONL record, a JSON key, or a sidecar file next to CSVs). Exit codes:
0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import itertools
import json
import math
import sys

import click
import numpy as np
import yaml

from .bounds import (
    BoundInputs,
    bound_gap,
    gaussian_tail,
    max_admissible_rho,
    step_size_consistency_report,
    truncated_sa_bound,
    untruncated_limit_bound,
)
from .gmm import DegenerateComponentError, GmmParams, SingularCovarianceError
from .learners import init_params_from_window, make_gmm_learner
from .metrics import _matched_cost, alarm_eval, metric_report, roc_auc, segment_mse
from .sa import ConstantRho, InvTRho, SraConfig, optimal_constant_rho
from .streams import (
    StreamSpec,
    generate,
    multi_change_spec,
    benchmark_synthetic_spec,
    read_stream_csv,
    write_stream_csv,
)

SEED_ENV_VAR = "SRASTREAM_SEED"


class DataError(Exception):
    """Bad input data (malformed files, inconsistent shapes)."""


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DataError("config file must contain a mapping")
    return cfg


def _resolve(flag_value, config: dict, key: str, default):
    """Flag beats config beats default; flags left at None defer."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _write_sidecar_config(out_path, resolved: dict) -> None:
    with open(str(out_path) + ".config.json", "w") as fh:
        json.dump(resolved, fh, indent=2)
        fh.write("\n")


def _synthetic_spec(alpha: float, U: float, T: int, seed: int) -> StreamSpec:
    """Two-component benchmark stream, allowing shortened horizons.

    At the canonical length this is exactly the published benchmark; for
    shorter T the change point moves to T//2 + 1 with the same parameters.
    """
    if T == 20000:
        return benchmark_synthetic_spec(alpha=alpha, U=U, seed=seed)

    def params(a: float) -> GmmParams:
        return GmmParams(
            np.array([0.5, 0.5]),
            np.array([[a], [-a]]),
            np.array([[[0.01]], [[0.01]]]),
        )

    return StreamSpec(
        T=T, d=1, alpha=alpha, U=U,
        segments=((1, params(0.5)), (T // 2 + 1, params(1.0))),
        seed=seed,
    )


def _build_learner(
    algorithm: str,
    K: int,
    window: np.ndarray,
    init_mode: str,
    init_seed: int,
    gamma: float | None,
    beta: float | None,
    M: float | None,
    rho: float | None,
    r: float | None,
):
    params = init_params_from_window(window, K, mode=init_mode, seed=init_seed)
    if algorithm == "sra":
        if gamma is None:
            raise click.UsageError("sra requires --gamma")
        if rho is None:
            if beta is None or M is None:
                raise click.UsageError("sra requires --rho or both --beta and --M")
            rho = optimal_constant_rho(gamma, beta, M)
        cfg = SraConfig(gamma=gamma, rho_schedule=ConstantRho(rho), beta=beta, M=M)
        return make_gmm_learner("sra", params, config=cfg), rho
    if algorithm == "sem":
        if r is None:
            raise click.UsageError("sem requires --r")
        return make_gmm_learner("sem", params, r=r), r
    if algorithm == "iem":
        return make_gmm_learner("iem", params, window=window), None
    if algorithm == "sdem":
        if r is None:
            raise click.UsageError("sdem requires --r")
        return make_gmm_learner("sdem", params, r=r, window=window), r
    raise click.UsageError(f"unknown algorithm: {algorithm}")


@click.group()
def cli():
    """Robust streaming mixture estimation and change detection."""


# ---------------------------------------------------------------- simulate


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML config; flags override it.")
@click.option("--benchmark", "kind", flag_value="benchmark",
              help="Two-component benchmark stream with one mean change.")
@click.option("--multi-change", "kind", flag_value="multi",
              help="Single-Gaussian stream with several mean shifts.")
@click.option("--alpha", type=float, default=None)
@click.option("--U", "U", type=float, default=None)
@click.option("--T", "T", type=int, default=None)
@click.option("--seed", type=int, default=None, envvar=SEED_ENV_VAR)
@click.option("--out", type=click.Path(), required=True)
def simulate(config_path, kind, alpha, U, T, seed, out):
    """Generate a contaminated stream and write it as CSV."""
    cfg = _load_config(config_path)
    kind = _resolve(kind, cfg, "kind", "benchmark")
    alpha = _resolve(alpha, cfg, "alpha", 0.99)
    U = _resolve(U, cfg, "U", 20.0)
    seed = _resolve(seed, cfg, "seed", 0)
    if kind == "benchmark":
        T = _resolve(T, cfg, "T", 20000)
        spec = _synthetic_spec(alpha, U, T, seed)
    elif kind == "multi":
        T = _resolve(T, cfg, "T", 5000)
        seg_len = max(T // 5, 1)
        spec = multi_change_spec(
            n_segments=5, segment_len=seg_len, alpha=alpha, U=U, seed=seed
        )
    else:
        raise click.UsageError(f"unknown stream kind: {kind}")
    stream = generate(spec)
    write_stream_csv(stream, out)
    resolved = {
        "command": "simulate", "kind": kind, "alpha": alpha, "U": U,
        "T": spec.T, "seed": seed, "change_points": spec.change_points,
    }
    _write_sidecar_config(out, resolved)
    click.echo(f"wrote {spec.T} rows to {out}")


# --------------------------------------------------------------------- run


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--input", "input_path", type=click.Path(), required=True,
              help="Stream CSV produced by simulate (or matching its header).")
@click.option("--algorithm", type=click.Choice(["sra", "sem", "iem", "sdem"]),
              default=None)
@click.option("--K", "K", type=int, default=None)
@click.option("--gamma", type=float, default=None,
              help="Truncation threshold; 'inf' disables truncation.")
@click.option("--beta", type=float, default=None)
@click.option("--M", "M", type=float, default=None)
@click.option("--rho", type=float, default=None,
              help="Constant step size; derived from gamma/beta/M if omitted.")
@click.option("--r", "r", type=float, default=None,
              help="Discounting parameter for sem/sdem.")
@click.option("--init-mode", type=click.Choice(["moments", "uniform"]),
              default=None)
@click.option("--init-start", type=int, default=None,
              help="First time index (1-based) of the initialization window.")
@click.option("--init-end", type=int, default=None,
              help="Last time index of the initialization window.")
@click.option("--seed", type=int, default=None, envvar=SEED_ENV_VAR,
              help="Seed for the uniform initialization mode.")
@click.option("--out", type=click.Path(), required=True)
def run(config_path, input_path, algorithm, K, gamma, beta, M, rho, r,
        init_mode, init_start, init_end, seed, out):
    """Drive a learner over a stream; one JSONL record per observation."""
    cfg = _load_config(config_path)
    algorithm = _resolve(algorithm, cfg, "algorithm", "sra")
    K = _resolve(K, cfg, "K", 2)
    gamma = _resolve(gamma, cfg, "gamma", None)
    beta = _resolve(beta, cfg, "beta", None)
    M = _resolve(M, cfg, "M", None)
    rho = _resolve(rho, cfg, "rho", None)
    r = _resolve(r, cfg, "r", None)
    init_mode = _resolve(init_mode, cfg, "init_mode", "moments")
    init_start = _resolve(init_start, cfg, "init_start", 1)
    init_end = _resolve(init_end, cfg, "init_end", 10)
    seed = _resolve(seed, cfg, "seed", 0)

    try:
        y, _, _, _ = read_stream_csv(input_path)
    except OSError as exc:
        raise DataError(f"cannot read stream: {exc}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    resolved = {
        "command": "run", "algorithm": algorithm, "K": K, "gamma": gamma,
        "beta": beta, "M": M, "rho": rho, "r": r, "init_mode": init_mode,
        "init_start": init_start, "init_end": init_end, "seed": seed,
        "input": str(input_path),
    }

    if len(y) == 0:
        with open(out, "w") as fh:
            fh.write(json.dumps({"config": resolved}) + "\n")
        click.echo("empty input; wrote header only")
        return

    if not 1 <= init_start <= init_end <= len(y):
        raise DataError("initialization window outside the stream")
    window = y[init_start - 1 : init_end]
    learner, step_param = _build_learner(
        algorithm, K, window, init_mode, seed, gamma, beta, M, rho, r
    )
    if algorithm == "sra":
        resolved["rho"] = step_param
    elif step_param is not None:
        resolved["r"] = step_param

    with open(out, "w") as fh:
        fh.write(json.dumps({"config": resolved}) + "\n")
        for i in range(len(y)):
            try:
                rep = learner.step(y[i])
            except (DegenerateComponentError, SingularCovarianceError) as exc:
                fh.write(json.dumps({"t": i + 1, "error": str(exc)}) + "\n")
                raise
            record = {
                "t": i + 1,
                "score": rep.score,
                "truncated": rep.truncated,
                "params_summary": {
                    "weights": learner.model.weights.tolist(),
                    "means": learner.model.means.tolist(),
                },
            }
            fh.write(json.dumps(record) + "\n")
    click.echo(f"wrote {len(y)} records to {out}")


def read_run_jsonl(path) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    """Parse run output: (config, scores, means (T,K,d), truncated flags)."""
    config = {}
    scores, means, trunc = [], [], []
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot read run output: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"bad JSON at line {lineno}") from exc
            if "config" in rec and "t" not in rec:
                config = rec["config"]
                continue
            if "error" in rec:
                raise DataError(f"run aborted at t={rec.get('t')}: {rec['error']}")
            scores.append(float(rec["score"]))
            means.append(rec["params_summary"]["means"])
            trunc.append(bool(rec["truncated"]))
    return (
        config,
        np.asarray(scores, dtype=float),
        np.asarray(means, dtype=float),
        np.asarray(trunc, dtype=bool),
    )


# -------------------------------------------------------------------- eval


@cli.command("eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--scores", "scores_path", type=click.Path(), required=True,
              help="JSONL produced by run.")
@click.option("--stream", "stream_path", type=click.Path(), required=True,
              help="Ground-truth stream CSV.")
@click.option("--tau", type=int, default=None,
              help="Transient length for MSEs / tolerance for alarms.")
@click.option("--t-star", type=int, default=None,
              help="Change point for the segment MSEs; inferred when omitted.")
@click.option("--eval-start", type=int, default=None)
@click.option("--eval-end", type=int, default=None)
@click.option("--alarm-tau", type=int, default=None)
@click.option("--t-start", type=int, default=None)
@click.option("--t-end", type=int, default=None)
@click.option("--skip-mse", is_flag=True, default=False)
@click.option("--skip-roc", is_flag=True, default=False)
@click.option("--figures/--no-figures", default=True)
@click.option("--out", type=click.Path(), required=True)
def eval_cmd(config_path, scores_path, stream_path, tau, t_star, eval_start,
             eval_end, alarm_tau, t_start, t_end, skip_mse, skip_roc,
             figures, out):
    """Score a run against ground truth; JSON report plus curve CSV and
    figures."""
    cfg = _load_config(config_path)
    tau = _resolve(tau, cfg, "tau", 1000)
    eval_start = _resolve(eval_start, cfg, "eval_start", 500)
    eval_end = _resolve(eval_end, cfg, "eval_end", 999)
    alarm_tau = _resolve(alarm_tau, cfg, "alarm_tau", 100)

    run_config, scores, est_means, _ = read_run_jsonl(scores_path)
    try:
        _, is_outlier, segment_id, true_mu = read_stream_csv(stream_path)
    except OSError as exc:
        raise DataError(f"cannot read stream: {exc}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    T = len(scores)
    if T != len(segment_id):
        raise DataError("scores and stream have different lengths")
    changes = [int(i + 1) for i in np.flatnonzero(np.diff(segment_id)) + 1]
    t_start = _resolve(t_start, cfg, "t_start", 20)
    t_end = _resolve(t_end, cfg, "t_end", T)

    K = est_means.shape[1]
    d = est_means.shape[2]
    if true_mu.shape[1] != K * d:
        raise DataError("ground-truth mean columns do not match the model")
    true_means = true_mu.reshape(T, K, d)

    mse = None
    if not skip_mse:
        if t_star is None:
            t_star = cfg.get("t_star", changes[0] if changes else None)
        if t_star is not None and tau < t_star < T:
            mse = segment_mse(
                est_means, true_means, tau, t_star, T,
                eval_window=(eval_start, eval_end),
            )
    alarm = alarm_eval(scores, changes, alarm_tau, t_start, min(t_end, T))
    roc = None
    if not skip_roc and is_outlier.any() and not is_outlier.all():
        roc = roc_auc(scores, is_outlier)

    report = metric_report(mse=mse, alarm=alarm, roc=roc)
    report["config"] = {
        "command": "eval", "tau": tau, "t_star": t_star,
        "eval_window": [eval_start, eval_end], "alarm_tau": alarm_tau,
        "t_start": t_start, "t_end": t_end, "change_points": changes,
        "run_config": run_config,
    }
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")

    curve_path = str(out).rsplit(".", 1)[0] + "_curve.csv"
    with open(curve_path, "w") as fh:
        fh.write("false_alarm_rate,benefit_recall\n")
        for far, rec in alarm.curve():
            fh.write(f"{far!r},{rec!r}\n")

    if figures:
        import os

        from .report import render_report_figures

        outdir = os.path.dirname(os.path.abspath(out))
        prefix = os.path.splitext(os.path.basename(out))[0]
        render_report_figures(
            outdir, prefix=prefix, scores=scores, change_points=changes,
            alarm=alarm,
            roc_scores=scores if roc is not None else None,
            roc_labels=is_outlier if roc is not None else None,
            estimated_means=est_means, true_means=true_means,
        )
    click.echo(f"wrote report to {out}")


# -------------------------------------------------------------------- tune


def _grid_axes(cfg: dict, algorithm: str, flags: dict) -> list[tuple[str, list]]:
    """Hyperparameter axes in declaration order."""

    def axis(name):
        if flags.get(name):
            return [float(v) for v in flags[name].split(",")]
        grid = cfg.get("grid", {})
        if name in grid:
            return [float(v) for v in grid[name]]
        return None

    if algorithm == "sra":
        axes = []
        for name, fallback in (("gamma", [3.0]), ("beta", [0.1]), ("M", [5.0])):
            vals = axis(name)
            axes.append((name, vals if vals is not None else fallback))
        return axes
    if algorithm in ("sem", "sdem"):
        vals = axis("r")
        return [("r", vals if vals is not None else [0.005])]
    return []  # iem has no hyperparameters


def _run_learner_means_scores(
    algorithm: str, cell: dict, stream, K: int, init_seed: int
) -> tuple[np.ndarray, np.ndarray]:
    window = stream.y[:10]
    learner, _ = _build_learner(
        algorithm, K, window, "moments", init_seed,
        cell.get("gamma"), cell.get("beta"), cell.get("M"), cell.get("rho"),
        cell.get("r"),
    )
    T = stream.spec.T
    means = np.empty((T, learner.model.K, stream.spec.d))
    scores = np.empty(T)
    for i in range(T):
        rep = learner.step(stream.y[i])
        scores[i] = rep.score
        means[i] = learner.model.means
    return means, scores


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--algorithm", type=click.Choice(["sra", "sem", "iem", "sdem"]),
              default=None)
@click.option("--metric", type=click.Choice(["s_eval", "auc"]), default=None)
@click.option("--stream-kind", type=click.Choice(["benchmark", "multi"]),
              default=None)
@click.option("--gamma-grid", default=None, help="Comma-separated values.")
@click.option("--beta-grid", default=None)
@click.option("--M-grid", "M_grid", default=None)
@click.option("--r-grid", default=None)
@click.option("--repeats", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--U", "U", type=float, default=None)
@click.option("--T", "T", type=int, default=None)
@click.option("--K", "K", type=int, default=None)
@click.option("--eval-start", type=int, default=None)
@click.option("--eval-end", type=int, default=None)
@click.option("--seed", type=int, default=None, envvar=SEED_ENV_VAR)
@click.option("--out", type=click.Path(), required=True)
def tune(config_path, algorithm, metric, stream_kind, gamma_grid, beta_grid,
         M_grid, r_grid, repeats, alpha, U, T, K, eval_start, eval_end, seed,
         out):
    """Grid-search hyperparameters over seeded stream repetitions.

    Selection minimizes mean S_eval or maximizes mean alarm AUC; ties keep
    the earlier cell in grid order.
    """
    cfg = _load_config(config_path)
    algorithm = _resolve(algorithm, cfg, "algorithm", "sra")
    metric = _resolve(metric, cfg, "metric", "s_eval")
    stream_kind = _resolve(
        stream_kind, cfg, "stream_kind", "benchmark" if metric == "s_eval" else "multi"
    )
    repeats = _resolve(repeats, cfg, "repeats", 10)
    alpha = _resolve(alpha, cfg, "alpha", 0.99)
    U = _resolve(U, cfg, "U", 20.0)
    T = _resolve(T, cfg, "T", 20000 if stream_kind == "benchmark" else 5000)
    K = _resolve(K, cfg, "K", 2 if stream_kind == "benchmark" else 1)
    eval_start = _resolve(eval_start, cfg, "eval_start", 500)
    eval_end = _resolve(eval_end, cfg, "eval_end", 999)
    seed = _resolve(seed, cfg, "seed", 0)

    axes = _grid_axes(
        cfg, algorithm,
        {"gamma": gamma_grid, "beta": beta_grid, "M": M_grid, "r": r_grid},
    )
    names = [n for n, _ in axes]
    cells = [dict(zip(names, combo))
             for combo in itertools.product(*[v for _, v in axes])] or [{}]

    streams = []
    for rep in range(repeats):
        s = seed + rep
        spec = (_synthetic_spec(alpha, U, T, s) if stream_kind == "benchmark"
                else multi_change_spec(segment_len=max(T // 5, 1),
                                       alpha=alpha, U=U, seed=s))
        streams.append(generate(spec))

    rows = []
    best = None
    for cell in cells:
        vals = []
        failed = False
        for stream in streams:
            try:
                means, scores = _run_learner_means_scores(
                    algorithm, cell, stream, K, seed
                )
            except (DegenerateComponentError, SingularCovarianceError,
                    FloatingPointError):
                # a collapsing model is just a bad cell, not a fatal error
                failed = True
                break
            if metric == "s_eval":
                cost = _matched_cost(
                    means[eval_start - 1 : eval_end],
                    stream.true_means[eval_start - 1 : eval_end],
                )
                vals.append(float(np.sum(cost)) / (eval_end - eval_start))
            else:
                ae = alarm_eval(
                    scores, stream.spec.change_points, 100, 20, stream.spec.T
                )
                vals.append(ae.auc)
        if failed:
            mean_val = math.inf if metric == "s_eval" else 0.0
        else:
            mean_val = float(np.mean(vals))
        row = dict(cell)
        row[f"mean_{metric}"] = None if failed else mean_val
        row["failed"] = failed
        rows.append(row)
        if best is None:
            best = (dict(cell), mean_val)
        else:
            better = mean_val < best[1] if metric == "s_eval" else mean_val > best[1]
            if better:
                best = (dict(cell), mean_val)

    result = {
        "config": {
            "command": "tune", "algorithm": algorithm, "metric": metric,
            "stream_kind": stream_kind, "repeats": repeats, "alpha": alpha,
            "U": U, "T": T, "K": K, "eval_window": [eval_start, eval_end],
            "seed": seed,
        },
        "grid": rows,
        "best": {"params": best[0], f"mean_{metric}": best[1]},
    }
    with open(out, "w") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    click.echo(f"best {metric}: {best[1]:.6g} at {best[0]}")


# ------------------------------------------------------------------ bounds


@cli.command("bounds")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--c0", type=float, default=None)
@click.option("--c1", type=float, default=None)
@click.option("--d0", type=float, default=None)
@click.option("--d1", type=float, default=None)
@click.option("--sigma0-sq", type=float, default=None)
@click.option("--sigma1-sq", type=float, default=None)
@click.option("--L", "L", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--U", "U", type=float, default=None)
@click.option("--d", "d", type=int, default=None)
@click.option("--v0n", type=float, default=None)
@click.option("--n", "n", type=int, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--M", "M", type=float, default=None)
@click.option("--gamma-grid", default=None, help="Comma-separated thresholds.")
@click.option("--consistency-beta", type=float, default=None,
              help="Also emit the closed-form/numeric step-size cross-check.")
@click.option("--out", type=click.Path(), default=None,
              help="CSV table destination; stdout when omitted.")
def bounds_cmd(config_path, c0, c1, d0, d1, sigma0_sq, sigma1_sq, L, alpha,
               U, d, v0n, n, rho, M, gamma_grid, consistency_beta, out):
    """Tabulate tail, bounds, gap and admissibility over a threshold grid."""
    cfg = _load_config(config_path)
    c0 = _resolve(c0, cfg, "c0", 0.0)
    c1 = _resolve(c1, cfg, "c1", 1.0)
    d0 = _resolve(d0, cfg, "d0", 1.0)
    d1 = _resolve(d1, cfg, "d1", 1.0)
    sigma0_sq = _resolve(sigma0_sq, cfg, "sigma0_sq", 1.0)
    sigma1_sq = _resolve(sigma1_sq, cfg, "sigma1_sq", 1.0)
    L = _resolve(L, cfg, "L", 1.0)
    alpha = _resolve(alpha, cfg, "alpha", 0.99)
    U = _resolve(U, cfg, "U", 20.0)
    d = _resolve(d, cfg, "d", 1)
    v0n = _resolve(v0n, cfg, "v0n", 1.0)
    n = _resolve(n, cfg, "n", 10000)
    rho = _resolve(rho, cfg, "rho", 0.005)
    M = _resolve(M, cfg, "M", 5.0)
    if gamma_grid is None:
        gammas = [float(g) for g in cfg.get("gamma_grid", [1, 2, 3, 5, 10])]
    else:
        gammas = [float(g) for g in gamma_grid.split(",")]

    lines = ["gamma,tail,bound,limit_bound,gap,max_admissible_rho"]
    extra = None
    import warnings as _warnings

    for gamma in gammas:
        inputs = BoundInputs(
            c0=c0, c1=c1, d0=d0, d1=d1, sigma0_sq=sigma0_sq,
            sigma1_sq=sigma1_sq, L=L, alpha=alpha, U=U, d=d, v0n=v0n, n=n,
            rho=ConstantRho(rho), gamma=gamma, M=M,
        )
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", RuntimeWarning)
            tail = gaussian_tail(gamma, M)
            bound = truncated_sa_bound(inputs)
            limit = untruncated_limit_bound(inputs)
            gap = bound_gap(inputs)
            admissible = max_admissible_rho(inputs)
            if consistency_beta is not None and extra is None and gamma < math.sqrt(d) * U:
                extra = step_size_consistency_report(inputs, consistency_beta)
        lines.append(
            f"{gamma!r},{tail!r},{bound!r},{limit!r},{gap!r},{admissible!r}"
        )
    table = "\n".join(lines) + "\n"
    if out is None:
        click.echo(table, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(table)
        _write_sidecar_config(out, {
            "command": "bounds", "c0": c0, "c1": c1, "d0": d0, "d1": d1,
            "sigma0_sq": sigma0_sq, "sigma1_sq": sigma1_sq, "L": L,
            "alpha": alpha, "U": U, "d": d, "v0n": v0n, "n": n, "rho": rho,
            "M": M, "gamma_grid": gammas,
        })
        click.echo(f"wrote table to {out}")
    if extra is not None:
        payload = json.dumps({"step_size_consistency": extra}, indent=2)
        if out is None:
            click.echo(payload)
        else:
            with open(str(out) + ".consistency.json", "w") as fh:
                fh.write(payload + "\n")


# ------------------------------------------------------------- entry point


def run_main(argv=None) -> int:
    """Dispatch with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (DegenerateComponentError, SingularCovarianceError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    return 0


def main():
    sys.exit(run_main())


if __name__ == "__main__":
    main()
