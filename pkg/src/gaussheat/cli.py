"""Config-driven experiment runner.

Usage::

    gaussheat --config run.ini [--mode MODE] [--seed N] [--out DIR] [--threads N]

Every flag can also be given through the environment as ``GHC_CONFIG``,
``GHC_MODE``, ``GHC_SEED``, ``GHC_OUT`` and ``GHC_THREADS``; explicit flags
win over the environment, which wins over the config file.

The config is an INI file with sections ``[process]``, ``[domain]``,
``[run]`` and (for verify mode) ``[verify]``.  See README.md for the keys and
docs/output_schema.md for the CSV columns of each mode.

Exit status: 0 on success (and, in verify mode, when every check passes),
1 when a verify check fails, 2 on a config error, 3 on an I/O error, 4 on a
numerical error raised by the library.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import platform
import sys
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .asymptotics import predict_rhc, predict_shc_1d, predict_shc_multid
from .covariance import (
    BiFractionalBM,
    BrownianMotion,
    FractionalOU,
    OrnsteinUhlenbeck,
    PolySum,
    PowerLog,
    TimeChangedBM,
    mu_closed_form,
    variance,
)
from .errors import ConfigError, GaussHeatError
from .estimators import BIAS_MODES, estimate_rhc, rhc_error_1d, rhc_exact_1d, run_mu, run_shc
from .geometry import Ball, Interval, surface_area, volume
from .plots import Band, Figure, Series, power_line, render
from .ratefit import fit_power_law
from .rng import derive_seed
from .sampler import TimeGrid, build_factor

MODES = ("predict", "estimate-rhc", "estimate-shc", "sweep", "verify")
ENV_PREFIX = "GHC_"

COLUMNS = {
    "predict": ["t", "rate", "prediction", "error_bound"],
    "estimate-rhc": ["t", "h_hat", "h_stderr", "deficit", "rate", "ratio", "ratio_stderr",
                     "limit", "exact_deficit"],
    "estimate-shc": ["t", "q_hat", "q_stderr", "h_hat", "h_stderr", "deficit", "rate",
                     "rate_stderr", "ratio", "ratio_stderr", "limit", "refine_delta",
                     "refine_delta_stderr"],
    "sweep": ["t", "deficit", "deficit_stderr", "rate", "ratio", "ratio_stderr"],
    "verify": ["check", "t", "value", "target", "tolerance", "passed"],
}
FIT_COLUMNS = ["quantity", "exponent", "log_constant", "constant", "r_squared", "n_points",
               "predicted_exponent", "predicted_constant"]

VERIFY_DEFAULTS = {
    "rhc_ratio_tol": "0.02",
    "shc_ratio_tol": "0.1",
    "shc_times": "",
    "ci_k": "4",
    "monotone_slack": "2",
}


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    process: object
    domain: object
    mode: str
    target: str
    times: np.ndarray
    t_max: float
    grid_size: int
    n_paths: int
    n_x: int
    n_gauss: int
    seed: int
    bias_control: str
    output_dir: str
    threads: int
    chunk_size: int
    verify: dict = field(default_factory=dict)
    echo: dict = field(default_factory=dict)


def _get(section, key, conv, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key '{key}' in [{section.name}]")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}' in [{section.name}]: {raw!r}") from exc


def _floats(raw):
    return tuple(float(v) for v in raw.replace(",", " ").split())


def _build_process(sec):
    family = sec.get("family", "").strip().lower()
    if family in ("bm", "brownian"):
        return BrownianMotion(_get(sec, "variance_rate", float, 1.0))
    if family == "fbm":
        return BiFractionalBM(_get(sec, "hurst", float), 1.0)
    if family in ("bifbm", "bi-fbm"):
        return BiFractionalBM(_get(sec, "hurst", float), _get(sec, "k", float))
    if family in ("ou", "ornstein-uhlenbeck"):
        return OrnsteinUhlenbeck(_get(sec, "a", float))
    if family in ("fou", "fractional-ou"):
        return FractionalOU(_get(sec, "a", float), _get(sec, "hurst", float))
    if family in ("tcbm", "time-changed-bm"):
        kind = sec.get("time_change", "").strip().lower()
        if kind == "powerlog":
            tc = PowerLog(_get(sec, "rho", float), _get(sec, "c", float))
        elif kind == "polysum":
            tc = PolySum(_get(sec, "coefficients", _floats), _get(sec, "exponents", _floats))
        else:
            raise ConfigError("[process] time_change must be powerlog or polysum")
        return TimeChangedBM(tc)
    raise ConfigError(f"unknown process family {family!r}")


def _build_domain(sec):
    kind = sec.get("kind", "interval").strip().lower()
    if kind == "interval":
        return Interval(_get(sec, "a", float, 0.0), _get(sec, "b", float, 1.0))
    if kind == "ball":
        dim = _get(sec, "dim", int)
        center = _get(sec, "center", _floats, (0.0,) * dim)
        if len(center) != dim:
            raise ConfigError("[domain] center must have dim entries")
        return Ball(center, _get(sec, "radius", float, 1.0))
    raise ConfigError(f"unknown domain kind {kind!r}")


def load_config(path, overrides=None) -> ExperimentConfig:
    """Parse and validate a config file; raises ConfigError on any problem."""
    overrides = overrides or {}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    for name in ("process", "domain", "run"):
        if not parser.has_section(name):
            raise ConfigError(f"config lacks a [{name}] section")
    run = parser["run"]
    for key, value in overrides.items():
        if value is not None:
            run[key] = str(value)
    if not parser.has_section("verify"):
        parser.add_section("verify")
    for key, value in VERIFY_DEFAULTS.items():
        parser["verify"].setdefault(key, value)

    try:
        process = _build_process(parser["process"])
        domain = _build_domain(parser["domain"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    mode = run.get("mode", "").strip()
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    target = run.get("target", "shc").strip()
    if target not in ("rhc", "shc"):
        raise ConfigError("target must be rhc or shc")
    t_max = _get(run, "t_max", float)
    if not 0 < t_max <= 1:
        raise ConfigError("t_max must lie in (0, 1]")
    n_t = _get(run, "n_t", int, 1)
    # default ladder is t_max * 2^-k, k = 0..n_t-1
    t_min = _get(run, "t_min", float, t_max * 2.0 ** -(n_t - 1))
    if not 0 < t_min <= t_max:
        raise ConfigError("t_min must lie in (0, t_max]")
    grid_size = _get(run, "grid_size", int, 1024)
    n_paths = _get(run, "n_paths", int, 10000)
    n_x = _get(run, "n_x", int, n_paths)
    n_gauss = _get(run, "n_gauss", int, 64)
    seed = _get(run, "seed", int, 0)
    threads = _get(run, "threads", int, 1)
    chunk_size = _get(run, "chunk_size", int, 1024)
    for name, v in (("n_t", n_t), ("grid_size", grid_size), ("n_paths", n_paths),
                    ("n_x", n_x), ("n_gauss", n_gauss), ("threads", threads),
                    ("chunk_size", chunk_size)):
        if v < 1:
            raise ConfigError(f"{name} must be at least 1")
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    if n_t > 1 and t_min == t_max:
        raise ConfigError("n_t > 1 needs t_min < t_max")
    if grid_size & (grid_size - 1):
        warnings.warn(f"grid_size {grid_size} is not a power of two", stacklevel=2)
    bias = run.get("bias_control", "none").strip()
    if bias not in BIAS_MODES:
        raise ConfigError(f"bias_control must be one of {BIAS_MODES}")
    if bias == "bridge" and not (isinstance(domain, Interval) and process.bm_like):
        raise ConfigError("bias_control=bridge needs an interval and a process with "
                          "Brownian increments (BM, fBm H=1/2, time-changed BM, OU)")

    times = np.geomspace(t_min, t_max, n_t) if n_t > 1 else np.array([t_max])
    vsec = parser["verify"]
    verify = {
        "rhc_ratio_tol": _get(vsec, "rhc_ratio_tol", float),
        "shc_ratio_tol": _get(vsec, "shc_ratio_tol", float),
        "shc_times": list(_get(vsec, "shc_times", _floats, ())) if vsec["shc_times"].strip()
        else [],
        "ci_k": _get(vsec, "ci_k", float),
        "monotone_slack": _get(vsec, "monotone_slack", float),
    }
    echo = {s: dict(parser[s]) for s in parser.sections()}
    return ExperimentConfig(process, domain, mode, target, times, t_max, grid_size, n_paths,
                            n_x, n_gauss, seed, bias, run.get("output_dir", "out").strip(),
                            threads, chunk_size, verify, echo)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------

def rate_exponent(spec) -> float:
    """Small-t exponent of sqrt(R_t) (and of mu_t)."""
    if isinstance(spec, BiFractionalBM):
        return spec.hurst * spec.k
    if isinstance(spec, TimeChangedBM):
        return spec.time_change.index / 2
    if isinstance(spec, FractionalOU):
        return spec.hurst
    return 0.5


def _self_similar(spec):
    return isinstance(spec, (BrownianMotion, BiFractionalBM))


@dataclass
class RunResult:
    rows: list
    columns: list
    fit_rows: list = None
    figures: dict = field(default_factory=dict)
    jitter_used: float = 0.0
    passed: bool = True
    extra: dict = field(default_factory=dict)


def _predict(cfg):
    rows = []
    for t in cfg.times:
        if cfg.target == "rhc":
            p = predict_rhc(cfg.process, cfg.domain, t)
        elif isinstance(cfg.domain, Interval):
            p = predict_shc_1d(cfg.process, cfg.domain, t)
        else:
            mu = mu_closed_form(cfg.process, t)
            if mu is None or not _self_similar(cfg.process):
                raise ConfigError("multi-d SHC prediction needs a self-similar process with "
                                  "closed-form mu_t; use estimate-shc")
            p = predict_shc_multid(cfg.domain, mu, 1.0)
        bound = p.error_bound if p.error_bound is not None else math.nan
        rows.append([t, p.rate_value, p.deficit_prediction, bound])
    res = RunResult(rows, COLUMNS["predict"])
    arr = np.array(rows, dtype=float)
    label = "predicted |D| - H(t)" if cfg.target == "rhc" else "predicted |D| - Q(t)"
    res.figures["deficit.svg"] = _deficit_figure(cfg, arr[:, 0], arr[:, 2], None,
                                                 rate_exponent(cfg.process), label)
    res.figures["ratio.svg"] = _ratio_figure(cfg, arr[:, 0], arr[:, 2] / arr[:, 1], None,
                                             p.limit_constant, "prediction / rate")
    return res


def _rhc_rows(cfg, times):
    rows = []
    for i, t in enumerate(times):
        est = estimate_rhc(cfg.process, cfg.domain, t, cfg.n_x, cfg.n_gauss, cfg.seed + i)
        pred = predict_rhc(cfg.process, cfg.domain, t)
        rate = pred.rate_value
        deficit = volume(cfg.domain) - est.value
        exact = (volume(cfg.domain) - rhc_exact_1d(cfg.process, cfg.domain, t)
                 if isinstance(cfg.domain, Interval) else math.nan)
        rows.append([t, est.value, est.stderr, deficit, rate, deficit / rate,
                     est.stderr / rate, pred.limit_constant, exact])
    return rows


def _snap(cfg):
    """Ladder times moved to the nearest point of the uniform sampling grid."""
    grid = TimeGrid.uniform(cfg.t_max, cfg.grid_size)
    idx = np.clip(np.rint(cfg.times / cfg.t_max * cfg.grid_size).astype(int) - 1,
                  0, cfg.grid_size - 1)
    idx = np.unique(idx)
    return grid, grid.times[idx]


def _shc_rows(cfg):
    grid, times = _snap(cfg)
    factor = build_factor(cfg.process, grid)
    curve = run_shc(cfg.process, cfg.domain, grid, times, cfg.n_paths, cfg.seed,
                    cfg.bias_control, cfg.chunk_size, cfg.threads, factor)
    mus = [mu_closed_form(cfg.process, t) for t in times]
    if any(m is None for m in mus):
        ests = run_mu(cfg.process, grid, times, cfg.n_paths, derive_seed(cfg.seed, "mu"),
                      cfg.process.bm_like, cfg.chunk_size, cfg.threads)
        mu_vals = [e.value for e in ests]
        mu_ses = [e.stderr for e in ests]
    else:
        mu_vals, mu_ses = mus, [0.0] * len(mus)
    if isinstance(cfg.domain, Interval):
        limit = 2.0
    else:
        limit = surface_area(cfg.domain) if _self_similar(cfg.process) else math.nan
    vol = volume(cfg.domain)
    rows = []
    for k, t in enumerate(times):
        q, h = curve.q_estimates[k], curve.h_estimates[k]
        deficit = vol - q.value
        mu, mse = mu_vals[k], mu_ses[k]
        ratio = deficit / mu
        rse = math.hypot(q.stderr / mu, ratio * mse / mu)
        if curve.refine_delta is not None:
            rd, rdse = curve.refine_delta[k].value, curve.refine_delta[k].stderr
        else:
            rd = rdse = math.nan
        rows.append([t, q.value, q.stderr, h.value, h.stderr, deficit, mu, mse, ratio, rse,
                     limit, rd, rdse])
    return rows, curve, factor.jitter_used


def _deficit_figure(cfg, t, y, err, exponent, name):
    fig = Figure(f"{cfg.process.label} on {cfg.domain.describe()}", "t", name)
    fig.series.append(Series(name, np.asarray(t), np.asarray(y),
                             None if err is None else np.asarray(err)))
    good = [(a, b) for a, b in zip(t, y) if a > 0 and b > 0]
    if len(good) >= 3:
        fit = fit_power_law(good)
        x = np.array([min(t), max(t)])
        fig.series.append(Series(f"fit slope {fit.exponent:.4f}", x,
                                 power_line(x, fit.exponent, fit.log_constant), style="line"))
        fig.notes.append(f"fitted slope {fit.exponent:.4f}")
    if exponent is not None and good:
        t0, y0 = good[-1]
        x = np.array([min(t), max(t)])
        fig.series.append(Series(f"reference slope {exponent:g}", x,
                                 y0 * (x / t0) ** exponent, style="dashed"))
        fig.notes.append(f"reference slope {exponent:g}")
    return fig


def _ratio_figure(cfg, t, ratio, err, limit, ylabel):
    fig = Figure(f"{cfg.process.label} on {cfg.domain.describe()}", "t", ylabel, logy=False)
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    err = np.zeros_like(ratio) if err is None else np.asarray(err, dtype=float)
    fig.bands.append(Band(t, ratio - 1.96 * err, ratio + 1.96 * err))
    fig.series.append(Series("ratio", t, ratio, err))
    if math.isfinite(limit):
        fig.series.append(Series(f"limit {limit:.6g}", np.array([t.min(), t.max()]),
                                 np.array([limit, limit]), style="dashed"))
    return fig


def _estimate_rhc(cfg):
    rows = _rhc_rows(cfg, cfg.times)
    arr = np.array(rows, dtype=float)
    res = RunResult(rows, COLUMNS["estimate-rhc"])
    res.figures["deficit.svg"] = _deficit_figure(cfg, arr[:, 0], arr[:, 3], arr[:, 2],
                                                 rate_exponent(cfg.process), "|D| - H(t)")
    res.figures["ratio.svg"] = _ratio_figure(cfg, arr[:, 0], arr[:, 5], arr[:, 6],
                                             float(arr[0, 7]), "(|D| - H) / sqrt(R_t)")
    return res


def _estimate_shc(cfg):
    rows, curve, jitter = _shc_rows(cfg)
    arr = np.array(rows, dtype=float)
    res = RunResult(rows, COLUMNS["estimate-shc"], jitter_used=jitter)
    res.extra["monotone"] = curve.is_monotone()
    res.extra["dominated"] = curve.is_dominated()
    res.figures["deficit.svg"] = _deficit_figure(cfg, arr[:, 0], arr[:, 5], arr[:, 2],
                                                 rate_exponent(cfg.process), "|D| - Q(t)")
    res.figures["ratio.svg"] = _ratio_figure(cfg, arr[:, 0], arr[:, 8], arr[:, 9],
                                             float(arr[0, 10]), "(|D| - Q) / mu_t")
    return res


def _sweep(cfg):
    if cfg.target == "rhc":
        times = cfg.times
        limit = predict_rhc(cfg.process, cfg.domain, times[0]).limit_constant
        if isinstance(cfg.domain, Interval):
            deficits = [volume(cfg.domain) - rhc_exact_1d(cfg.process, cfg.domain, t)
                        for t in times]
            ses = [0.0] * len(times)
        else:
            est = _rhc_rows(cfg, times)
            deficits = [r[3] for r in est]
            ses = [r[2] for r in est]
        rates = [math.sqrt(variance(cfg.process, t)) for t in times]
        jitter = 0.0
    else:
        est, _, jitter = _shc_rows(cfg)
        times = [r[0] for r in est]
        deficits = [r[5] for r in est]
        ses = [r[2] for r in est]
        rates = [r[6] for r in est]
        limit = est[0][10]
    rows = [[t, d, s, r, d / r, s / r] for t, d, s, r in zip(times, deficits, ses, rates)]
    exponent = rate_exponent(cfg.process)
    fit_rows = []
    good = [(t, d) for t, d in zip(times, deficits) if d > 0]
    if len(good) >= 3:
        fit = fit_power_law(good)
        fit_rows.append([f"{cfg.target}_deficit", fit.exponent, fit.log_constant,
                         fit.constant, fit.r_squared, fit.n_points, exponent, limit])
    res = RunResult(rows, COLUMNS["sweep"], fit_rows, jitter_used=jitter)
    label = "|D| - H(t)" if cfg.target == "rhc" else "|D| - Q(t)"
    res.figures["deficit.svg"] = _deficit_figure(cfg, times, deficits, ses, exponent, label)
    res.figures["ratio.svg"] = _ratio_figure(cfg, times, [r[4] for r in rows],
                                             [r[5] for r in rows], limit, "deficit / rate")
    return res


def _verify(cfg):
    tol = cfg.verify
    rows = []

    def check(name, t, value, target, tolerance, ok):
        rows.append([name, t, value, target, tolerance, int(bool(ok))])

    if isinstance(cfg.domain, Interval) and cfg.process.has_covariance:
        for t in cfg.times:
            pred = predict_rhc(cfg.process, cfg.domain, t)
            _, log_err = rhc_error_1d(cfg.process, cfg.domain, t)
            # residual of the exact identity stays below the exponential bound
            check("rhc_error_below_bound", t, log_err, pred.log_error_bound, 0.0,
                  log_err <= pred.log_error_bound)
            deficit = volume(cfg.domain) - rhc_exact_1d(cfg.process, cfg.domain, t)
            ratio = deficit / pred.rate_value
            check("rhc_ratio", t, ratio, pred.limit_constant, tol["rhc_ratio_tol"],
                  abs(ratio - pred.limit_constant) <= tol["rhc_ratio_tol"])

    if cfg.process.has_covariance:
        rows_shc, curve, jitter = _shc_rows(cfg)
        shc_times = tol["shc_times"] or [rows_shc[0][0]]
        for r in rows_shc:
            t, ratio, rse, limit = r[0], r[8], r[9], r[10]
            if not any(math.isclose(t, s, rel_tol=0.05) for s in shc_times):
                continue
            if not math.isfinite(limit):
                continue
            check("shc_ratio", t, ratio, limit, tol["shc_ratio_tol"] * limit,
                  abs(ratio - limit) <= tol["shc_ratio_tol"] * limit)
        check("q_below_h", math.nan, float(curve.is_dominated(tol["ci_k"])), 1.0,
              tol["ci_k"], curve.is_dominated(tol["ci_k"]))
        check("q_monotone", math.nan, float(curve.is_monotone(tol["monotone_slack"])), 1.0,
              tol["monotone_slack"], curve.is_monotone(tol["monotone_slack"]))
    else:
        jitter = 0.0
    res = RunResult(rows, COLUMNS["verify"], jitter_used=jitter)
    res.passed = all(r[5] for r in rows) and bool(rows)
    return res


PIPELINES = {
    "predict": _predict,
    "estimate-rhc": _estimate_rhc,
    "estimate-shc": _estimate_shc,
    "sweep": _sweep,
    "verify": _verify,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(format_value(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_csv(path, columns, rows):
    _atomic_write(path, csv_text(columns, rows))


def emit_plot(path, figure):
    _atomic_write(path, render(figure))


def _metadata(cfg, res):
    return {
        "mode": cfg.mode,
        "config": cfg.echo,
        "process": cfg.process.label,
        "domain": cfg.domain.describe(),
        "times": [float(t) for t in cfg.times],
        "seed": cfg.seed,
        "jitter_used": res.jitter_used,
        "tolerances": {k: v for k, v in cfg.verify.items()},
        "columns": res.columns,
        "passed": res.passed,
        "checks": {k: bool(v) for k, v in res.extra.items()},
        "versions": {
            "gaussheat": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


def run(cfg: ExperimentConfig) -> RunResult:
    """Run the pipeline for ``cfg.mode`` and write its artifacts to ``cfg.output_dir``."""
    res = PIPELINES[cfg.mode](cfg)
    # all computation happens before the first byte is written
    os.makedirs(cfg.output_dir, exist_ok=True)
    out = cfg.output_dir
    emit_csv(os.path.join(out, "results.csv"), res.columns, res.rows)
    if res.fit_rows is not None:
        emit_csv(os.path.join(out, "fit.csv"), FIT_COLUMNS, res.fit_rows)
    for name, fig in res.figures.items():
        emit_plot(os.path.join(out, name), fig)
    _atomic_write(os.path.join(out, "run_metadata.json"),
                  json.dumps(_metadata(cfg, res), indent=2, sort_keys=True) + "\n")
    return res


def build_parser():
    p = argparse.ArgumentParser(prog="gaussheat", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="INI config file (env GHC_CONFIG)")
    p.add_argument("--mode", choices=MODES, help="override [run] mode (env GHC_MODE)")
    p.add_argument("--seed", type=int, help="override [run] seed (env GHC_SEED)")
    p.add_argument("--out", help="override [run] output_dir (env GHC_OUT)")
    p.add_argument("--threads", type=int, help="sampling threads (env GHC_THREADS)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    env = os.environ
    config = args.config or env.get(ENV_PREFIX + "CONFIG")
    if not config:
        print("gaussheat: error: --config is required", file=sys.stderr)
        return 2
    overrides = {
        "mode": args.mode or env.get(ENV_PREFIX + "MODE"),
        "seed": args.seed if args.seed is not None else env.get(ENV_PREFIX + "SEED"),
        "output_dir": args.out or env.get(ENV_PREFIX + "OUT"),
        "threads": args.threads if args.threads is not None else env.get(ENV_PREFIX + "THREADS"),
    }
    try:
        cfg = load_config(config, overrides)
        res = run(cfg)
    except ConfigError as exc:
        print(f"gaussheat: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gaussheat: I/O error: {exc}", file=sys.stderr)
        return 3
    except GaussHeatError as exc:
        print(f"gaussheat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    if cfg.mode == "verify":
        for row in res.rows:
            status = "PASS" if row[5] else "FAIL"
            print(f"{status} {row[0]} t={format_value(row[1])} value={format_value(row[2])} "
                  f"target={format_value(row[3])}")
        return 0 if res.passed else 1
    print(f"wrote {len(res.rows)} rows to {os.path.join(cfg.output_dir, 'results.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
