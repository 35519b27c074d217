"""Experiment orchestration: reference generation, repeated runs, statistics
and CSV export."""

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PARAM_NAMES, ExperimentConfig, dump_config, load_config
from .ga import ga_run
from .line_search import ls_run
from .motor import CurrentWaveform, simulate, write_waveform_csv
from .objective import MotorObjective
from .pso import pso_run
from .records import RunRecord

log = logging.getLogger(__name__)

__all__ = [
    "SummaryStats",
    "ExperimentResult",
    "make_reference",
    "run_single",
    "run_experiment",
    "percent_deviation",
    "summarize",
    "boxplot_stats",
    "decimate_trace",
    "export",
    "report",
]

MAX_TRACE_ROWS = 2000


@dataclass
class SummaryStats:
    """Final-fitness statistics and parameter accuracy of one optimizer."""

    algo: str
    runs: int
    average: float
    std: float
    min: float
    max: float
    median: float
    degenerate: bool
    deviation: np.ndarray | None = None
    evals_to_5pct: float | None = None
    boxplot: dict = field(default_factory=dict)


@dataclass
class ExperimentResult:
    records: list
    stats: dict
    reference: CurrentWaveform
    config: ExperimentConfig


def make_reference(config):
    """Reference waveform from the true parameters, optionally noisy."""
    ref = simulate(config.true_params, config.supply, config.reference_integrator)
    if config.noise_sigma > 0:
        rng = np.random.default_rng(np.random.SeedSequence([config.base_seed, 0x5EED]))
        noise = rng.normal(0.0, config.noise_sigma, size=(3, len(ref)))
        ref = CurrentWaveform(ref.t, ref.i1 + noise[0], ref.i2 + noise[1], ref.i3 + noise[2])
    return ref


def run_single(algo, seed, config, reference):
    objective = MotorObjective(reference, config.supply, config.integrator, config.budget)
    if algo in ("cpso", "psol", "psog"):
        return pso_run(objective, config.space, config.pso_config(algo), config.clubs, seed,
                       algo=algo)
    if algo == "ga":
        return ga_run(objective, config.space, config.ga, seed)
    if algo == "ls":
        return ls_run(objective, config.space, config.ls, seed)
    raise ValueError(f"unknown algorithm {algo!r}")


def _run_job(job):
    algo, k, seed, config, reference = job
    t0 = time.perf_counter()
    try:
        rec = run_single(algo, seed, config, reference)
    except Exception as exc:  # recorded and excluded from the statistics
        log.warning("%s run %d (seed %d) failed: %s", algo, k, seed, exc)
        rec = RunRecord(algo, seed, np.empty(0), None, np.nan, config.budget,
                        extra={"error": repr(exc)})
    rec.wall_time = time.perf_counter() - t0
    rec.extra["run"] = k
    log.info("%s run %d seed %d: fitness %.6g in %.1f s", algo, k, seed, rec.fitness,
             rec.wall_time)
    return rec


def _check_writable(out_dir):
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out_dir} is not writable: {exc}") from exc
    return out_dir


def run_experiment(config, out_dir=None, *, deterministic=True, reference=None):
    """Run every selected optimizer ``config.runs`` times and summarize.

    Run ``k`` uses seed ``config.base_seed + k``.  With ``deterministic``
    the runs execute sequentially and recorded wall times are zeroed in the
    exported files, so repeated invocations write identical bytes.
    """
    if out_dir is not None:
        out_dir = _check_writable(out_dir)
    if reference is None:
        reference = make_reference(config)
    jobs = [(algo, k, config.base_seed + k, config, reference)
            for algo in config.algorithms for k in range(config.runs)]
    if deterministic or config.workers <= 1:
        records = [_run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_job, jobs))
    stats = summarize(records, config.true_params.as_array())
    result = ExperimentResult(records, stats, reference, config)
    if out_dir is not None:
        export(result, out_dir, deterministic=deterministic)
    return result


def percent_deviation(theta_hat, theta_true):
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_true = np.asarray(theta_true, dtype=float)
    if not np.all(theta_true > 0):
        raise ValueError("true parameters must be strictly positive")
    return 100.0 * np.abs(theta_hat - theta_true) / theta_true


def boxplot_stats(values, whis=1.5):
    """Quartiles, Tukey whiskers and outliers of a sample."""
    x = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    inside = x[(x >= q1 - whis * iqr) & (x <= q3 + whis * iqr)]
    return {
        "q1": float(q1), "median": float(med), "q3": float(q3),
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [float(v) for v in x if v < inside.min() or v > inside.max()],
    }


def _stats_from_arrays(algo, finals, thetas, theta_true, speeds):
    finals = np.asarray(finals, dtype=float)
    n = finals.size
    degenerate = n < 2
    dev = None
    box = {"fitness": boxplot_stats(finals)}
    if theta_true is not None and len(thetas):
        per_run = np.array([percent_deviation(th, theta_true) for th in thetas])
        dev = per_run.mean(axis=0)
        for name, col in zip(PARAM_NAMES, per_run.T):
            box[name] = boxplot_stats(col)
    reached = [s for s in speeds if s is not None]
    return SummaryStats(
        algo=algo, runs=n,
        average=float(finals.mean()),
        std=0.0 if degenerate else float(finals.std(ddof=1)),
        min=float(finals.min()), max=float(finals.max()),
        median=float(np.median(finals)),
        degenerate=degenerate, deviation=dev,
        # median over runs that reached the target; None when none did
        evals_to_5pct=float(np.median(reached)) if reached else None,
        boxplot=box,
    )


def summarize(records, theta_true=None):
    """Per-algorithm statistics over successful runs, in first-seen order."""
    out = {}
    for algo in dict.fromkeys(r.algo for r in records):
        ok = [r for r in records if r.algo == algo and np.isfinite(r.fitness)]
        failed = sum(1 for r in records if r.algo == algo) - len(ok)
        if failed:
            log.warning("%s: %d failed run(s) excluded from statistics", algo, failed)
        if not ok:
            continue
        out[algo] = _stats_from_arrays(
            algo, [r.fitness for r in ok], [r.theta for r in ok if r.theta is not None],
            theta_true, [r.evals_to_fraction(0.05) for r in ok])
    return out


def decimate_trace(best, budget=None, max_rows=MAX_TRACE_ROWS):
    """Change-points of a best-so-far trace as ``(evals, best)`` rows.

    Keeps the first evaluation, every improvement and the final evaluation
    (padded to ``budget``).  Only when there are more change-points than
    ``max_rows`` are they thinned evenly, first and last always kept.
    """
    best = np.asarray(best, dtype=float)
    if best.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx = np.concatenate([[0], np.flatnonzero(best[1:] < best[:-1]) + 1])
    evals = idx + 1
    values = best[idx]
    last = max(best.size, budget or 0)
    if evals[-1] != last:
        evals = np.append(evals, last)
        values = np.append(values, best[-1])
    if evals.size > max_rows:
        keep = np.unique(np.round(np.linspace(0, evals.size - 1, max_rows)).astype(int))
        evals, values = evals[keep], values[keep]
    return evals, values


def _fmt(v):
    return repr(float(v))


def _write_csv(path, header, rows):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    return path


def export(result, out_dir, *, deterministic=True):
    """Write reference, per-run traces and the summary tables to ``out_dir``."""
    out_dir = _check_writable(out_dir)
    config = result.config
    dump_config(config, out_dir / "experiment.yaml")
    write_waveform_csv(result.reference, out_dir / "reference.csv")

    finals = []
    for rec in result.records:
        k = rec.extra.get("run", 0)
        if rec.evaluations:
            evals, values = decimate_trace(rec.best, rec.budget)
            _write_csv(out_dir / f"convergence_{rec.algo}_{k}.csv", ["evals", "best_fitness"],
                       [[int(e), _fmt(v)] for e, v in zip(evals, values)])
        if rec.best_particle is not None:
            _write_csv(out_dir / f"best_particle_{rec.algo}_{k}.csv",
                       ["iteration", "particle_index"],
                       [[i + 1, int(p)] for i, p in enumerate(rec.best_particle)])
        theta = rec.theta if rec.theta is not None else np.full(5, np.nan)
        wall = 0.0 if deterministic else rec.wall_time
        finals.append([rec.algo, k, rec.seed, _fmt(rec.fitness), *map(_fmt, theta), _fmt(wall)])
    _write_csv(out_dir / "finals.csv",
               ["algo", "run", "seed", "fitness", *PARAM_NAMES, "wall_s"], finals)
    write_tables(result.stats, out_dir)
    return out_dir


def write_tables(stats, out_dir):
    out_dir = Path(out_dir)
    _write_csv(out_dir / "summary.csv",
               ["algo", "average", "std_dev", "min", "max", "median", "runs", "degenerate",
                "evals_to_5pct"],
               [[s.algo, _fmt(s.average), _fmt(s.std), _fmt(s.min), _fmt(s.max),
                 _fmt(s.median), s.runs, int(s.degenerate),
                 "" if s.evals_to_5pct is None else _fmt(s.evals_to_5pct)]
                for s in stats.values()])
    _write_csv(out_dir / "deviation.csv", ["algo", *PARAM_NAMES],
               [[s.algo, *map(_fmt, s.deviation)] for s in stats.values()
                if s.deviation is not None])
    rows = []
    for s in stats.values():
        for quantity, b in s.boxplot.items():
            rows.append([s.algo, quantity, _fmt(b["q1"]), _fmt(b["median"]), _fmt(b["q3"]),
                         _fmt(b["whisker_low"]), _fmt(b["whisker_high"]),
                         ";".join(_fmt(v) for v in b["outliers"])])
    _write_csv(out_dir / "boxplot.csv",
               ["algo", "quantity", "q1", "median", "q3", "whisker_low", "whisker_high",
                "outliers"], rows)


def _read_rows(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _speed_from_csv(path):
    rows = _read_rows(path)
    if not rows:
        return None
    target = 0.05 * float(rows[0]["best_fitness"])
    for row in rows:
        if float(row["best_fitness"]) <= target:
            return int(row["evals"])
    return None


def report(in_dir, write=True):
    """Recompute the summary tables from the CSV files in ``in_dir``."""
    in_dir = Path(in_dir)
    config = load_config(in_dir / "experiment.yaml")
    theta_true = config.true_params.as_array()
    rows = _read_rows(in_dir / "finals.csv")
    stats = {}
    for algo in dict.fromkeys(r["algo"] for r in rows):
        ok = [r for r in rows if r["algo"] == algo and np.isfinite(float(r["fitness"]))]
        if not ok:
            continue
        finals = [float(r["fitness"]) for r in ok]
        thetas = [np.array([float(r[n]) for n in PARAM_NAMES]) for r in ok]
        speeds = []
        for r in ok:
            conv = in_dir / f"convergence_{algo}_{r['run']}.csv"
            speeds.append(_speed_from_csv(conv) if conv.exists() else None)
        stats[algo] = _stats_from_arrays(algo, finals, thetas, theta_true, speeds)
    if write:
        write_tables(stats, in_dir)
    return stats
