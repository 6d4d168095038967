"""Monte Carlo orchestration: pooled ESDs, rate fits and Stieltjes decay.

Trials are independent: each is regenerated from ``(config, trial_index)``
alone, so they are farmed out to a thread pool (``MPLAB_THREADS`` caps its
size) and merged back in trial-index order.  Results are therefore
independent of the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import logging
import math
import os
import time

import numpy as np

from ._errors import ContractError
from .bounds import eigen_tolerance, esd_distance_to_law, step_distance
from .diagnostics import RegionSpec, region_g_membership
from .ensemble import sample_matrix, truncate_entries
from .mp_law import MPLaw, mp_stieltjes_sym
from .spectral import SpectralSample, remove_row, spectral_sample

__all__ = [
    "RateFitResult",
    "ExperimentRecord",
    "StieltjesPoint",
    "StieltjesTable",
    "TruncationTrial",
    "TruncationReport",
    "worker_count",
    "map_trials",
    "trial_singular_values",
    "estimate_expected_esd",
    "jackknife_delta",
    "fit_power_law",
    "run_rate_experiment",
    "run_stieltjes_experiment",
    "run_truncation_experiment",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
JACKKNIFE_BATCHES = 10


def _version():
    from . import __version__

    return __version__


def worker_count():
    """Thread-pool size: ``MPLAB_THREADS`` if set, else the CPU count."""
    env = os.environ.get("MPLAB_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ContractError(f"MPLAB_THREADS must be an integer, got {env!r}") from None
        return max(1, k)
    return os.cpu_count() or 1


def map_trials(fn, indices):
    """``[fn(i) for i in indices]`` evaluated on the worker pool, order kept."""
    indices = list(indices)
    k = min(worker_count(), len(indices))
    if k <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, indices))


def trial_singular_values(config):
    """Singular values of every trial of ``config``, in trial order."""
    return map_trials(lambda t: spectral_sample(sample_matrix(config, t)).singular_values, range(config.trials))


def _pool(config, per_trial):
    return SpectralSample(np.concatenate(per_trial), config.n, config.p, config.config_hash(), -1, len(per_trial))


def estimate_expected_esd(config, n=None):
    """Pool every trial's eigenvalues into one ESD approximating ``E F_n``.

    ``n`` (optional) resizes the config at its own ``y`` first.
    """
    if n is not None and n != config.n:
        config = config.with_size(n)
    return _pool(config, trial_singular_values(config))


def _batches(trials):
    return np.array_split(np.arange(trials), min(JACKKNIFE_BATCHES, trials))


def jackknife_delta(per_trial, n, p, law):
    """Pooled ``Delta`` and its leave-one-batch-out jackknife standard error."""
    pooled = SpectralSample(np.concatenate(per_trial), n, p, trials=len(per_trial))
    delta = esd_distance_to_law(pooled, law)
    groups = _batches(len(per_trial))
    g = len(groups)
    if g < 2:
        return delta, float("nan")
    loo = []
    for drop in groups:
        dropped = set(drop.tolist())
        keep = [per_trial[i] for i in range(len(per_trial)) if i not in dropped]
        loo.append(esd_distance_to_law(SpectralSample(np.concatenate(keep), n, p, trials=len(keep)), law))
    loo = np.array(loo)
    se = math.sqrt((g - 1) / g * float(np.sum((loo - loo.mean()) ** 2)))
    return delta, se


@dataclass
class ExperimentRecord:
    """Provenance and statistics of one experiment run.

    Every statistic is a deterministic function of ``config`` and the
    listed seeds; only ``wall_clock`` varies between reruns.
    """

    experiment: str
    config: dict
    seeds: list
    statistics: dict
    wall_clock: float = 0.0
    version: str = field(default_factory=_version)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "seeds": self.seeds,
            "statistics": self.statistics,
            "wall_clock": self.wall_clock,
            "version": self.version,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def stem(self):
        from .ensemble import EnsembleConfig

        return f"{self.experiment}-{EnsembleConfig.from_dict(self.config).config_hash()}"

    def write(self, out_dir, csv_text=None):
        """Write ``{experiment}-{confighash}.json`` (and ``.csv``); return the paths."""
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, self.stem())
        paths = [base + ".json"]
        with open(paths[0], "w") as fh:
            fh.write(self.to_json() + "\n")
        if csv_text is not None:
            paths.append(base + ".csv")
            with open(paths[1], "w", newline="") as fh:
                fh.write(csv_text)
        return paths


def _seed_list(config, sizes):
    return [[config.base_seed, n, p, t] for n, p in sizes for t in range(config.trials)]


@dataclass
class RateFitResult:
    """``Delta_n`` estimates on an ``n`` grid with their log-log OLS fit.

    ``exp(intercept)`` is the empirical constant in ``Delta_n ~ C n^slope``.
    """

    n_grid: list
    delta_estimates: list
    stderrs: list
    slope: float
    intercept: float
    r_squared: float
    trials_per_n: int = 0
    record: ExperimentRecord = field(default=None, repr=False, compare=False)

    @property
    def constant(self):
        return math.exp(self.intercept)

    def to_dict(self):
        return {
            "n_grid": list(self.n_grid),
            "delta_estimates": list(self.delta_estimates),
            "stderrs": list(self.stderrs),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "trials_per_n": self.trials_per_n,
        }

    def to_csv(self):
        lines = ["n,trials,delta,stderr"]
        for n, d, s in zip(self.n_grid, self.delta_estimates, self.stderrs):
            lines.append(f"{n},{self.trials_per_n},{d:.17g},{s:.17g}")
        return "\n".join(lines) + "\n"


def fit_power_law(n_grid, deltas, stderrs=None, trials_per_n=0):
    """OLS of ``log Delta`` on ``log n``.

    Raises
    ------
    ContractError
        Fewer than two points, ``Delta`` outside ``(0, 1]`` or no spread in ``n``.
    """
    x = np.log(np.asarray(n_grid, dtype=float))
    d = np.asarray(deltas, dtype=float)
    if x.size < 2 or x.size != d.size:
        raise ContractError("need at least two (n, Delta) pairs of equal length")
    if np.any(~(d > 0)) or np.any(d > 1):
        raise ContractError("Delta estimates must lie in (0, 1]")
    y = np.log(d)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ContractError("degenerate fit: all n are equal")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    se = [float("nan")] * x.size if stderrs is None else [float(s) for s in stderrs]
    return RateFitResult([int(n) for n in n_grid], [float(v) for v in d], se, slope, intercept, r2, trials_per_n)


def run_rate_experiment(config, n_grid, out_dir=None):
    """Pooled ``Delta_n`` for each ``n`` (``p = round(n/y)``) and the power-law fit.

    With ``out_dir`` the record is written as ``rate-{hash}.json`` plus a
    CSV with columns ``n, trials, delta, stderr``.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3:
        raise ContractError("the rate experiment needs at least three sizes")
    start = time.perf_counter()
    law = MPLaw(config.y)
    deltas, ses, sizes = [], [], []
    for n in n_grid:
        cfg = config.with_size(n)
        delta, se = jackknife_delta(trial_singular_values(cfg), cfg.n, cfg.p, law)
        deltas.append(delta)
        ses.append(se)
        sizes.append((cfg.n, cfg.p))
    fit = fit_power_law(n_grid, deltas, ses, config.trials)
    stats = fit.to_dict()
    stats["p_grid"] = [p for _, p in sizes]
    stats["constant"] = fit.constant
    fit.record = ExperimentRecord(
        "rate", config.to_dict(), _seed_list(config, sizes), stats, time.perf_counter() - start
    )
    if out_dir is not None:
        fit.record.write(out_dir, fit.to_csv())
    return fit


@dataclass(frozen=True)
class StieltjesPoint:
    """Trial-averaged ``|E m_n(z) - s_y(z)|`` at one ``(z, n)``."""

    z: complex
    n: int
    p: int
    mean_transform: complex
    limit: complex
    error: float
    stderr: float
    trials: int

    def to_dict(self):
        return {
            "re": self.z.real,
            "im": self.z.imag,
            "n": self.n,
            "p": self.p,
            "mean_re": self.mean_transform.real,
            "mean_im": self.mean_transform.imag,
            "error": self.error,
            "stderr": self.stderr,
            "trials": self.trials,
        }


@dataclass
class StieltjesTable:
    points: list
    skipped: list
    record: ExperimentRecord = field(default=None, repr=False)

    def error(self, z, n):
        for pt in self.points:
            if pt.n == n and pt.z == complex(z):
                return pt.error
        raise KeyError((z, n))

    def decay_ratios(self):
        """``error(n_{k+1}) / error(n_k)`` for each ``z`` over consecutive computed sizes."""
        out = {}
        by_z = {}
        for pt in self.points:
            by_z.setdefault(pt.z, []).append(pt)
        for z, pts in by_z.items():
            pts = sorted(pts, key=lambda q: q.n)
            out[z] = [(a.n, b.n, b.error / a.error) for a, b in zip(pts, pts[1:])]
        return out

    def to_csv(self):
        lines = ["re,im,n,trials,error,stderr"]
        for pt in self.points:
            lines.append(f"{pt.z.real:.17g},{pt.z.imag:.17g},{pt.n},{pt.trials},{pt.error:.17g},{pt.stderr:.17g}")
        return "\n".join(lines) + "\n"


def run_stieltjes_experiment(config, z_grid, n_grid, A0=1.0, out_dir=None):
    """Trial-averaged symmetrized transform error on the region ``G``.

    Membership in ``G`` is rechecked for each ``n``; failing ``(z, n)``
    pairs are skipped, logged and listed in ``skipped``.
    """
    start = time.perf_counter()
    law = MPLaw(config.y)
    zs = [complex(z) for z in z_grid]
    points, skipped, sizes = [], [], []
    for n in [int(n) for n in n_grid]:
        cfg = config.with_size(n)
        region = RegionSpec.for_law(law, n, A0=A0)
        inside = []
        for z in zs:
            if region_g_membership(z, law, region).in_region_g:
                inside.append(z)
            else:
                log.warning("skipping z=%s at n=%d: outside G", z, n)
                skipped.append((z, n))
        if not inside:
            continue
        zarr = np.array(inside)
        sizes.append((cfg.n, cfg.p))

        def transforms(t):
            s2 = spectral_sample(sample_matrix(cfg, t)).singular_values ** 2
            return np.mean(zarr[None, :] / (s2[:, None] - zarr[None, :] ** 2), axis=0)

        vals = np.array(map_trials(transforms, range(cfg.trials)))
        mean = vals.mean(axis=0)
        spread = vals.std(axis=0, ddof=1) if cfg.trials > 1 else np.full(zarr.size, np.nan)
        limit = np.asarray(mp_stieltjes_sym(law, zarr))
        for k, z in enumerate(inside):
            points.append(
                StieltjesPoint(
                    z, cfg.n, cfg.p, complex(mean[k]), complex(limit[k]),
                    float(abs(mean[k] - limit[k])), float(np.abs(spread[k]) / math.sqrt(cfg.trials)),
                    cfg.trials,
                )
            )
    table = StieltjesTable(points, skipped)
    stats = {
        "points": [pt.to_dict() for pt in points],
        "skipped": [{"re": z.real, "im": z.imag, "n": n} for z, n in skipped],
        "A0": A0,
    }
    table.record = ExperimentRecord(
        "stieltjes", config.to_dict(), _seed_list(config, sizes), stats, time.perf_counter() - start
    )
    if out_dir is not None:
        table.record.write(out_dir, table.to_csv())
    return table


@dataclass(frozen=True)
class TruncationTrial:
    trial: int
    zeroed: int
    bai_distance: float
    interlacing_row: int
    interlacing_distance: float

    def bai_bound(self, n):
        return 2.0 * self.zeroed / n


@dataclass
class TruncationReport:
    n: int
    p: int
    level: float
    trials: list
    record: ExperimentRecord = field(default=None, repr=False)

    @property
    def bai_holds(self):
        return all(t.bai_distance <= t.bai_bound(self.n) for t in self.trials)

    @property
    def interlacing_holds(self):
        return all(t.interlacing_distance <= 2.0 / self.n for t in self.trials)

    @property
    def mean_distance(self):
        return float(np.mean([t.bai_distance for t in self.trials]))

    @property
    def mean_zeroed(self):
        return float(np.mean([t.zeroed for t in self.trials]))

    def to_csv(self):
        lines = ["trial,zeroed,bai_distance,bai_bound,interlacing_row,interlacing_distance"]
        for t in self.trials:
            lines.append(
                f"{t.trial},{t.zeroed},{t.bai_distance:.17g},{t.bai_bound(self.n):.17g},"
                f"{t.interlacing_row},{t.interlacing_distance:.17g}"
            )
        return "\n".join(lines) + "\n"


def run_truncation_experiment(config, out_dir=None):
    """Effect of truncation at ``c n^(1/4)`` on the ESD, trial by trial.

    For each trial the raw ESD is compared with the ESD of the truncated
    (not re-standardized) matrix, against the rank bound ``(2/n) #zeroed``.
    Row ``trial mod n`` is also deleted to check the interlacing bound
    ``2/n`` between the ESDs of ``W`` and its minor.
    """
    start = time.perf_counter()
    n = config.n

    def one(t):
        X = sample_matrix(config, t)
        Xt, zeroed = truncate_entries(X, config.trunc_const)
        ev = spectral_sample(X).eigenvalues
        bai = 0.0
        if zeroed:
            evt = spectral_sample(Xt).eigenvalues
            bai = step_distance(ev, evt, eigen_tolerance(ev, evt))
        j = t % n
        minor = spectral_sample(remove_row(X, j)).eigenvalues
        return TruncationTrial(t, zeroed, bai, j, step_distance(ev, minor, eigen_tolerance(ev, minor)))

    rows = map_trials(one, range(config.trials))
    report = TruncationReport(n, config.p, config.trunc_const * n ** 0.25, rows)
    stats = {
        "level": report.level,
        "mean_zeroed": report.mean_zeroed,
        "mean_distance": report.mean_distance,
        "bai_holds": report.bai_holds,
        "interlacing_holds": report.interlacing_holds,
        "trials": [
            {"trial": r.trial, "zeroed": r.zeroed, "bai_distance": r.bai_distance,
             "interlacing_row": r.interlacing_row, "interlacing_distance": r.interlacing_distance}
            for r in rows
        ],
    }
    report.record = ExperimentRecord(
        "truncate", config.to_dict(), _seed_list(config, [(n, config.p)]), stats, time.perf_counter() - start
    )
    if out_dir is not None:
        report.record.write(out_dir, report.to_csv())
    return report
