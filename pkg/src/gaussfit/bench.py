"""Seeded Monte Carlo benchmark of the fitting methods.

Two experiment shapes:

* :func:`run_bench_snr` sweeps the noise level and reports per-method,
  per-parameter mean squared error at each SNR point.
* :func:`run_bench_iters` holds the SNR fixed and sweeps the iteration
  count of the reweighted-LS stages, reusing one iteration trace per
  trial so all sweep points of a trial share the same noise.

Every trial derives its own seed from ``(master_seed, sweep index, trial
index)``, draws the true location and width from the configured uniform
ranges, synthesizes one noisy signal, and runs every configured method on
that same signal.  Reports are byte-reproducible for a fixed
configuration; trials are independent, so sweep points may be computed in
parallel worker processes without changing any reported value (timing
measurements excepted, which is why they are off by default).

Accounting: a trial whose method returns a fallback-flagged result still
contributes its estimate to the MSE and bumps the degenerate counter; a
trial whose method raises contributes nothing and bumps the counter.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import GaussFitError, ShapeError, UnknownMethodError
from .initfit import ErfTable, InitConfig, build_erf_table, m3_initial_fit
from .linfit import wls_trace
from .methods import METHOD_IDS, MethodSpec, _raw_sample_weights, _run_m1, run_method
from .results import CONVERGED
from .signal import (
    GaussianParams,
    NoiseSpec,
    SampledSignal,
    eval_gaussian,
    sample_gaussian,
)

__all__ = [
    "BenchConfig",
    "BenchRow",
    "BenchReport",
    "run_bench_snr",
    "run_bench_iters",
    "mse_aggregate",
    "write_report_csv",
]

PARAM_NAMES = ("A", "mu", "sigma")

# Stream tags so parameter draws and noise come from unrelated substreams.
_PARAMS_TAG = 0x50415241
_NOISE_TAG = 0x4E4F4953


@dataclass(frozen=True)
class BenchConfig:
    """Experiment protocol knobs.

    Defaults reproduce the standard setup: unit amplitude, location
    uniform on [8, 9] and width uniform on [1, 1.3] (an incompletely
    sampled bell with a long left tail on the [0, 10] grid), spacing
    0.01, and an SNR sweep from -10 dB to 20 dB in 0.5 dB steps.
    """

    trials: int
    master_seed: int
    a_true: float = 1.0
    mu_low: float = 8.0
    mu_high: float = 9.0
    sigma_low: float = 1.0
    sigma_high: float = 1.3
    x_max: float = 10.0
    delta_x: float = 0.01
    snr_start_db: float = -10.0
    snr_step_db: float = 0.5
    snr_stop_db: float = 20.0
    methods: tuple[str, ...] = METHOD_IDS
    stage2_iters: int = 2
    m5_iters: int = 12
    iter_sweep: tuple[int, ...] | None = None
    fixed_snr_db: float = 12.0
    window_l: int = 3
    clamp_floor: float | None = None
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise GaussFitError(f"trials must be >= 1, got {self.trials}")
        if self.a_true <= 0 or self.sigma_low <= 0:
            raise GaussFitError("amplitude and width must be positive")
        if self.mu_high < self.mu_low or self.sigma_high < self.sigma_low:
            raise GaussFitError("distribution bounds must be ordered")
        if self.delta_x <= 0 or self.x_max <= 0:
            raise GaussFitError("grid parameters must be positive")
        if self.snr_step_db <= 0 or self.snr_stop_db < self.snr_start_db:
            raise GaussFitError("SNR grid must be increasing")
        for mid in self.methods:
            if mid not in METHOD_IDS:
                raise UnknownMethodError(f"unknown method id {mid!r}")
        if not self.methods:
            raise GaussFitError("at least one method required")
        if self.iter_sweep is not None:
            if not self.iter_sweep or any(k < 1 for k in self.iter_sweep):
                raise GaussFitError("iteration sweep entries must be >= 1")
        if self.workers < 1:
            raise GaussFitError(f"workers must be >= 1, got {self.workers}")

    @property
    def n_samples(self) -> int:
        return int(round(self.x_max / self.delta_x)) + 1

    @property
    def snr_grid_db(self) -> tuple[float, ...]:
        count = int(math.floor((self.snr_stop_db - self.snr_start_db)
                               / self.snr_step_db + 1e-9)) + 1
        return tuple(self.snr_start_db + j * self.snr_step_db for j in range(count))

    def method_spec(self, method_id: str) -> MethodSpec:
        return MethodSpec(
            method_id=method_id,
            stage2_iters=self.stage2_iters,
            m5_iters=self.m5_iters,
            init=InitConfig(window_l=self.window_l, clamp_floor=self.clamp_floor),
            clamp_floor=self.clamp_floor,
        )


@dataclass(frozen=True)
class BenchRow:
    """One (method, sweep point, parameter) cell of a report."""

    method: str
    sweep: float
    param: str
    mse: float
    trials: int
    degenerate: int
    mean_time_us: float
    seed: int


@dataclass
class BenchReport:
    """All cells of one run, in deterministic emission order."""

    mode: str  # "snr" or "iters"
    rows: list[BenchRow] = field(default_factory=list)

    def cell(self, method: str, sweep: float, param: str) -> BenchRow:
        for row in self.rows:
            if row.method == method and row.param == param and row.sweep == sweep:
                return row
        raise KeyError((method, sweep, param))

    def mse(self, method: str, sweep: float, param: str) -> float:
        return self.cell(method, sweep, param).mse

    def mean_time_us(self, method: str, sweep: float) -> float:
        return self.cell(method, sweep, PARAM_NAMES[0]).mean_time_us


def mse_aggregate(estimates, truths) -> tuple[float, float, float]:
    """Component-wise mean squared error over paired parameter triples."""
    est = list(estimates)
    tru = list(truths)
    if len(est) != len(tru):
        raise ShapeError(f"length mismatch: {len(est)} estimates vs {len(tru)} truths")
    if not est:
        raise ShapeError("need at least one pair")
    acc = np.zeros(3)
    with np.errstate(over="ignore"):
        for e, t in zip(est, tru):
            diff = np.array([e.amplitude - t.amplitude, e.mu - t.mu,
                             e.sigma - t.sigma])
            acc += diff * diff
    acc /= len(est)
    return float(acc[0]), float(acc[1]), float(acc[2])


def _trial_signal(
    config: BenchConfig, sweep_idx: int, trial_idx: int, snr_db: float
) -> tuple[SampledSignal, GaussianParams, int]:
    """Draw one trial's truth and noisy signal from its derived seed."""
    trial_seed = rng.mix_seed(config.master_seed, sweep_idx, trial_idx)
    u = rng.uniforms(rng.mix_seed(trial_seed, _PARAMS_TAG), 2)
    truth = GaussianParams(
        amplitude=config.a_true,
        mu=config.mu_low + (config.mu_high - config.mu_low) * float(u[0]),
        sigma=config.sigma_low + (config.sigma_high - config.sigma_low) * float(u[1]),
    )
    noise = NoiseSpec(snr_db=snr_db, seed=rng.mix_seed(trial_seed, _NOISE_TAG))
    signal = sample_gaussian(truth, config.delta_x, config.n_samples, noise)
    return signal, truth, trial_seed


class _CellAccumulator:
    """Squared errors (NaN when absent), degenerate count, elapsed time."""

    def __init__(self, trials: int):
        self.sq = np.full((trials, 3), np.nan)
        self.degenerate = 0
        self.elapsed_s = 0.0

    def record(self, trial_idx: int, estimate: GaussianParams | None,
               truth: GaussianParams, converged: bool) -> None:
        if estimate is not None:
            diff = np.array([
                estimate.amplitude - truth.amplitude,
                estimate.mu - truth.mu,
                estimate.sigma - truth.sigma,
            ])
            # absurd estimates may overflow the square; inf is the honest value
            with np.errstate(over="ignore"):
                self.sq[trial_idx] = diff * diff
        if estimate is None or not converged:
            self.degenerate += 1

    def mse(self) -> np.ndarray:
        present = ~np.isnan(self.sq)
        counts = present.sum(axis=0)
        sums = np.where(present, self.sq, 0.0).sum(axis=0)
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _snr_point(config: BenchConfig, table: ErfTable, sweep_idx: int):
    """Run all trials of one SNR point.  Pure function of its arguments."""
    snr_db = config.snr_grid_db[sweep_idx]
    specs = [config.method_spec(mid) for mid in config.methods]
    cells = {mid: _CellAccumulator(config.trials) for mid in config.methods}
    seeds = []
    for t in range(config.trials):
        signal, truth, trial_seed = _trial_signal(config, sweep_idx, t, snr_db)
        seeds.append(trial_seed)
        for spec in specs:
            cell = cells[spec.method_id]
            t0 = time.perf_counter() if config.timing else 0.0
            try:
                fit = run_method(spec, signal, table)
                estimate, converged = fit.params, fit.status == CONVERGED
            except GaussFitError:
                estimate, converged = None, False
            if config.timing:
                cell.elapsed_s += time.perf_counter() - t0
            cell.record(t, estimate, truth, converged)
    return sweep_idx, cells, seeds


def _snr_point_args(args):
    return _snr_point(*args)


def _emit_rows(
    report: BenchReport,
    config: BenchConfig,
    sweep_value: float,
    cells: dict[str, _CellAccumulator],
) -> None:
    for mid in config.methods:
        cell = cells[mid]
        mse = cell.mse()
        mean_us = cell.elapsed_s / config.trials * 1e6 if config.timing else 0.0
        for p, name in enumerate(PARAM_NAMES):
            report.rows.append(
                BenchRow(
                    method=mid,
                    sweep=sweep_value,
                    param=name,
                    mse=float(mse[p]),
                    trials=config.trials,
                    degenerate=cell.degenerate,
                    mean_time_us=mean_us,
                    seed=config.master_seed,
                )
            )


def _check_seed_collisions(all_seeds: list[int]) -> None:
    if len(set(all_seeds)) != len(all_seeds):
        raise GaussFitError("per-trial seed collision; change the master seed")


def run_bench_snr(config: BenchConfig, table: ErfTable | None = None) -> BenchReport:
    """MSE versus SNR for every configured method.

    All methods inside a trial see the same noisy signal, which removes
    between-method noise variance from the comparison.
    """
    if table is None:
        table = build_erf_table(0.1, 0.01, 991)
    grid = config.snr_grid_db
    report = BenchReport(mode="snr")
    all_seeds: list[int] = []
    tasks = [(config, table, j) for j in range(len(grid))]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_snr_point_args, tasks))
    else:
        results = [_snr_point(*t) for t in tasks]
    results.sort(key=lambda item: item[0])
    for sweep_idx, cells, seeds in results:
        all_seeds.extend(seeds)
        _emit_rows(report, config, grid[sweep_idx], cells)
    _check_seed_collisions(all_seeds)
    return report


def _iters_point(config: BenchConfig, table: ErfTable):
    """Run all trials of the fixed-SNR iteration sweep."""
    sweep = tuple(config.iter_sweep or ())
    max_iters = max(sweep)
    snr_db = config.fixed_snr_db
    init_cfg = InitConfig(window_l=config.window_l, clamp_floor=config.clamp_floor)
    cells = {
        mid: {k: _CellAccumulator(config.trials) for k in sweep}
        for mid in config.methods
    }
    seeds = []

    def record_constant(mid, t, estimate, truth, converged):
        for k in sweep:
            cells[mid][k].record(t, estimate, truth, converged)

    for t in range(config.trials):
        signal, truth, trial_seed = _trial_signal(config, 0, t, snr_db)
        seeds.append(trial_seed)
        for mid in config.methods:
            t0 = time.perf_counter() if config.timing else 0.0
            try:
                if mid in ("M1", "M3"):
                    # no iterative stage: constant across the sweep
                    if mid == "M1":
                        fit = _run_m1(signal)
                    else:
                        fit = m3_initial_fit(signal, init_cfg, table)
                    record_constant(mid, t, fit.params, truth,
                                    fit.status == CONVERGED)
                else:
                    clean_start = True
                    if mid == "M5":
                        w0 = _raw_sample_weights(signal, config.clamp_floor)
                    else:
                        try:
                            stage1 = (_run_m1(signal) if mid == "M2"
                                      else m3_initial_fit(signal, init_cfg, table))
                            w0 = eval_gaussian(stage1.params, signal.grid)
                            clean_start = stage1.status == CONVERGED
                        except GaussFitError:
                            # same fallback as run_method: start from samples
                            w0 = _raw_sample_weights(signal, config.clamp_floor)
                            clean_start = False
                    trace = wls_trace(signal, w0, max_iters, config.clamp_floor)
                    for k in sweep:
                        step = trace[k - 1]
                        cells[mid][k].record(t, step.params, truth,
                                             clean_start and step.params is not None)
            except GaussFitError:
                record_constant(mid, t, None, truth, False)
            if config.timing:
                dt = time.perf_counter() - t0
                for k in sweep:
                    cells[mid][k].elapsed_s += dt
    return cells, seeds


def run_bench_iters(config: BenchConfig, table: ErfTable | None = None) -> BenchReport:
    """MSE versus reweighting iteration count at a fixed SNR.

    One trace of ``max(iter_sweep)`` iterations per trial produces every
    sweep point, so points within a trial share their noise.  Sweep points
    where an iterate has no Gaussian form are counted degenerate for that
    trial.
    """
    if config.iter_sweep is None:
        raise GaussFitError("iter_sweep must be set for the iteration benchmark")
    if table is None:
        table = build_erf_table(0.1, 0.01, 991)
    cells, seeds = _iters_point(config, table)
    _check_seed_collisions(seeds)
    report = BenchReport(mode="iters")
    for k in config.iter_sweep:
        point_cells = {mid: cells[mid][k] for mid in config.methods}
        _emit_rows(report, config, float(k), point_cells)
    return report


def write_report_csv(report: BenchReport, path) -> None:
    """Write the report; floats carry 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method,sweep,param,mse,trials,degenerate,mean_time_us,seed\n")
        for row in report.rows:
            sweep = f"{int(row.sweep)}" if report.mode == "iters" else f"{row.sweep:.17g}"
            fh.write(
                f"{row.method},{sweep},{row.param},{row.mse:.17g},"
                f"{row.trials},{row.degenerate},{row.mean_time_us:.17g},{row.seed}\n"
            )
