"""The five benchmark pipelines, M1 through M5.

=====  ==========================================================
M1     naive peak pick + full-sum width estimate
M2     M1 as stage 1, then iterative reweighted LS (default 2 iters)
M3     split-area initializer (windowed peak, two one-sided widths,
       optimal combination, template amplitude)
M4     M3 as stage 1, then iterative reweighted LS (default 2 iters)
M5     iterative reweighted LS seeded with the clamped samples
       themselves as weights (default 12 iters)
=====  ==========================================================

The two-stage methods build their starting weights as the Gaussian
described by the stage-1 estimate, frozen (the iteration does not re-pick
the peak).  M2, M4 and M5 funnel through the same solver, so with equal
starting weights and iteration counts their outputs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GaussFitError, UnknownMethodError
from .initfit import ErfTable, InitConfig, m3_initial_fit, naive_peak, sigma_area_m1
from .linfit import wls_iterate
from .results import CONVERGED, DEGENERATE_FALLBACK, FitResult, WlsTrace
from .signal import (
    GaussianParams,
    SampledSignal,
    eval_gaussian,
    log_transform,
    resolve_clamp_floor,
)

__all__ = ["METHOD_IDS", "MethodSpec", "run_method", "two_stage"]

METHOD_IDS = ("M1", "M2", "M3", "M4", "M5")


@dataclass(frozen=True)
class MethodSpec:
    """Which pipeline to run and with what knobs."""

    method_id: str
    stage2_iters: int = 2
    m5_iters: int = 12
    init: InitConfig = field(default_factory=InitConfig)
    clamp_floor: float | None = None

    def __post_init__(self):
        if self.method_id not in METHOD_IDS:
            raise UnknownMethodError(f"unknown method id {self.method_id!r}")
        if self.method_id in ("M2", "M4") and self.stage2_iters < 1:
            raise GaussFitError(f"stage2_iters must be >= 1, got {self.stage2_iters}")
        if self.method_id == "M5" and self.m5_iters < 1:
            raise GaussFitError(f"m5_iters must be >= 1, got {self.m5_iters}")


def _raw_sample_weights(signal: SampledSignal, clamp_floor: float | None) -> np.ndarray:
    """Starting weights for M5: the clamped samples themselves."""
    floor = resolve_clamp_floor(signal, clamp_floor)
    return np.exp(log_transform(signal, floor))


def two_stage(
    init: GaussianParams,
    signal: SampledSignal,
    iters: int,
    clamp_floor: float | None = None,
) -> tuple[FitResult, WlsTrace]:
    """Reweighted LS started from the Gaussian of a stage-1 estimate."""
    if iters < 1:
        raise GaussFitError(f"iters must be >= 1, got {iters}")
    w0 = eval_gaussian(init, signal.grid)
    return wls_iterate(signal, w0, iters, clamp_floor)


def _run_m1(signal: SampledSignal) -> FitResult:
    peak = naive_peak(signal)
    sigma = sigma_area_m1(signal, peak.amplitude_hat)
    params = GaussianParams(
        amplitude=peak.amplitude_hat, mu=peak.mu_hat, sigma=sigma
    )
    return FitResult(
        params=params,
        method="M1",
        iterations_run=0,
        diagnostics={"n_hat": peak.n_hat},
    )


def run_method(
    spec: MethodSpec, signal: SampledSignal, table: ErfTable
) -> FitResult:
    """Run one pipeline on a signal.  Deterministic given its inputs.

    Stage errors propagate as typed :class:`GaussFitError` subclasses with
    stage labels, except that a failed stage 1 of M2/M4 falls back to the
    M5 starting weights and flags the result ``degenerate-fallback``.
    """
    mid = spec.method_id
    if mid == "M1":
        return _run_m1(signal)

    if mid == "M3":
        result = m3_initial_fit(signal, spec.init, table)
        result.method = "M3"
        return result

    if mid == "M5":
        w0 = _raw_sample_weights(signal, spec.clamp_floor)
        fit, _ = wls_iterate(signal, w0, spec.m5_iters, spec.clamp_floor)
        fit.method = "M5"
        return fit

    if mid in ("M2", "M4"):
        stage1_error: GaussFitError | None = None
        stage1 = None
        try:
            if mid == "M2":
                stage1 = _run_m1(signal)
            else:
                stage1 = m3_initial_fit(signal, spec.init, table)
        except GaussFitError as err:
            stage1_error = err
        if stage1 is not None:
            fit, _ = two_stage(stage1.params, signal, spec.stage2_iters,
                               spec.clamp_floor)
            fit.diagnostics.update(stage1.diagnostics)
            if stage1.status != CONVERGED:
                fit.status = stage1.status
        else:
            # stage 1 had nothing usable: start from the samples like M5
            w0 = _raw_sample_weights(signal, spec.clamp_floor)
            fit, _ = wls_iterate(signal, w0, spec.stage2_iters, spec.clamp_floor)
            fit.status = DEGENERATE_FALLBACK
            fit.diagnostics["stage1_error"] = str(stage1_error)
        fit.method = mid
        return fit

    raise UnknownMethodError(f"unknown method id {mid!r}")
