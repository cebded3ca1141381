"""Simulated listeners and batch experiment runs.

A ground-truth threshold curve (piecewise-linear between anchor points in
the Bark domain) plus seeded Gaussian perceptual noise yields reproducible
binary responses; run_experiment drives a full session against such a
listener and records convergence metrics per trial.

Random draws use numpy's default_rng (PCG64), whose stream is stable
across platforms for a fixed seed, so traces replay bit-for-bit.
"""

from dataclasses import dataclass, field

import numpy as np

from .prior import AudiogramTable
from .session import Session, Stimulus, ThresholdEstimate
from .warp import hz_to_bark

__all__ = [
    "TrueThreshold",
    "SimulatedListener",
    "ExperimentStep",
    "ExperimentTrace",
    "run_experiment",
    "rmse",
    "write_trace_csv",
    "write_estimate_csv",
]


class TrueThreshold:
    """Ground-truth curve: linear in Bark between audiogram anchor points."""

    def __init__(self, table):
        if not isinstance(table, AudiogramTable):
            table = AudiogramTable(*table)
        self.table = table
        self._xs = hz_to_bark(table.frequencies_hz)

    @classmethod
    def flat(cls, level_dbhl, freq_lo_hz=250.0, freq_hi_hz=8000.0):
        return cls(AudiogramTable([freq_lo_hz, freq_hi_hz], [level_dbhl, level_dbhl]))

    def __call__(self, freq_hz):
        f = np.asarray(freq_hz, dtype=float)
        lo, hi = self.table.frequencies_hz[0], self.table.frequencies_hz[-1]
        # tiny relative slack absorbs Hz->Bark->Hz roundtrip error
        if np.any(f < lo * (1 - 1e-9)) or np.any(f > hi * (1 + 1e-9)):
            raise ValueError(f"frequency outside truth anchors [{lo}, {hi}] Hz")
        out = np.interp(hz_to_bark(np.clip(f, lo, hi)), self._xs,
                        self.table.thresholds_dbhl)
        return float(out) if out.ndim == 0 else out


class SimulatedListener:
    """Binary responder: audible iff level - truth(freq) exceeds a seeded
    N(0, sigma_p^2) draw."""

    def __init__(self, truth, sigma_p, seed):
        if not np.isfinite(sigma_p) or sigma_p <= 0:
            raise ValueError("sigma_p must be positive and finite")
        self.truth = truth if isinstance(truth, TrueThreshold) else TrueThreshold(truth)
        self.sigma_p = float(sigma_p)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)

    def respond(self, stimulus):
        noise = self._rng.normal(0.0, self.sigma_p)
        margin = stimulus.level_dbhl - self.truth(stimulus.frequency_hz)
        return 1 if margin > noise else -1


@dataclass(frozen=True)
class ExperimentStep:
    step: int
    frequency_hz: float
    level_dbhl: float
    label: int
    rmse: float
    max_std: float
    mean_bald: float
    signal_std: float
    length_scale: float


@dataclass
class ExperimentTrace:
    seed: int
    prior_rmse: float
    steps: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # step -> ThresholdEstimate
    final_status: str = ""


def rmse(estimate, truth):
    """Root-mean-square error of the estimate means against the truth curve."""
    truth_vals = truth(estimate.frequencies_hz)  # raises on domain mismatch
    return float(np.sqrt(np.mean((estimate.means_dbhl - truth_vals) ** 2)))


def run_experiment(listener, config, eval_grid_size=64, snapshot_steps=(0, 7, 14, 21)):
    """Drive a session against a simulated listener until it stops.

    The RMSE/stds are evaluated on an ``eval_grid_size``-point estimate over
    the configured frequency range (the truth anchors must cover it).
    Fully reproducible from (listener seed, config).
    """
    session = Session(config)
    estimate = session.threshold_estimate(eval_grid_size)
    trace = ExperimentTrace(seed=listener.seed, prior_rmse=rmse(estimate, listener.truth))
    if 0 in snapshot_steps:
        trace.snapshots[0] = estimate
    while session.status == "active":
        stim = session.propose_trial()
        label = listener.respond(stim)
        session.record_response(stim, label)
        estimate = session.threshold_estimate(eval_grid_size)
        trace.steps.append(ExperimentStep(
            step=session.n_trials,
            frequency_hz=stim.frequency_hz,
            level_dbhl=stim.level_dbhl,
            label=label,
            rmse=rmse(estimate, listener.truth),
            max_std=session.max_grid_std(),
            mean_bald=session.mean_bald_history[-1],
            signal_std=session.current_hp.signal_std,
            length_scale=session.current_hp.length_scale,
        ))
        if session.n_trials in snapshot_steps:
            trace.snapshots[session.n_trials] = estimate
    trace.final_status = session.status
    return trace


def write_trace_csv(trace, path):
    """Trace export; no timestamps, so identical seeds give identical bytes."""
    with open(path, "w") as fh:
        fh.write("step,freq_hz,level_dbhl,label,rmse,max_std,mean_bald\n")
        for s in trace.steps:
            fh.write(f"{s.step},{float(s.frequency_hz)!r},{float(s.level_dbhl)!r},"
                     f"{s.label},{float(s.rmse)!r},{float(s.max_std)!r},"
                     f"{float(s.mean_bald)!r}\n")


def write_estimate_csv(estimate, path, level_axis_inverted=True):
    """(frequency, mean +/- std) series for audiogram rendering.

    The flag line records that audiograms plot hearing loss downward, so a
    renderer knows to invert the level axis.
    """
    with open(path, "w") as fh:
        fh.write(f"# level_axis_inverted={'true' if level_axis_inverted else 'false'}\n")
        fh.write("frequency_hz,mean_dbhl,std_dbhl\n")
        for f, m, s in zip(estimate.frequencies_hz, estimate.means_dbhl,
                           estimate.stds_dbhl):
            fh.write(f"{float(f)!r},{float(m)!r},{float(s)!r}\n")
