"""Active-learning session state machine.

A session holds the trial history and the fitted posterior, proposes the
next stimulus, ingests responses (refitting and re-selecting kernel
hyperparameters after every trial), and stops once the posterior standard
deviation over the candidate grid drops below the configured threshold or
the trial budget is exhausted.

Everything downstream of the configuration is deterministic: replaying the
same ordered history through a fresh session reproduces every number
bit-for-bit, which the event log replay helpers rely on.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import StimulusGrid, mean_bald, select_next_stimulus
from .errors import ConfigError, SessionStateError
from .hyperopt import MIN_TRIALS_FOR_OPT, HyperBounds, optimize_hyperparams
from .laplace import TrialSet, fit_posterior, predict_curve
from .prior import KernelHyperparams, LinearMeanParams, default_mean_params
from .warp import bark_to_hz, hz_to_bark

__all__ = [
    "Stimulus",
    "Trial",
    "SessionConfig",
    "ThresholdEstimate",
    "Session",
    "replay_history",
    "replay_events",
    "STATUS_ACTIVE",
    "STATUS_CONVERGED",
    "STATUS_MAX_TRIALS",
]

STATUS_ACTIVE = "active"
STATUS_CONVERGED = "stopped_converged"
STATUS_MAX_TRIALS = "stopped_max_trials"


@dataclass(frozen=True)
class Stimulus:
    frequency_hz: float
    level_dbhl: float


@dataclass(frozen=True)
class Trial:
    """One presented stimulus and its binary audibility label."""

    frequency_hz: float
    level_dbhl: float
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError("label must be +1 or -1")
        if not (np.isfinite(self.frequency_hz) and self.frequency_hz > 0):
            raise ValueError("frequency must be positive and finite")
        if not np.isfinite(self.level_dbhl):
            raise ValueError("level must be finite")


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs; validate() lists offending fields."""

    freq_range: tuple = (250.0, 8000.0)
    level_range: tuple = (-10.0, 110.0)
    sigma_p: float = 2.0
    grid_size: int = 256
    stop_std: float = 1.0
    max_trials: int = 21
    hyper_bounds: HyperBounds = field(default_factory=HyperBounds)
    hp: KernelHyperparams = field(default_factory=KernelHyperparams)
    mean: LinearMeanParams | None = None
    weight_table: tuple | None = None  # (freqs_hz, weights)
    optimize_hypers: bool = True

    def validate(self):
        bad = []
        fr, lr = self.freq_range, self.level_range
        if not (len(fr) == 2 and np.isfinite(fr).all() and 0 < fr[0] < fr[1]):
            bad.append("freq_range")
        if not (len(lr) == 2 and np.isfinite(lr).all() and lr[0] < lr[1]):
            bad.append("level_range")
        if not (np.isfinite(self.sigma_p) and self.sigma_p > 0):
            bad.append("sigma_p")
        if not (isinstance(self.grid_size, int) and self.grid_size >= 2):
            bad.append("grid_size")
        if not (np.isfinite(self.stop_std) and self.stop_std > 0):
            bad.append("stop_std")
        if not (isinstance(self.max_trials, int) and self.max_trials >= 1):
            bad.append("max_trials")
        if bad:
            raise ConfigError(f"invalid config fields: {', '.join(bad)}", fields=bad)
        return self

    def resolved_mean(self):
        return self.mean if self.mean is not None else default_mean_params()

    def to_dict(self):
        d = {
            "freq_range": list(self.freq_range),
            "level_range": list(self.level_range),
            "sigma_p": self.sigma_p,
            "grid_size": self.grid_size,
            "stop_std": self.stop_std,
            "max_trials": self.max_trials,
            "hyper_bounds": {
                "signal_std_lo": self.hyper_bounds.signal_std_lo,
                "signal_std_hi": self.hyper_bounds.signal_std_hi,
                "length_scale_lo": self.hyper_bounds.length_scale_lo,
                "length_scale_hi": self.hyper_bounds.length_scale_hi,
            },
            "hp": {"signal_std": self.hp.signal_std, "length_scale": self.hp.length_scale},
            "optimize_hypers": self.optimize_hypers,
        }
        if self.mean is not None:
            d["mean"] = {"slope": self.mean.slope, "intercept": self.mean.intercept}
        if self.weight_table is not None:
            d["weight_table"] = [list(np.asarray(self.weight_table[0], dtype=float)),
                                 list(np.asarray(self.weight_table[1], dtype=float))]
        return d

    @classmethod
    def from_dict(cls, d):
        """Build from a JSON-style dict; raises ConfigError naming bad fields."""
        known = {
            "freq_range", "level_range", "sigma_p", "grid_size", "stop_std",
            "max_trials", "hyper_bounds", "hp", "mean", "weight_table",
            "optimize_hypers",
        }
        kwargs = {}
        bad = []
        for key, value in d.items():
            if key not in known:
                continue
            try:
                if key in ("freq_range", "level_range"):
                    kwargs[key] = tuple(float(v) for v in value)
                elif key in ("grid_size", "max_trials"):
                    kwargs[key] = int(value)
                elif key in ("sigma_p", "stop_std"):
                    kwargs[key] = float(value)
                elif key == "hyper_bounds":
                    kwargs[key] = HyperBounds(**{k: float(v) for k, v in value.items()})
                elif key == "hp":
                    kwargs[key] = KernelHyperparams(**{k: float(v) for k, v in value.items()})
                elif key == "mean":
                    kwargs[key] = LinearMeanParams(**{k: float(v) for k, v in value.items()})
                elif key == "weight_table":
                    kwargs[key] = (np.asarray(value[0], dtype=float),
                                   np.asarray(value[1], dtype=float))
                elif key == "optimize_hypers":
                    kwargs[key] = bool(value)
            except (TypeError, ValueError, KeyError):
                bad.append(key)
        if bad:
            raise ConfigError(f"invalid config fields: {', '.join(bad)}", fields=bad)
        return cls(**kwargs).validate()


@dataclass(frozen=True)
class ThresholdEstimate:
    """Sampled posterior curve: per-frequency mean and standard deviation."""

    frequencies_hz: np.ndarray
    means_dbhl: np.ndarray
    stds_dbhl: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies_hz, dtype=float)
        if np.any(np.diff(f) <= 0):
            raise ValueError("estimate frequencies must be strictly increasing")
        if np.any(np.asarray(self.stds_dbhl) < 0):
            raise ValueError("stds must be nonnegative")


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"


class Session:
    """One listener's adaptive test. Mutating calls must be serialized by the
    owner; reads of a quiescent session are safe from any thread."""

    def __init__(self, config, session_id=None):
        config.validate()
        self.id = session_id if session_id is not None else "local"
        self.config = config
        self.mean = config.resolved_mean()
        self.current_hp = config.hp
        self.grid = StimulusGrid.from_freq_range(
            config.freq_range[0], config.freq_range[1], config.grid_size,
            config.level_range[0], config.level_range[1],
            weight_table=config.weight_table,
        )
        self.history = []
        self.state = fit_posterior(TrialSet.empty(), self.current_hp, self.mean,
                                   config.sigma_p)
        self.status = STATUS_ACTIVE
        self.pending = None
        self.events = []
        self.mean_bald_history = [mean_bald(self.state, self.grid)]
        self._log("created", {"config": config.to_dict()})

    # -- queries ---------------------------------------------------------

    @property
    def n_trials(self):
        return len(self.history)

    def max_grid_std(self):
        _, var = predict_curve(self.state, self.grid.xs)
        return float(np.sqrt(np.max(var)))

    def threshold_estimate(self, n_points=64):
        """Posterior curve at ``n_points`` uniform-in-Bark frequencies."""
        if n_points < 2:
            raise ValueError("need at least 2 points")
        xs = np.linspace(hz_to_bark(self.config.freq_range[0]),
                         hz_to_bark(self.config.freq_range[1]), n_points)
        mu, var = predict_curve(self.state, xs)
        return ThresholdEstimate(frequencies_hz=bark_to_hz(xs), means_dbhl=mu,
                                 stds_dbhl=np.sqrt(var))

    # -- the active-learning loop ----------------------------------------

    def propose_trial(self):
        """Next most informative stimulus; cached until a response arrives."""
        self._require_active()
        if self.pending is None:
            x_star, h_star = select_next_stimulus(self.state, self.grid)
            freq = float(np.clip(bark_to_hz(x_star), *self.config.freq_range))
            self.pending = Stimulus(frequency_hz=freq, level_dbhl=h_star)
            self._log("proposed", {"frequency_hz": freq, "level_dbhl": h_star})
        return self.pending

    def record_response(self, stimulus, label):
        """Record a response (proposed or operator-chosen stimulus), refit,
        re-select hyperparameters, and apply the stopping rule."""
        self._require_active()
        bad = []
        if not (self.config.freq_range[0] <= stimulus.frequency_hz <= self.config.freq_range[1]):
            bad.append("frequency_hz")
        if not (self.config.level_range[0] <= stimulus.level_dbhl <= self.config.level_range[1]):
            bad.append("level_dbhl")
        if label not in (-1, 1):
            bad.append("label")
        if bad:
            raise ConfigError(f"invalid response fields: {', '.join(bad)}", fields=bad)

        self.history.append(Trial(stimulus.frequency_hz, stimulus.level_dbhl, int(label)))
        trials = TrialSet.from_trials(self.history)
        self.state = fit_posterior(trials, self.current_hp, self.mean, self.config.sigma_p)
        if self.config.optimize_hypers and len(self.history) >= MIN_TRIALS_FOR_OPT:
            new_hp = optimize_hyperparams(trials, self.config.hyper_bounds, self.mean,
                                          self.config.sigma_p, self.current_hp)
            if new_hp != self.current_hp:
                self.current_hp = new_hp
                self.state = fit_posterior(trials, self.current_hp, self.mean,
                                           self.config.sigma_p)
        self.pending = None
        self.mean_bald_history.append(mean_bald(self.state, self.grid))

        max_std = self.max_grid_std()
        self._log("recorded", {"frequency_hz": stimulus.frequency_hz,
                               "level_dbhl": stimulus.level_dbhl,
                               "label": int(label)}, max_std=max_std)
        if max_std <= self.config.stop_std:
            self.status = STATUS_CONVERGED
        elif len(self.history) >= self.config.max_trials:
            self.status = STATUS_MAX_TRIALS
        if self.status != STATUS_ACTIVE:
            self._log("stopped", {"reason": self.status}, max_std=max_std)
        return self

    # -- internals ---------------------------------------------------------

    def _require_active(self):
        if self.status != STATUS_ACTIVE:
            raise SessionStateError(f"session is {self.status}")

    def _log(self, event, payload, max_std=None):
        self.events.append({
            "event": event,
            "timestamp": _now(),
            "payload": payload,
            "max_std": self.max_grid_std() if max_std is None else max_std,
        })


def replay_history(config, trials, session_id=None):
    """Rebuild a session by replaying recorded trials in order."""
    session = Session(config, session_id=session_id)
    for t in trials:
        session.record_response(Stimulus(t.frequency_hz, t.level_dbhl), t.label)
    return session


def replay_events(events, session_id=None):
    """Rebuild a session from its event log (created/proposed/recorded/...).

    Timestamps are ignored; determinism of record_response makes the rebuilt
    session's estimates identical to the original's.
    """
    if not events or events[0]["event"] != "created":
        raise ValueError("event log must start with a 'created' event")
    config = SessionConfig.from_dict(events[0]["payload"]["config"])
    session = Session(config, session_id=session_id)
    for ev in events[1:]:
        if ev["event"] == "recorded":
            p = ev["payload"]
            session.record_response(Stimulus(p["frequency_hz"], p["level_dbhl"]),
                                    p["label"])
    if events[-1]["event"] == "proposed" and session.status == STATUS_ACTIVE:
        session.propose_trial()
    return session
