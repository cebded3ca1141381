"""Kernel hyperparameter selection by approximate evidence maximization.

After each trial the squared-exponential hyperparameters are re-selected
by maximizing the Laplace log marginal likelihood over a bounded box:
a coarse log-spaced grid, then derivative-free (Nelder-Mead) refinement in
log-parameter space from the best cell. The incumbent hyperparameters are
always in the candidate set, so the result never has lower evidence than
the starting point.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, FactorizationError
from .laplace import fit_posterior, laplace_evidence
from .prior import KernelHyperparams

__all__ = ["HyperBounds", "log_marginal_likelihood", "optimize_hyperparams",
           "MIN_TRIALS_FOR_OPT"]

GRID_POINTS = 8
MIN_TRIALS_FOR_OPT = 4  # evidence surface is degenerate for tiny N


@dataclass(frozen=True)
class HyperBounds:
    """Search box; lo == hi pins a parameter to a single value."""

    signal_std_lo: float = 5.0
    signal_std_hi: float = 60.0
    length_scale_lo: float = 0.5
    length_scale_hi: float = 12.0

    def __post_init__(self):
        for lo, hi, name in (
            (self.signal_std_lo, self.signal_std_hi, "signal_std"),
            (self.length_scale_lo, self.length_scale_hi, "length_scale"),
        ):
            if not (np.isfinite(lo) and np.isfinite(hi) and 0 < lo <= hi):
                raise ValueError(f"{name} bounds must satisfy 0 < lo <= hi")

    def clip(self, hp):
        return KernelHyperparams(
            signal_std=float(np.clip(hp.signal_std, self.signal_std_lo, self.signal_std_hi)),
            length_scale=float(np.clip(hp.length_scale, self.length_scale_lo, self.length_scale_hi)),
        )

    def contains(self, hp):
        return (self.signal_std_lo <= hp.signal_std <= self.signal_std_hi
                and self.length_scale_lo <= hp.length_scale <= self.length_scale_hi)


def log_marginal_likelihood(trials, hp, mean, sigma_p):
    """Laplace evidence of a nonempty trial set under the given prior."""
    if len(trials) == 0:
        raise ValueError("log marginal likelihood needs at least one trial")
    return laplace_evidence(fit_posterior(trials, hp, mean, sigma_p))


def _try_lml(trials, hp, mean, sigma_p):
    try:
        return log_marginal_likelihood(trials, hp, mean, sigma_p)
    except (ConvergenceError, FactorizationError, np.linalg.LinAlgError):
        return None


def optimize_hyperparams(trials, bounds, mean, sigma_p, current_hp):
    """Pick hyperparameters in ``bounds`` maximizing the Laplace evidence.

    Deterministic. Ties are broken toward the smallest length scale, then
    the smallest signal std. If every candidate fit fails (including the
    incumbent), warns and returns ``current_hp`` unchanged.
    """
    if len(trials) == 0:
        raise ValueError("optimize_hyperparams needs at least one trial")

    # (lml, length_scale, signal_std, hp) for every successful evaluation
    evaluated = []

    def consider(hp):
        lml = _try_lml(trials, hp, mean, sigma_p)
        if lml is not None:
            evaluated.append((lml, hp.length_scale, hp.signal_std, hp))
        return lml

    if bounds.contains(current_hp):
        consider(current_hp)
    ss_grid = np.geomspace(bounds.signal_std_lo, bounds.signal_std_hi, GRID_POINTS)
    ls_grid = np.geomspace(bounds.length_scale_lo, bounds.length_scale_hi, GRID_POINTS)
    for ss in ss_grid:
        for ls in ls_grid:
            consider(KernelHyperparams(signal_std=float(ss), length_scale=float(ls)))

    if not evaluated:
        warnings.warn("all hyperparameter candidates failed to fit; keeping current",
                      RuntimeWarning)
        return current_hp

    best = max(evaluated, key=lambda rec: (rec[0], -rec[1], -rec[2]))

    def neg_lml_log(theta):
        hp = bounds.clip(KernelHyperparams(signal_std=float(np.exp(theta[0])),
                                           length_scale=float(np.exp(theta[1]))))
        lml = _try_lml(trials, hp, mean, sigma_p)
        return np.inf if lml is None else -lml

    x0 = np.log([best[3].signal_std, best[3].length_scale])
    log_bounds = [(np.log(bounds.signal_std_lo), np.log(bounds.signal_std_hi)),
                  (np.log(bounds.length_scale_lo), np.log(bounds.length_scale_hi))]
    res = minimize(neg_lml_log, x0, method="Nelder-Mead", bounds=log_bounds,
                   options={"maxiter": 60, "xatol": 1e-3, "fatol": 1e-9})
    refined = bounds.clip(KernelHyperparams(signal_std=float(np.exp(res.x[0])),
                                            length_scale=float(np.exp(res.x[1]))))
    consider(refined)

    best = max(evaluated, key=lambda rec: (rec[0], -rec[1], -rec[2]))
    return best[3]
