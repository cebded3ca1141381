"""BALD stimulus selection.

The next trial is the stimulus maximizing the mutual information between
the response and the latent threshold curve. With the probit response
model and a Gaussian latent posterior (mu_x, sigma_x^2) this is

    score(x, h) = h2( Phi((h - mu_x) / sqrt(sigma_p^2 + sigma_x^2)) )
                  - C / sqrt(sigma_x^2 + C^2)
                    * exp( -(h - mu_x)^2 / (2 (sigma_x^2 + C^2)) )

with C = sigma_p * sqrt(pi ln2 / 2) and h2 the binary entropy in bits
(so the first term is exactly 1 at h = mu_x). For fixed x the score is
maximized at h = mu_x, and with frequency-independent noise the argmax
over x at that level coincides with the largest posterior variance, which
select_next_stimulus cross-checks. A nonuniform weight profile (e.g. to
de-emphasize border frequencies) changes the frequency choice only.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import entr, ndtr

from .laplace import predict_curve
from .warp import hz_to_bark

__all__ = [
    "bald_constant",
    "binary_entropy_bits",
    "bald_score",
    "bald_term2_exact_integral",
    "StimulusGrid",
    "select_next_stimulus",
    "mean_bald",
    "load_weight_table",
]

_LN2 = np.log(2.0)


def bald_constant(sigma_p):
    """C = sigma_p * sqrt(pi * ln 2 / 2)."""
    if not np.isfinite(sigma_p) or sigma_p <= 0:
        raise ValueError("sigma_p must be positive and finite")
    return sigma_p * np.sqrt(np.pi * _LN2 / 2.0)


def binary_entropy_bits(p):
    """Binary entropy in bits; 0 at p in {0, 1}."""
    p = np.asarray(p, dtype=float)
    out = (entr(p) + entr(1.0 - p)) / _LN2
    return float(out) if out.ndim == 0 else out


def bald_score(mu_x, sigma_x2, h, sigma_p):
    """Information (bits) in the response to a stimulus at level ``h``.

    ``mu_x``/``sigma_x2`` are the latent posterior moments at the candidate
    frequency. Vectorized; sigma_x2 must be >= 0.
    """
    sigma_x2 = np.asarray(sigma_x2, dtype=float)
    if np.any(sigma_x2 < 0):
        raise ValueError("sigma_x2 must be nonnegative")
    mu_x = np.asarray(mu_x, dtype=float)
    h = np.asarray(h, dtype=float)
    total_sd = np.sqrt(sigma_p**2 + sigma_x2)
    term1 = binary_entropy_bits(ndtr((h - mu_x) / total_sd))
    term2 = bald_term2_exact_integral(mu_x, sigma_x2, h, sigma_p)
    out = term1 - term2
    return float(out) if np.ndim(out) == 0 else out


def bald_term2_exact_integral(mu_x, sigma_x2, h, sigma_p):
    """Expected conditional response entropy, squared-exponential surrogate.

    Closed form of the Gaussian convolution
    integral exp(-(h - g)^2 / (2 C^2)) N(g | mu_x, sigma_x2) dg
      = C / sqrt(sigma_x2 + C^2) * exp(-(h - mu_x)^2 / (2 (sigma_x2 + C^2))).
    """
    sigma_x2 = np.asarray(sigma_x2, dtype=float)
    if np.any(sigma_x2 < 0):
        raise ValueError("sigma_x2 must be nonnegative")
    c = bald_constant(sigma_p)
    s2 = sigma_x2 + c * c
    out = c / np.sqrt(s2) * np.exp(-((np.asarray(h, dtype=float) - mu_x) ** 2) / (2.0 * s2))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class StimulusGrid:
    """Candidate frequencies (Bark, strictly increasing), presentable level
    range, and optional nonnegative per-candidate weights."""

    xs: np.ndarray
    level_lo: float
    level_hi: float
    weights: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim != 1 or xs.size == 0:
            raise ValueError("grid needs at least one candidate")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("candidates must be strictly increasing")
        if not self.level_lo < self.level_hi:
            raise ValueError("level_lo must be below level_hi")
        object.__setattr__(self, "xs", xs)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != xs.shape or np.any(w < 0) or not np.any(w > 0):
                raise ValueError("weights must match candidates, be >= 0, not all 0")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_freq_range(cls, freq_lo_hz, freq_hi_hz, n_candidates, level_lo,
                        level_hi, weight_table=None):
        """Uniform-in-Bark candidates over an Hz range; optional weights from
        a (frequency_hz, weight) table, interpolated piecewise-linearly in
        Bark and clamped at the table ends."""
        if n_candidates < 2:
            raise ValueError("need at least 2 candidates")
        xs = np.linspace(hz_to_bark(freq_lo_hz), hz_to_bark(freq_hi_hz), n_candidates)
        weights = None
        if weight_table is not None:
            wf, wv = weight_table
            weights = np.interp(xs, hz_to_bark(np.asarray(wf, dtype=float)), wv)
        return cls(xs=xs, level_lo=float(level_lo), level_hi=float(level_hi),
                   weights=weights)


def select_next_stimulus(state, grid):
    """Most informative next stimulus on the grid: (x Bark, level dB HL).

    Evaluates the posterior at every candidate, scores BALD at the
    per-candidate optimum level h = mu_x, applies weights, and takes the
    argmax (ties -> lowest frequency). The level is clamped to the
    presentable range. With uniform weights the choice is cross-checked
    against the max-posterior-variance selector, which it provably equals.
    """
    mu, var = predict_curve(state, grid.xs)
    scores = bald_score(mu, var, mu, state.sigma_p)
    weighted = scores if grid.weights is None else grid.weights * scores
    idx = int(np.argmax(weighted))
    if grid.weights is None:
        idx_var = int(np.argmax(var))
        assert np.isclose(scores[idx_var], scores[idx], rtol=0, atol=1e-12), \
            "BALD argmax diverged from max-variance selector under uniform weights"
    h_star = float(np.clip(mu[idx], grid.level_lo, grid.level_hi))
    return float(grid.xs[idx]), h_star


def mean_bald(state, grid):
    """Average per-candidate BALD score at the optimum level (unweighted)."""
    mu, var = predict_curve(state, grid.xs)
    return float(np.mean(bald_score(mu, var, mu, state.sigma_p)))


def load_weight_table(path):
    """Read a ``frequency_hz,weight`` file; returns (freqs, weights) arrays."""
    rows = np.genfromtxt(path, delimiter=",", names=True, comments="#")
    try:
        freqs = np.atleast_1d(np.asarray(rows["frequency_hz"], dtype=float))
        weights = np.atleast_1d(np.asarray(rows["weight"], dtype=float))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad weight table {path}: {exc}") from exc
    if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
        raise ValueError("weight table frequencies must be positive, increasing")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise ValueError("weights must be >= 0 and not all 0")
    return freqs, weights
