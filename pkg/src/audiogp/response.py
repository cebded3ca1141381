"""Probit response model for binary audibility labels.

A listener compares the presented level against an internal threshold
corrupted by zero-mean Gaussian perceptual noise with standard deviation
``sigma_p`` (dB HL), which induces

    P(y | h, g) = Phi(y * (h - g) / sigma_p),   y in {+1, -1},

where ``h`` is the stimulus level and ``g`` the latent threshold. The
log-likelihood and its first/second derivatives w.r.t. ``g`` feed the
Laplace mode search. Everything is computed through log Phi
(``scipy.special.log_ndtr``) and the log-Mills ratio exp(log phi - log Phi),
which stays finite for |z| well beyond 30.
"""

import numpy as np
from scipy.special import log_ndtr

__all__ = [
    "response_probability",
    "log_likelihood",
    "log_likelihood_grad",
    "log_likelihood_hess_diag",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _check_sigma(sigma_p):
    if not np.isfinite(sigma_p) or sigma_p <= 0.0:
        raise ValueError("sigma_p must be positive and finite")


def _check_labels(labels):
    y = np.asarray(labels, dtype=float)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    return y


def _zscores(labels, levels, latents, sigma_p):
    _check_sigma(sigma_p)
    y = _check_labels(labels)
    h = np.asarray(levels, dtype=float)
    g = np.asarray(latents, dtype=float)
    if not (y.shape == h.shape == g.shape):
        raise ValueError("labels, levels and latents must have equal length")
    return y, y * (h - g) / sigma_p


def _mills_ratio(z):
    # phi(z) / Phi(z); log form is stable for arbitrarily negative z
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI - log_ndtr(z))


def response_probability(label, level, latent_threshold, sigma_p):
    """P(label | level, latent_threshold) under the probit model.

    Vectorized over any argument; P(+1) + P(-1) = 1 by CDF symmetry.
    """
    y, h, g = np.broadcast_arrays(
        np.asarray(label, dtype=float),
        np.asarray(level, dtype=float),
        np.asarray(latent_threshold, dtype=float),
    )
    _, z = _zscores(y, h, g, sigma_p)
    p = np.exp(log_ndtr(z))
    return float(p) if p.ndim == 0 else p


def log_likelihood(labels, levels, latents, sigma_p):
    """Sum over trials of ln Phi(y_i * (h_i - g_i) / sigma_p). Always <= 0."""
    _, z = _zscores(labels, levels, latents, sigma_p)
    return float(np.sum(log_ndtr(z)))


def log_likelihood_grad(labels, levels, latents, sigma_p):
    """Elementwise d/dg of the log-likelihood: -(y / sigma_p) * phi(z)/Phi(z)."""
    y, z = _zscores(labels, levels, latents, sigma_p)
    return -(y / sigma_p) * _mills_ratio(z)


def log_likelihood_hess_diag(labels, levels, latents, sigma_p):
    """Diagonal of d^2/dg^2 of the log-likelihood; entries are always <= 0.

    With r = phi(z)/Phi(z): d2/dg2 ln Phi(z) = -(z*r + r^2) / sigma_p^2.
    Concavity of the probit log-likelihood gives z*r + r^2 = r*(z + r) >= 0.
    """
    _, z = _zscores(labels, levels, latents, sigma_p)
    r = _mills_ratio(z)
    return -(z * r + r * r) / (sigma_p * sigma_p)
