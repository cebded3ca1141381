"""Shared oracles and fixtures.

The oracles here deliberately avoid the library's own inference paths:
posterior modes come from dense grid search, integrals from adaptive
quadrature, and derivatives from central finite differences.
"""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import multivariate_normal, norm

import audiogp as a


def grid_mode(logpost_batch, lo, hi, resolution, pts=21):
    """Argmax of a log-density by iterative dense grid refinement.

    ``logpost_batch`` maps an (M, n) array of points to M log-density
    values. Each pass lays a dense grid per dimension over [lo, hi],
    then zooms into two cells around the best point until the grid
    spacing is at or below ``resolution`` in every dimension.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    n = lo.size
    while True:
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = np.stack([m.ravel() for m in mesh], axis=1)
        best = flat[np.argmax(logpost_batch(flat))]
        spacing = (hi - lo) / (pts - 1)
        if np.all(spacing <= resolution):
            return best
        lo = np.maximum(lo, best - 2 * spacing)
        hi = np.minimum(hi, best + 2 * spacing)


def make_logpost(trials, hp, mean, sigma_p):
    """Batch unnormalized log posterior over residual latent vectors."""
    from audiogp.prior import kernel_matrix, mean_eval
    from scipy.special import log_ndtr

    kmat = kernel_matrix(trials.xs, hp)
    prior = multivariate_normal(mean=np.zeros(len(trials)), cov=kmat)
    m_xs = mean_eval(trials.xs, mean)

    def logpost(points):
        pts = np.atleast_2d(points)
        z = trials.ys[None, :] * (trials.hs[None, :] - m_xs[None, :] - pts) / sigma_p
        return np.sum(log_ndtr(z), axis=1) + prior.logpdf(pts)

    return logpost


def gauss_quad(fn, mu, sd, halfwidth=14.0, pad=0.0, **kw):
    """Adaptive quadrature of fn(g) * N(g | mu, sd^2) over a wide window.

    The 1e-12 tolerance keeps the oracle four orders of magnitude below
    the tightest bound asserted against it (1e-8).
    """
    sd = max(sd, 1e-12)
    lo, hi = mu - halfwidth * sd - pad, mu + halfwidth * sd + pad
    val, _ = quad(lambda g: fn(g) * norm.pdf(g, mu, sd), lo, hi,
                  epsabs=1e-12, epsrel=1e-12, limit=300, **kw)
    return val


@pytest.fixture
def flat_truth():
    return a.TrueThreshold.flat(20.0)


@pytest.fixture
def sloped_truth():
    return a.TrueThreshold(a.AudiogramTable(
        [250, 500, 1000, 2000, 4000, 8000], [15, 20, 25, 35, 50, 60]))
