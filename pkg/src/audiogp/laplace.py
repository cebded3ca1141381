"""Laplace approximation of the threshold posterior and its predictions.

The latent threshold curve gets a GP prior (see :mod:`audiogp.prior`); the
probit likelihood (see :mod:`audiogp.response`) makes the exact posterior
intractable, so the posterior over the latent values at the trial inputs is
approximated by a Gaussian centered at the mode with covariance equal to
the negative inverse Hessian there.

The mode search is a damped Newton iteration written in the
B = I + W^(1/2) K W^(1/2) parameterization, which never inverts K or W and
is therefore safe for zero curvature entries and for near-duplicate inputs.
The iteration maintains the pair (g, a) with g = K a exactly, so the
objective

    Psi(g) = log_likelihood(y, h, m + g) - 0.5 * g^T K^{-1} g  (+ const)

and its gradient are available without further solves. Inference runs on
residuals g (prior mean subtracted); the mean is added back in prediction.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, cho_solve, solve_triangular
from scipy.special import log_ndtr

from .errors import ConvergenceError
from .prior import KernelHyperparams, LinearMeanParams, kernel_eval, kernel_matrix, mean_eval
from .response import log_likelihood, log_likelihood_grad, log_likelihood_hess_diag
from .warp import hz_to_bark

__all__ = [
    "TrialSet",
    "PosteriorState",
    "PredictiveGaussian",
    "fit_posterior",
    "predict_latent",
    "predict_curve",
    "predict_response",
    "latent_covariance",
    "laplace_evidence",
]

GRAD_TOL = 1e-8
PSI_TOL = 1e-12
MAX_NEWTON_ITERS = 100
MAX_HALVINGS = 20


@dataclass(frozen=True)
class TrialSet:
    """Trial data in model coordinates: Bark inputs, levels, +/-1 labels."""

    xs: np.ndarray
    hs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.atleast_1d(np.asarray(self.xs, dtype=float))
        hs = np.atleast_1d(np.asarray(self.hs, dtype=float))
        ys = np.atleast_1d(np.asarray(self.ys, dtype=float))
        if not (xs.shape == hs.shape == ys.shape) or xs.ndim != 1:
            raise ValueError("xs, hs, ys must be equal-length 1-D arrays")
        if xs.size and not np.all(np.isin(ys, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if xs.size and not (np.all(np.isfinite(xs)) and np.all(np.isfinite(hs))):
            raise ValueError("inputs and levels must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "hs", hs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.xs.size

    @classmethod
    def empty(cls):
        return cls(np.empty(0), np.empty(0), np.empty(0))

    @classmethod
    def from_trials(cls, trials):
        """Build from an iterable of (frequency_hz, level_dbhl, label) triples
        or objects with those attributes."""
        fs, hs, ys = [], [], []
        for t in trials:
            if hasattr(t, "frequency_hz"):
                fs.append(t.frequency_hz)
                hs.append(t.level_dbhl)
                ys.append(t.label)
            else:
                f, h, y = t
                fs.append(f)
                hs.append(h)
                ys.append(y)
        if not fs:
            return cls.empty()
        return cls(hz_to_bark(np.asarray(fs, dtype=float)), hs, ys)


@dataclass(frozen=True)
class PredictiveGaussian:
    """Latent threshold posterior at one query point: mean and variance."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma2)) or self.sigma2 < 0:
            raise ValueError("predictive moments must be finite with sigma2 >= 0")


@dataclass(frozen=True)
class PosteriorState:
    """Fitted Laplace posterior. Immutable; safe to share between readers.

    ``g_hat`` is the posterior mode in residual space (prior mean removed),
    ``alpha`` the likelihood gradient at the mode (used for the predictive
    mean), ``w_diag`` the negative likelihood curvature, and ``chol_b`` the
    lower Cholesky factor of B = I + W^(1/2) K W^(1/2).
    """

    trials: TrialSet
    hp: KernelHyperparams
    mean: LinearMeanParams
    sigma_p: float
    g_hat: np.ndarray = field(default_factory=lambda: np.empty(0))
    a_vec: np.ndarray = field(default_factory=lambda: np.empty(0))
    alpha: np.ndarray = field(default_factory=lambda: np.empty(0))
    w_diag: np.ndarray = field(default_factory=lambda: np.empty(0))
    kmat: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    chol_b: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    converged: bool = True
    newton_iters: int = 0
    psi_path: tuple = ()  # objective at every accepted step, non-decreasing

    def __post_init__(self):
        if self.g_hat.shape != (len(self.trials),):
            raise ValueError("g_hat length must match trial count")
        if self.w_diag.size and np.any(self.w_diag < 0):
            raise ValueError("w_diag entries must be nonnegative")


def _psi(trials, mean_at_xs, sigma_p, g, a):
    # Psi up to the g-independent constant -0.5 log|K| - (N/2) log 2 pi
    return log_likelihood(trials.ys, trials.hs, mean_at_xs + g, sigma_p) - 0.5 * float(g @ a)


def fit_posterior(trials, hp, mean, sigma_p):
    """Fit the Laplace posterior for a trial set (may be empty).

    Damped Newton iteration from g = 0: full steps are halved (up to
    MAX_HALVINGS times) whenever they would decrease Psi, so Psi is
    non-decreasing along accepted steps. Raises ConvergenceError carrying
    the last iterate if MAX_NEWTON_ITERS is exhausted.
    """
    if not isinstance(trials, TrialSet):
        trials = TrialSet.from_trials(trials)
    if not np.isfinite(sigma_p) or sigma_p <= 0:
        raise ValueError("sigma_p must be positive and finite")
    n = len(trials)
    if n == 0:
        return PosteriorState(trials=trials, hp=hp, mean=mean, sigma_p=sigma_p)

    kmat = kernel_matrix(trials.xs, hp)
    m_xs = mean_eval(trials.xs, mean)
    g = np.zeros(n)
    a = np.zeros(n)
    psi = _psi(trials, m_xs, sigma_p, g, a)
    psi_path = [psi]
    eye = np.eye(n)
    chol_b = eye
    w = np.zeros(n)
    converged = False
    iters = 0

    while iters < MAX_NEWTON_ITERS:
        grad_ll = log_likelihood_grad(trials.ys, trials.hs, m_xs + g, sigma_p)
        grad_psi = grad_ll - a
        if np.max(np.abs(grad_psi)) <= GRAD_TOL:
            converged = True
            break
        iters += 1
        w = np.clip(-log_likelihood_hess_diag(trials.ys, trials.hs, m_xs + g, sigma_p), 0.0, None)
        sw = np.sqrt(w)
        bmat = eye + sw[:, None] * kmat * sw[None, :]
        chol_b = cholesky(bmat, lower=True)
        b = w * g + grad_ll
        a_new = b - sw * cho_solve((chol_b, True), sw * (kmat @ b))
        g_new = kmat @ a_new

        step = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            g_try = g + step * (g_new - g)
            a_try = a + step * (a_new - a)
            psi_try = _psi(trials, m_xs, sigma_p, g_try, a_try)
            if psi_try >= psi:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # cannot improve Psi at float resolution
        delta = psi_try - psi
        g, a, psi = g_try, a_try, psi_try
        psi_path.append(psi)
        if abs(delta) <= PSI_TOL:
            break

    grad_ll = log_likelihood_grad(trials.ys, trials.hs, m_xs + g, sigma_p)
    if not converged:
        converged = bool(np.max(np.abs(grad_ll - a)) <= GRAD_TOL)
    if not converged and iters >= MAX_NEWTON_ITERS:
        raise ConvergenceError(
            f"Newton mode search did not converge in {MAX_NEWTON_ITERS} iterations",
            last_iterate=g, iterations=iters,
        )

    # refresh curvature quantities at the final mode
    w = np.clip(-log_likelihood_hess_diag(trials.ys, trials.hs, m_xs + g, sigma_p), 0.0, None)
    sw = np.sqrt(w)
    chol_b = cholesky(eye + sw[:, None] * kmat * sw[None, :], lower=True)
    return PosteriorState(
        trials=trials, hp=hp, mean=mean, sigma_p=sigma_p,
        g_hat=g, a_vec=a, alpha=grad_ll, w_diag=w, kmat=kmat, chol_b=chol_b,
        converged=converged, newton_iters=iters, psi_path=tuple(psi_path),
    )


def predict_curve(state, x_query):
    """Posterior mean and variance of the latent threshold at Bark inputs.

    Returns (mu, var) arrays. With no data this is exactly the prior:
    mu = m(x), var = signal_std**2. The variance is computed in the
    W^(1/2) parameterization, so it never exceeds the prior variance.
    """
    xq = np.atleast_1d(np.asarray(x_query, dtype=float))
    mu = mean_eval(xq, state.mean)
    prior_var = state.hp.signal_std**2
    if len(state.trials) == 0:
        return mu, np.full(xq.shape, prior_var)
    ks = kernel_eval(xq[:, None], state.trials.xs[None, :], state.hp)
    mu = mu + ks @ state.alpha
    sw = np.sqrt(state.w_diag)
    v = solve_triangular(state.chol_b, sw[:, None] * ks.T, lower=True)
    var = np.clip(prior_var - np.sum(v * v, axis=0), 0.0, None)
    return mu, var


def predict_latent(state, x_star):
    """Latent threshold posterior at one Bark input, as a PredictiveGaussian."""
    mu, var = predict_curve(state, float(x_star))
    return PredictiveGaussian(mu=float(mu[0]), sigma2=float(var[0]))


def predict_response(state, x_star, h_star, label):
    """Probability of ``label`` at stimulus (x_star Bark, h_star dB HL).

    The latent threshold is integrated out analytically:
    Phi(label * (h_star - mu) / sqrt(sigma_p^2 + sigma^2)).
    """
    if label not in (-1, 1):
        raise ValueError("label must be +1 or -1")
    pg = predict_latent(state, x_star)
    z = label * (h_star - pg.mu) / np.hypot(state.sigma_p, np.sqrt(pg.sigma2))
    return float(np.exp(log_ndtr(z)))


def latent_covariance(state):
    """Full Laplace covariance (K^{-1} + W)^{-1} at the trial inputs."""
    if len(state.trials) == 0:
        return np.empty((0, 0))
    sw = np.sqrt(state.w_diag)
    v = solve_triangular(state.chol_b, sw[:, None] * state.kmat, lower=True)
    cov = state.kmat - v.T @ v
    return 0.5 * (cov + cov.T)


def laplace_evidence(state):
    """Laplace approximation of the log marginal likelihood.

    log q(y) = loglik(g_hat) - 0.5 g_hat^T K^{-1} g_hat - 0.5 log|B|,
    with g_hat^T K^{-1} g_hat = g_hat . a_vec exactly (g = K a is maintained
    by the Newton iteration) and log|B| from the Cholesky factor.
    """
    trials = state.trials
    if len(trials) == 0:
        return 0.0
    m_xs = mean_eval(trials.xs, state.mean)
    fit = log_likelihood(trials.ys, trials.hs, m_xs + state.g_hat, state.sigma_p)
    logdet_b = 2.0 * float(np.sum(np.log(np.diag(state.chol_b))))
    return fit - 0.5 * float(state.g_hat @ state.a_vec) - 0.5 * logdet_b
