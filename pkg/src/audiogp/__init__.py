"""Adaptive pure-tone threshold estimation.

The hearing-threshold curve is modelled as a Gaussian process over
Bark-warped frequency; binary audible/not-audible responses enter through
a probit likelihood, the posterior is approximated by Laplace's method,
and each next stimulus is chosen by a BALD information criterion. The
package ships a session engine for live or simulated listeners, an HTTP
service, and a small CLI.
"""

from .acquisition import (StimulusGrid, bald_constant, bald_score,
                          bald_term2_exact_integral, binary_entropy_bits,
                          load_weight_table, mean_bald, select_next_stimulus)
from .errors import (ConfigError, ConvergenceError, FactorizationError,
                     SessionStateError)
from .hyperopt import HyperBounds, log_marginal_likelihood, optimize_hyperparams
from .laplace import (PosteriorState, PredictiveGaussian, TrialSet, fit_posterior,
                      laplace_evidence, latent_covariance, predict_curve,
                      predict_latent, predict_response)
from .prior import (AudiogramTable, KernelHyperparams, LinearMeanParams,
                    average_standard_audiogram, default_mean_params,
                    fit_linear_prior, flat_audiogram, kernel_eval, kernel_matrix,
                    load_audiogram_table, mean_eval, standard_audiograms)
from .response import (log_likelihood, log_likelihood_grad,
                       log_likelihood_hess_diag, response_probability)
from .session import (Session, SessionConfig, Stimulus, ThresholdEstimate, Trial,
                      replay_events, replay_history)
from .simulate import (ExperimentTrace, SimulatedListener, TrueThreshold, rmse,
                       run_experiment, write_estimate_csv, write_trace_csv)
from .warp import bark_to_hz, hz_to_bark

__version__ = "0.1.0"
