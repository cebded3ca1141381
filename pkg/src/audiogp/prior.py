"""GP prior over the warped-domain threshold curve.

Squared-exponential kernel in Bark, a linear mean function in Bark, and
construction of that mean by least-squares regression on a reference
audiogram table. Inference runs on residuals (threshold minus mean line);
the mean is added back at prediction time.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.linalg import cholesky

from .errors import FactorizationError
from .warp import hz_to_bark

__all__ = [
    "KernelHyperparams",
    "LinearMeanParams",
    "AudiogramTable",
    "kernel_eval",
    "kernel_matrix",
    "mean_eval",
    "fit_linear_prior",
    "load_audiogram_table",
    "standard_audiograms",
    "average_standard_audiogram",
    "flat_audiogram",
    "default_mean_params",
]

# Jitter schedule for Gram factorization: relative to signal variance,
# escalating tenfold on failure.
JITTER_START = 1e-8
JITTER_MAX = 1e-2

DEFAULT_SIGNAL_STD = 20.0  # dB HL
DEFAULT_LENGTH_SCALE = 4.0  # Bark


@dataclass(frozen=True)
class KernelHyperparams:
    """Squared-exponential kernel parameters (dB HL amplitude, Bark length)."""

    signal_std: float = DEFAULT_SIGNAL_STD
    length_scale: float = DEFAULT_LENGTH_SCALE

    def __post_init__(self):
        for name in ("signal_std", "length_scale"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite")


@dataclass(frozen=True)
class LinearMeanParams:
    """Linear mean in Bark: threshold = slope * bark + intercept."""

    slope: float
    intercept: float

    def __post_init__(self):
        if not (np.isfinite(self.slope) and np.isfinite(self.intercept)):
            raise ValueError("mean parameters must be finite")


class AudiogramTable:
    """Ordered (frequency Hz, threshold dB HL) pairs, strictly increasing in Hz."""

    def __init__(self, frequencies_hz, thresholds_dbhl):
        f = np.asarray(frequencies_hz, dtype=float)
        t = np.asarray(thresholds_dbhl, dtype=float)
        if f.ndim != 1 or f.shape != t.shape:
            raise ValueError("frequencies and thresholds must be equal-length 1-D")
        if f.size < 2:
            raise ValueError("audiogram table needs at least 2 points")
        if np.any(f <= 0) or not np.all(np.isfinite(f)) or not np.all(np.isfinite(t)):
            raise ValueError("audiogram entries must be finite, frequencies positive")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        self.frequencies_hz = f
        self.thresholds_dbhl = t

    def __len__(self):
        return self.frequencies_hz.size

    @classmethod
    def from_csv(cls, path):
        """Read a delimited table with header ``frequency_hz,threshold_dbhl``."""
        rows = np.genfromtxt(path, delimiter=",", names=True, comments="#")
        try:
            return cls(np.atleast_1d(rows["frequency_hz"]),
                       np.atleast_1d(rows["threshold_dbhl"]))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad audiogram table {path}: {exc}") from exc


def kernel_eval(x1, x2, hp):
    """Squared-exponential covariance between Bark inputs (vectorized)."""
    if not isinstance(hp, KernelHyperparams):
        hp = KernelHyperparams(*hp)
    d = (np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)) / hp.length_scale
    out = hp.signal_std**2 * np.exp(-0.5 * d * d)
    return float(out) if out.ndim == 0 else out


def kernel_matrix(xs, hp, return_cholesky=False):
    """Gram matrix at Bark inputs with just enough diagonal jitter to factorize.

    The jitter starts at JITTER_START * signal_std**2 and escalates tenfold
    until Cholesky succeeds; beyond JITTER_MAX * signal_std**2 a
    FactorizationError is raised.
    """
    x = np.asarray(xs, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("xs must be a nonempty 1-D array of Bark values")
    gram = kernel_eval(x[:, None], x[None, :], hp)
    gram = 0.5 * (gram + gram.T)
    var = hp.signal_std**2
    jitter = JITTER_START * var
    eye = np.eye(x.size)
    while jitter <= JITTER_MAX * var * (1 + 1e-12):
        try:
            jittered = gram + jitter * eye
            chol = cholesky(jittered, lower=True)
            return (jittered, chol) if return_cholesky else jittered
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FactorizationError(
        f"kernel matrix not factorizable at jitter {JITTER_MAX * var:g}"
    )


def mean_eval(x, mean):
    """Evaluate the linear mean at Bark input(s)."""
    out = mean.slope * np.asarray(x, dtype=float) + mean.intercept
    return float(out) if out.ndim == 0 else out


def fit_linear_prior(table):
    """Least-squares line through (bark(frequency), threshold) pairs.

    Row order does not matter; at least 2 distinct frequencies required
    (guaranteed by the table invariant).
    """
    x = hz_to_bark(table.frequencies_hz)
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, table.thresholds_dbhl, rcond=None)
    return LinearMeanParams(slope=float(coef[0]), intercept=float(coef[1]))


def load_audiogram_table(path):
    """Load a user-supplied audiogram table file."""
    return AudiogramTable.from_csv(path)


def standard_audiograms():
    """The bundled set of standard reference audiograms, keyed by name.

    Shipped as ingested data (``data/standard_audiograms.csv``); see the
    file header for provenance and schema.
    """
    ref = resources.files("audiogp.data").joinpath("standard_audiograms.csv")
    with ref.open("r") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    assert header[:2] == ["name", "frequency_hz"]
    by_name: dict[str, list[tuple[float, float]]] = {}
    for ln in lines[1:]:
        name, f, t = ln.split(",")
        by_name.setdefault(name, []).append((float(f), float(t)))
    out = {}
    for name, pairs in by_name.items():
        pairs.sort()
        out[name] = AudiogramTable([p[0] for p in pairs], [p[1] for p in pairs])
    return out


def average_standard_audiogram():
    """Pointwise average of the bundled standard audiograms."""
    tables = standard_audiograms()
    freqs = None
    stacked = []
    for table in tables.values():
        if freqs is None:
            freqs = table.frequencies_hz
        elif not np.array_equal(freqs, table.frequencies_hz):
            raise ValueError("standard audiograms share one frequency grid")
        stacked.append(table.thresholds_dbhl)
    return AudiogramTable(freqs, np.mean(stacked, axis=0))


def flat_audiogram(level_dbhl=20.0, freq_lo_hz=250.0, freq_hi_hz=8000.0):
    """Synthetic fallback: a flat audiogram at ``level_dbhl``. Test fixture,
    not clinical data."""
    return AudiogramTable([freq_lo_hz, freq_hi_hz], [level_dbhl, level_dbhl])


def default_mean_params():
    """Default linear prior: regression on the average standard audiogram."""
    return fit_linear_prior(average_standard_audiogram())
