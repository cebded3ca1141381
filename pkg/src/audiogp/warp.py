"""Frequency warping between Hz and the Bark scale.

All model code (kernel, inference, acquisition) operates on Bark values;
Hz appears only at user-facing boundaries. Keeping the warp at module
boundaries prevents double-warping bugs.
"""

import numpy as np

__all__ = ["hz_to_bark", "bark_to_hz"]


def hz_to_bark(freq_hz):
    """Map frequency in Hz to Bark: 6 * asinh(f / 600).

    Accepts scalars or arrays. Frequencies must be positive and finite;
    the map is strictly increasing.
    """
    f = np.asarray(freq_hz, dtype=float)
    if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
        raise ValueError("frequency must be positive and finite (Hz)")
    out = 6.0 * np.arcsinh(f / 600.0)
    return float(out) if np.isscalar(freq_hz) or out.ndim == 0 else out


def bark_to_hz(bark):
    """Exact inverse of :func:`hz_to_bark`: 600 * sinh(x / 6)."""
    x = np.asarray(bark, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("bark value must be finite")
    out = 600.0 * np.sinh(x / 6.0)
    return float(out) if np.isscalar(bark) or out.ndim == 0 else out
