import numpy as np
import pytest

from audiogp import bark_to_hz, hz_to_bark


def test_reference_point_600hz():
    # asinh(1) = ln(1 + sqrt(2)) analytically
    expected = 6.0 * np.log(1.0 + np.sqrt(2.0))
    assert hz_to_bark(600.0) == pytest.approx(expected, rel=1e-12)
    assert bark_to_hz(expected) == pytest.approx(600.0, rel=1e-12)


def test_monotone_ordering():
    assert hz_to_bark(250.0) < hz_to_bark(1000.0) < hz_to_bark(8000.0)


def test_strict_monotonicity_on_grid():
    f = np.linspace(20.0, 20000.0, 1000)
    assert np.all(np.diff(hz_to_bark(f)) > 0)


def test_roundtrip_identity():
    f = np.linspace(20.0, 20000.0, 1000)
    back = bark_to_hz(hz_to_bark(f))
    assert np.max(np.abs(back - f) / f) <= 1e-9
    for f0 in (250.0, 1000.0, 8000.0):
        assert bark_to_hz(hz_to_bark(f0)) == pytest.approx(f0, rel=1e-9)


def test_zero_is_fixed_point_of_inverse():
    assert bark_to_hz(0.0) == 0.0


def test_domain_errors():
    for bad in (0.0, -10.0, np.nan, np.inf):
        with pytest.raises(ValueError):
            hz_to_bark(bad)
    with pytest.raises(ValueError):
        bark_to_hz(np.nan)
