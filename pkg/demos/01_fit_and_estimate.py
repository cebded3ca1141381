#!/usr/bin/env python3
"""Fit a threshold curve from a handful of recorded trials.

Builds a small trial set by hand, fits the Laplace posterior under a
linear-in-Bark prior, and prints the estimated curve with its
uncertainty band. Also exports the series in the audiogram CSV format.
"""

import os

import numpy as np

import audiogp as a


def main():
    # six trials a clinician might have recorded: (frequency Hz, level dB HL, label)
    trials = [
        (250.0, 15.0, +1),
        (500.0, 10.0, -1),
        (1000.0, 25.0, +1),
        (2000.0, 20.0, -1),
        (4000.0, 45.0, +1),
        (8000.0, 50.0, -1),
    ]
    hp = a.KernelHyperparams(signal_std=20.0, length_scale=4.0)
    mean = a.default_mean_params()
    print(f"prior line: {mean.slope:.2f} dB/Bark * bark(f) + {mean.intercept:.2f} dB")

    state = a.fit_posterior(a.TrialSet.from_trials(trials), hp, mean, sigma_p=2.0)
    print(f"mode search: converged={state.converged} in {state.newton_iters} steps")

    freqs = np.geomspace(250, 8000, 13)
    xs = a.hz_to_bark(freqs)
    mu, var = a.predict_curve(state, xs)
    sd = np.sqrt(var)

    print("\n  freq_hz   estimate    band (+/- 1 sd)")
    for f, m, s in zip(freqs, mu, sd):
        print(f"  {f:7.0f}   {m:6.1f} dB   [{m - s:6.1f}, {m + s:6.1f}]")

    est = a.ThresholdEstimate(freqs, mu, sd)
    os.makedirs("output", exist_ok=True)
    a.write_estimate_csv(est, "output/fitted_estimate.csv")
    print("\nwrote output/fitted_estimate.csv")


if __name__ == "__main__":
    main()
