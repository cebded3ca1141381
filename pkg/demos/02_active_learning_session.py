#!/usr/bin/env python3
"""Full adaptive session against a simulated listener.

A ground-truth curve with a high-frequency loss responds through seeded
Gaussian perceptual noise; the session proposes each next tone by the
BALD criterion, refits after every answer, and re-optimizes the kernel
hyperparameters. Prints the per-trial trace and renders the audiogram
(level axis inverted, band = one standard deviation) at a few stages.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import audiogp as a


def plot_snapshot(ax, estimate, history, truth, title):
    f, m, s = estimate.frequencies_hz, estimate.means_dbhl, estimate.stds_dbhl
    ax.fill_between(f, m - s, m + s, alpha=0.25, label="+/- 1 sd")
    ax.plot(f, m, label="estimate")
    ax.plot(f, [truth(v) for v in f], "k--", lw=1, label="truth")
    heard = [(t.frequency_hz, t.level_dbhl) for t in history if t.label == 1]
    missed = [(t.frequency_hz, t.level_dbhl) for t in history if t.label == -1]
    if heard:
        ax.scatter(*zip(*heard), marker="+", c="tab:green", label="audible")
    if missed:
        ax.scatter(*zip(*missed), marker="x", c="tab:red", label="not audible")
    ax.set_xscale("log")
    ax.invert_yaxis()  # audiogram convention: loss plotted downward
    ax.set_title(title)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("hearing level (dB HL)")


def main():
    truth = a.TrueThreshold(a.AudiogramTable(
        [250, 500, 1000, 2000, 4000, 8000], [15, 20, 25, 35, 50, 60]))
    config = a.SessionConfig(sigma_p=2.0, max_trials=21, stop_std=1.0,
                             mean=a.LinearMeanParams(2.0, 15.0))
    listener = a.SimulatedListener(truth, sigma_p=2.0, seed=7)

    session = a.Session(config)
    snapshots = {0: session.threshold_estimate(64)}
    histories = {0: []}
    print("trial   freq_hz  level_db  label   max_std   mean_bald")
    while session.status == "active":
        stim = session.propose_trial()
        label = listener.respond(stim)
        session.record_response(stim, label)
        print(f"{session.n_trials:5d}  {stim.frequency_hz:8.0f}  {stim.level_dbhl:8.1f}"
              f"  {label:+5d}  {session.max_grid_std():8.2f}"
              f"  {session.mean_bald_history[-1]:9.3f}")
        if session.n_trials in (7, 14, 21):
            snapshots[session.n_trials] = session.threshold_estimate(64)
            histories[session.n_trials] = list(session.history)
    print(f"\nfinal status: {session.status} "
          f"(hp: std={session.current_hp.signal_std:.1f} dB, "
          f"len={session.current_hp.length_scale:.1f} Bark)")

    os.makedirs("output", exist_ok=True)
    fig, axes = plt.subplots(2, 2, figsize=(11, 8))
    for ax, (step, est) in zip(axes.ravel(), sorted(snapshots.items())):
        plot_snapshot(ax, est, histories[step], truth, f"after {step} trials")
    axes[0, 0].legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig("output/session_snapshots.png", dpi=120)
    print("wrote output/session_snapshots.png")

    fig2, ax2 = plt.subplots(figsize=(6, 3.5))
    ax2.plot(range(len(session.mean_bald_history)), session.mean_bald_history, "o-")
    ax2.set_xlabel("trial")
    ax2.set_ylabel("mean BALD score (bits)")
    ax2.set_title("selection objective over the session")
    fig2.tight_layout()
    fig2.savefig("output/mean_bald.png", dpi=120)
    print("wrote output/mean_bald.png")


if __name__ == "__main__":
    main()
