"""Command-line entry points: batch simulation, offline fitting of recorded
trial logs, and single-shot stimulus proposal.

Exit codes: 0 success, 1 runtime/data error, 2 usage error. All commands
are pure functions of their flags, input files and seed; simulate output
files carry no timestamps, so reruns with the same seed are byte-identical.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

from .acquisition import load_weight_table
from .errors import ConfigError
from .hyperopt import HyperBounds
from .prior import AudiogramTable, KernelHyperparams, LinearMeanParams
from .session import SessionConfig, Trial, replay_history
from .simulate import (SimulatedListener, TrueThreshold, run_experiment,
                       write_estimate_csv, write_trace_csv)

__all__ = ["main"]


def _add_config_flags(p):
    p.add_argument("--sigma-p", type=float, default=2.0, help="perceptual noise std, dB HL")
    p.add_argument("--freq-min", type=float, default=250.0)
    p.add_argument("--freq-max", type=float, default=8000.0)
    p.add_argument("--level-min", type=float, default=-10.0)
    p.add_argument("--level-max", type=float, default=110.0)
    p.add_argument("--grid-points", type=int, default=256)
    p.add_argument("--stop-std", type=float, default=1.0)
    p.add_argument("--max-trials", type=int, default=21)
    p.add_argument("--signal-std", type=float, default=None, help="kernel amplitude, dB HL")
    p.add_argument("--length-scale", type=float, default=None, help="kernel length, Bark")
    p.add_argument("--slope", type=float, default=None, help="prior mean slope, dB/Bark")
    p.add_argument("--intercept", type=float, default=None, help="prior mean intercept, dB HL")
    p.add_argument("--weights", type=Path, default=None, help="frequency_hz,weight table")
    p.add_argument("--freeze-hypers", action="store_true",
                   help="skip per-trial hyperparameter re-optimization")


def _config_from_args(args):
    kwargs = dict(
        freq_range=(args.freq_min, args.freq_max),
        level_range=(args.level_min, args.level_max),
        sigma_p=args.sigma_p,
        grid_size=args.grid_points,
        stop_std=args.stop_std,
        max_trials=args.max_trials,
        optimize_hypers=not args.freeze_hypers,
        hyper_bounds=HyperBounds(),
    )
    if args.signal_std is not None or args.length_scale is not None:
        kwargs["hp"] = KernelHyperparams(
            signal_std=args.signal_std if args.signal_std is not None else 20.0,
            length_scale=args.length_scale if args.length_scale is not None else 4.0,
        )
    if args.slope is not None or args.intercept is not None:
        kwargs["mean"] = LinearMeanParams(
            slope=args.slope if args.slope is not None else 0.0,
            intercept=args.intercept if args.intercept is not None else 0.0,
        )
    if args.weights is not None:
        kwargs["weight_table"] = load_weight_table(args.weights)
    return SessionConfig(**kwargs).validate()


def _read_trials(path, max_trials_hint=None):
    """Parse a frequency_hz,level_dbhl,label log; bad rows name their line."""
    trials = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 and line.lower().startswith("frequency_hz"):
                continue
            parts = line.split(",")
            try:
                if len(parts) != 3:
                    raise ValueError("expected 3 comma-separated fields")
                freq, level, label = float(parts[0]), float(parts[1]), int(float(parts[2]))
                trials.append(Trial(freq, level, label))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return trials


def _session_from_trial_file(args):
    """Replay a recorded log offline. The stopping rule is disarmed (it does
    not influence the fit), so every row is ingested and a follow-up
    proposal stays possible."""
    trials = _read_trials(args.trials)
    config = dataclasses.replace(_config_from_args(args),
                                 max_trials=len(trials) + 1, stop_std=1e-9)
    return replay_history(config, trials)


def cmd_simulate(args):
    truth = TrueThreshold(AudiogramTable.from_csv(args.truth))
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snapshot_steps = tuple(int(s) for s in args.snapshot_steps.split(",") if s != "")
    for k in range(args.seeds):
        seed = args.seed + k
        listener = SimulatedListener(truth, args.sigma_p, seed)
        trace = run_experiment(listener, config, eval_grid_size=args.eval_points,
                               snapshot_steps=snapshot_steps)
        write_trace_csv(trace, out / f"trace_seed{seed}.csv")
        for step, estimate in sorted(trace.snapshots.items()):
            write_estimate_csv(estimate, out / f"estimate_step{step}_seed{seed}.csv")
    return 0


def cmd_fit(args):
    session = _session_from_trial_file(args)
    write_estimate_csv(session.threshold_estimate(args.points), args.out)
    return 0


def cmd_propose(args):
    session = _session_from_trial_file(args)
    stim = session.propose_trial()
    print(f"{stim.frequency_hz!r} {stim.level_dbhl!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="audiogp",
                                     description="Adaptive pure-tone threshold estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run seeded experiments on a synthetic listener")
    p_sim.add_argument("--truth", type=Path, required=True,
                       help="frequency_hz,threshold_dbhl anchor table")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p_sim.add_argument("--out", type=Path, required=True)
    p_sim.add_argument("--eval-points", type=int, default=64)
    p_sim.add_argument("--snapshot-steps", type=str, default="0,7,14,21")
    _add_config_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a recorded trial log and export the estimate")
    p_fit.add_argument("--trials", type=Path, required=True)
    p_fit.add_argument("--out", type=Path, required=True)
    p_fit.add_argument("--points", type=int, default=64)
    _add_config_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_prop = sub.add_parser("propose", help="print the next stimulus for a trial log")
    p_prop.add_argument("--trials", type=Path, required=True)
    _add_config_flags(p_prop)
    p_prop.set_defaults(func=cmd_propose)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
