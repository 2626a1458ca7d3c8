"""Command-line front end.

Subcommands wrap one analysis each: `boundary` sweeps the two-user MSE
curve to CSV, `convexity-scan` certifies random instances, `wsmse`
enumerates stationary points of the weighted problem, `segment` and
`region` probe membership, and `counterexample` replays the reference
three-user instance end to end.

Exit codes: 0 success or no witness, 2 input error, 3 nonconvexity
witness (and `counterexample` uses 1 when any reference check fails).
Every JSON output embeds a manifest with the command, inputs, resolved
seed, tolerances, assumed noise variance, and tool version; outputs are
byte-identical across reruns and across --threads settings.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .boundary import boundary_sweep, colinearity_classify, convexity_certificate
from .io import (
    json_text,
    load_channels,
    manifest,
    write_boundary_csv,
    write_json,
    write_region_csv,
)
from .kkt import counterexample_suite, enumerate_stationary_points
from .model import ChannelSet, SystemConfig
from .region import sample_region, segment_test

__all__ = ["main"]

_SEED_ENV = "MSEREGION_SEED"


def _parse_complex_list(text: str) -> np.ndarray:
    """Comma-separated scalars in "re+imi" form, e.g. "1+2i,0,3-1i"."""
    values = []
    for token in text.split(","):
        cleaned = token.strip().replace("i", "j")
        if not cleaned:
            raise ValueError(f"empty entry in complex list {text!r}")
        try:
            values.append(complex(cleaned))
        except ValueError as err:
            raise ValueError(f"cannot parse {token.strip()!r} as a complex scalar") from err
    return np.array(values, dtype=np.complex128)


def _parse_float_list(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")], dtype=np.float64)
    except ValueError as err:
        raise ValueError(f"cannot parse {text!r} as a comma-separated float list") from err


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(_SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as err:
            raise ValueError(f"{_SEED_ENV} must be an integer, got {env!r}") from err
    return 0


def _load_instance(args) -> ChannelSet:
    return load_channels(args.channels)


def _config(args) -> SystemConfig:
    return SystemConfig(noise_variance=args.sigma2, power_budget=args.power)


def _emit(args, payload) -> None:
    if args.out:
        write_json(args.out, payload)
    else:
        sys.stdout.write(json_text(payload))


def _plot_script(csv_path: str, eps_min1: float, eps_min2: float) -> str:
    lines = [
        "# gnuplot script: two-user MSE boundary (eps_2 against eps_1)",
        'set datafile separator ","',
        'set xlabel "eps_1"',
        'set ylabel "eps_2"',
        "set grid",
        "set key top right",
        'plot "{}" every ::1 using 2:3 with lines lw 2 title "boundary", \\'.format(csv_path),
        '     "-" using 1:2 with points pt 7 ps 1.5 title "single-user minima"',
        f"{eps_min1!r} 1.0",
        f"1.0 {eps_min2!r}",
        "e",
        "",
    ]
    return "\n".join(lines)


def cmd_boundary(args) -> int:
    if args.channels is not None:
        channels = _load_instance(args)
        if channels.n_users != 2:
            raise ValueError(f"boundary needs exactly 2 users, got {channels.n_users}")
        h1, h2 = channels.user_channel(0), channels.user_channel(1)
    else:
        if args.h1 is None or args.h2 is None:
            raise ValueError("provide either --channels or both --h1 and --h2")
        h1, h2 = _parse_complex_list(args.h1), _parse_complex_list(args.h2)
    config = _config(args)
    classification = colinearity_classify(h1, h2)
    samples = boundary_sweep(h1, h2, config, samples=args.samples)
    write_boundary_csv(args.out, samples)
    gamma = config.snr
    eps_min1 = 1.0 / (1.0 + gamma * float(np.vdot(h1, h1).real))
    eps_min2 = 1.0 / (1.0 + gamma * float(np.vdot(h2, h2).real))
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as handle:
            handle.write(_plot_script(args.out, eps_min1, eps_min2))
    print(
        f"classification: {classification.value}  samples: {len(samples)}  "
        f"eps_min: ({eps_min1:.6g}, {eps_min2:.6g})",
        file=sys.stderr,
    )
    return 0


def cmd_convexity_scan(args) -> int:
    if args.trials < 1:
        raise ValueError(f"trials must be >= 1, got {args.trials}")
    config = _config(args)
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    reports = []
    all_certified = True
    worst = -float("inf")
    worst_trial = 0
    for trial in range(args.trials):
        shape = (args.dim, 2)
        mat = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if args.colinear:
            alpha = complex(rng.standard_normal() + 1j * rng.standard_normal())
            mat[:, 1] = alpha * mat[:, 0]
        report = convexity_certificate(mat[:, 0], mat[:, 1], config, grid=args.grid)
        all_certified = all_certified and report.certified
        if report.worst_discriminant > worst:
            worst = report.worst_discriminant
            worst_trial = trial
        reports.append(report.to_dict())
    payload = {
        "manifest": manifest(
            "convexity-scan",
            {
                "trials": args.trials,
                "dim": args.dim,
                "grid": args.grid,
                "colinear": bool(args.colinear),
                "power": config.power_budget,
                "sigma2": config.noise_variance,
            },
            seed,
            config,
        ),
        "all_certified": all_certified,
        "worst_discriminant": worst,
        "worst_trial": worst_trial,
        "trials": reports,
    }
    _emit(args, payload)
    return 0 if all_certified else 3


def cmd_counterexample(args) -> int:
    if (args.region_csv is None) != (args.grid is None):
        raise ValueError("--region-csv and --grid must be given together")
    seed = _resolve_seed(args)
    report = counterexample_suite(starts=args.starts, seed=seed, threads=args.threads)
    config = SystemConfig(noise_variance=report.sigma2_assumed, power_budget=10.0)
    if args.region_csv is not None:
        from .kkt import REFERENCE_CHANNELS

        samples = sample_region(REFERENCE_CHANNELS, config, args.grid, mode="grid")
        write_region_csv(args.region_csv, samples)
        write_json(
            args.region_csv + ".manifest.json",
            manifest("counterexample", {"region_csv": args.region_csv, "grid": args.grid}, seed, config),
        )
    segment = report.segment
    payload = {
        "manifest": manifest(
            "counterexample", {"starts": args.starts, "region_csv": args.region_csv, "grid": args.grid},
            seed, config,
        ),
        "sigma2_assumed": report.sigma2_assumed,
        "all_passed": report.all_passed,
        "checks": report.checks,
        "clusters": report.clusters,
        "segment": None if segment is None else {
            "endpoint_margins": [segment.endpoint_a.margin, segment.endpoint_b.margin],
            "points": [
                {"t": pt.t, "target": pt.target, "margin": pt.margin, "dominated": pt.dominated}
                for pt in segment.points
            ],
            "nonconvex_witness": segment.nonconvex_witness,
        },
    }
    _emit(args, payload)
    return 0 if report.all_passed else 1


def cmd_wsmse(args) -> int:
    channels = _load_instance(args)
    weights = _parse_float_list(args.weights)
    if weights.size != channels.n_users:
        raise ValueError(f"{weights.size} weights for {channels.n_users} users")
    config = _config(args)
    seed = _resolve_seed(args)
    clusters = enumerate_stationary_points(
        channels, config, weights, starts=args.starts, seed=seed, threads=args.threads,
    )
    payload = {
        "manifest": manifest(
            "wsmse",
            {
                "channels": args.channels,
                "weights": weights,
                "power": config.power_budget,
                "sigma2": config.noise_variance,
                "starts": args.starts,
            },
            seed,
            config,
        ),
        "cluster_count": len(clusters),
        "clusters": clusters,
    }
    _emit(args, payload)
    return 0


def cmd_segment(args) -> int:
    channels = _load_instance(args)
    vec_a = _parse_float_list(args.a)
    vec_b = _parse_float_list(args.b)
    if vec_a.size != channels.n_users or vec_b.size != channels.n_users:
        raise ValueError(
            f"endpoints must list {channels.n_users} MSE values, "
            f"got {vec_a.size} and {vec_b.size}"
        )
    config = _config(args)
    report = segment_test(channels, config, vec_a, vec_b, steps=args.steps)
    payload = {
        "manifest": manifest(
            "segment",
            {
                "channels": args.channels,
                "a": vec_a,
                "b": vec_b,
                "steps": args.steps,
                "power": config.power_budget,
                "sigma2": config.noise_variance,
            },
            _resolve_seed(args),
            config,
        ),
        "endpoint_margins": [report.endpoint_a.margin, report.endpoint_b.margin],
        "points": [
            {"t": pt.t, "target": pt.target, "margin": pt.margin, "dominated": pt.dominated}
            for pt in report.points
        ],
        "nonconvex_witness": report.nonconvex_witness,
    }
    _emit(args, payload)
    return 3 if report.nonconvex_witness else 0


def cmd_region(args) -> int:
    channels = _load_instance(args)
    config = _config(args)
    seed = _resolve_seed(args)
    if args.grid is not None:
        samples = sample_region(channels, config, args.grid, mode="grid")
        inputs = {"channels": args.channels, "mode": "grid", "resolution": args.grid,
                  "power": config.power_budget, "sigma2": config.noise_variance}
    else:
        samples = sample_region(channels, config, args.random, mode="random", seed=seed)
        inputs = {"channels": args.channels, "mode": "random", "count": args.random,
                  "power": config.power_budget, "sigma2": config.noise_variance}
    write_region_csv(args.out, samples)
    write_json(args.out + ".manifest.json", manifest("region", inputs, seed, config))
    print(f"wrote {samples.powers.shape[0]} rows to {args.out}", file=sys.stderr)
    return 0


def _add_common(parser, seed: bool = True) -> None:
    parser.add_argument("--power", type=float, default=10.0,
                        help="sum power budget (default 10)")
    parser.add_argument("--sigma2", type=float, default=1.0,
                        help="noise variance (default 1)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap for parallel sections; never changes output bytes")
    if seed:
        parser.add_argument("--seed", type=int, default=None,
                            help=f"RNG seed (default: ${_SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mseregion",
        description="Achievable MSE region analysis for MMSE reception under a sum power budget",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundary", help="sweep the two-user boundary to CSV")
    p.add_argument("--channels", help="channel JSON file with exactly 2 users")
    p.add_argument("--h1", help="inline channel of user 1, e.g. '1+0i,0+1i'")
    p.add_argument("--h2", help="inline channel of user 2")
    p.add_argument("--samples", type=int, default=101, help="sweep points (default 101)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--plot", help="also write a gnuplot script here")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("convexity-scan", help="certify random two-user instances")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dim", type=int, default=4, help="antenna count (default 4)")
    p.add_argument("--grid", type=int, default=101, help="certificate grid (default 101)")
    p.add_argument("--colinear", action="store_true",
                   help="force h2 = alpha * h1 in every trial")
    p.add_argument("--out", help="output JSON path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_convexity_scan)

    p = sub.add_parser("counterexample", help="replay the three-user reference instance")
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.add_argument("--region-csv", help="also sample the region to this CSV")
    p.add_argument("--grid", type=int, help="grid resolution for --region-csv")
    _add_common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("wsmse", help="minimize a weighted sum of MSEs")
    p.add_argument("--channels", required=True, help="channel JSON file")
    p.add_argument("--weights", required=True, help="comma-separated weights")
    p.add_argument("--starts", type=int, default=16)
    p.add_argument("--out", help="output JSON path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_wsmse)

    p = sub.add_parser("segment", help="membership along a segment of MSE tuples")
    p.add_argument("--channels", required=True, help="channel JSON file")
    p.add_argument("--a", required=True, help="comma-separated MSE tuple")
    p.add_argument("--b", required=True, help="comma-separated MSE tuple")
    p.add_argument("--steps", type=int, default=9)
    p.add_argument("--out", help="output JSON path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("region", help="sample achievable MSE tuples to CSV")
    p.add_argument("--channels", required=True, help="channel JSON file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--grid", type=int, help="simplex lattice resolution")
    group.add_argument("--random", type=int, help="number of uniform draws")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_region)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
