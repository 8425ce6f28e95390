"""Command-line surface: ``simulate``, ``timing`` and ``selftest``.

Report paths write the delimited output first and render a matching
figure next to it (same stem, ``.png``).
"""

import argparse
import sys
from pathlib import Path

from .campaign import CampaignConfig, format_campaign_csv, run_campaign
from .construction import DEFAULT_BASE, build_code, load_code
from .quantize import get_profile, load_profile
from .timing import (
    ArchConfig,
    format_timing_csv,
    format_trace_csv,
    simulate_schedule,
    timing_rows,
)

__all__ = ["main"]


def _add_code_args(p, z1_default, z2_default):
    p.add_argument("--code-file", type=Path, default=None,
                   help="code-description file; omit to build the default "
                        "rate-0.0494 base with --z1/--z2/--code-seed")
    p.add_argument("--z1", type=int, default=z1_default,
                   help=f"first lifting factor (default {z1_default})")
    p.add_argument("--z2", type=int, default=z2_default,
                   help=f"second lifting factor (default {z2_default})")
    p.add_argument("--code-seed", type=int, default=1,
                   help="seed for the lifted-structure draw (default 1)")


def _resolve_code(args):
    if args.code_file is not None:
        return load_code(args.code_file)
    return build_code(DEFAULT_BASE, args.z1, args.z2, seed=args.code_seed)


def _resolve_quant(name):
    if name == "float":
        return None, "float"
    if name in ("S1", "S2", "S3", "wide"):
        return get_profile(name), name
    profile = load_profile(name)
    return profile, profile.name


def _cmd_simulate(args):
    code = _resolve_code(args)
    quant, label = _resolve_quant(args.quant)
    config = CampaignConfig(
        ebn0_db=[float(v) for v in args.ebn0_list.split(",")],
        iterations=args.iters,
        max_frames=args.max_frames,
        target_frame_errors=args.target_frame_errors,
        seed=args.seed,
        quant=quant,
        quant_label=label,
        codewords=args.codewords,
        batch_size=args.batch_size,
        workers=args.workers,
    )
    results = run_campaign(code, config, csv_path=args.out)
    sys.stdout.write(format_campaign_csv(code, config, results))
    if args.out is not None and results:
        from .plots import ber_fer_figure
        fig_path = Path(args.out).with_suffix(".png")
        ber_fer_figure(results, code.N - code.M, fig_path, label=label)
        print(f"wrote {args.out} and {fig_path}", file=sys.stderr)
    return 0


def _cmd_timing(args):
    code = _resolve_code(args)
    archs = [
        ArchConfig(n_sub=int(v), clock_hz=args.fc, iterations=args.iters,
                   ram_delay=args.tdelta)
        for v in args.nh.split(",")
    ]
    rows = timing_rows(code, archs)
    text = format_timing_csv(rows)
    sys.stdout.write(text)
    if args.out is not None:
        Path(args.out).write_text(text)
        from .plots import timing_figure
        fig_path = Path(args.out).with_suffix(".png")
        timing_figure(rows, fig_path)
        print(f"wrote {args.out} and {fig_path}", file=sys.stderr)
    if args.trace is not None:
        report = simulate_schedule(code, archs[0], layer=0)
        Path(args.trace).write_text(format_trace_csv(report))
        from .plots import schedule_figure
        fig_path = Path(args.trace).with_suffix(".png")
        schedule_figure(report, fig_path)
        print(f"wrote {args.trace} and {fig_path}", file=sys.stderr)
    return 0


def _cmd_selftest(args):
    from .selftest import run_selftest
    return 1 if run_selftest() else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pldpch",
        description="Layered-decoder model for LDPC-Hadamard codes: "
                    "Monte Carlo simulation and hardware timing analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo BER/FER sweep over an AWGN channel")
    _add_code_args(p, z1_default=4, z2_default=16)
    p.add_argument("--nh", type=int, default=None,
                   help="sub-decoder count (metadata only; does not change results)")
    p.add_argument("--iters", type=int, default=20, help="decoding iterations")
    p.add_argument("--ebn0-list", type=str, default="-1,0,1,2",
                   help="comma-separated Eb/N0 points in dB")
    p.add_argument("--max-frames", type=int, default=1000)
    p.add_argument("--target-frame-errors", type=int, default=100,
                   help="stop a point after this many frame errors (0 = never)")
    p.add_argument("--seed", type=int, default=0, help="master seed for noise/data")
    p.add_argument("--quant", type=str, default="float",
                   help="float, S1, S2, S3, wide, or a profile JSON path")
    p.add_argument("--codewords", choices=("auto", "random", "zero"), default="auto",
                   help="transmit random codewords or the all-zero codeword")
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--workers", type=int, default=1,
                   help="worker processes (results are identical for any count)")
    p.add_argument("--out", type=Path, default=None,
                   help="CSV output path; a .png figure is written alongside")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("timing", help="latency/throughput report and schedule traces")
    _add_code_args(p, z1_default=32, z2_default=512)
    p.add_argument("--nh", type=str, default="128",
                   help="comma-separated sub-decoder counts (default 128)")
    p.add_argument("--fc", type=float, default=130e6, help="clock frequency in Hz")
    p.add_argument("--iters", type=int, default=20, help="decoding iterations")
    p.add_argument("--tdelta", type=int, default=2,
                   help="fixed RAM operation delay in cycles per layer")
    p.add_argument("--trace", type=Path, default=None,
                   help="write a per-cycle schedule trace CSV (+ .png) for the "
                        "first --nh entry")
    p.add_argument("--out", type=Path, default=None,
                   help="CSV output path; a .png figure is written alongside")
    p.set_defaults(func=_cmd_timing)

    p = sub.add_parser("selftest", help="run the built-in oracle suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
