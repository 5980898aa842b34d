"""Command-line front end: ``bench``, ``run`` and ``gen``.

Exit status: 0 on success, 1 on usage errors, 2 on I/O or parse errors.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

from . import bench
from .detection import ParseError, load_signatures
from .engine import Engine, EngineConfig, Mode
from .hashing import HashConfig, Strategy
from .pcap import PcapError, read_pcap, write_pcap
from .table import DEFAULT_TABLE_SIZE
from .traffic import PROFILES, TrafficProfile, gen_traffic, gen_tuples

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _power_of_two(text: str) -> int:
    n = int(text)
    if n < 2 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"{text} is not a power of two >= 2")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return n


def _add_profile_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--profile", choices=PROFILES, required=required)
    p.add_argument("--connections", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-packets", type=int, default=1, help="data packets per connection, lower bound")
    p.add_argument("--max-packets", type=int, default=4, help="data packets per connection, upper bound")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="streamguard", description="TCP reassembly IDS/IPS engine and hash benchmark")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="compare hash strategies on a traffic profile")
    b.add_argument("--table-size", type=_power_of_two, default=1024)
    b.add_argument("--strategy", choices=[s.value for s in Strategy] + ["both"], default="both")
    _add_profile_args(b, required=True)
    b.add_argument("--key-seed", type=int, default=None)
    b.add_argument("--out", type=Path)

    r = sub.add_parser("run", help="replay traffic through the engine")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--pcap", type=Path)
    src.add_argument("--profile", choices=PROFILES)
    r.add_argument("--connections", type=int, default=1024)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--min-packets", type=int, default=1)
    r.add_argument("--max-packets", type=int, default=4)
    r.add_argument("--rules", type=Path, required=True)
    r.add_argument("--mode", choices=[m.value for m in Mode], default="ids")
    r.add_argument("--table-size", type=_power_of_two, default=DEFAULT_TABLE_SIZE)
    r.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.CRYPTO_KEYED.value)
    r.add_argument("--key-seed", type=int, default=None)
    r.add_argument("--timeout-secs", type=_positive, default=1800)
    r.add_argument("--strict-syn", action=argparse.BooleanOptionalAction, default=True)
    r.add_argument("--timing", action="store_true", help="add packets/second (non-deterministic)")
    r.add_argument("--out", type=Path)

    g = sub.add_parser("gen", help="write a synthetic profile to a pcap file")
    _add_profile_args(g, required=True)
    g.add_argument("--out", type=Path, required=True)
    return parser


def _profile(args) -> TrafficProfile:
    try:
        return TrafficProfile(args.profile, args.connections, args.seed, (args.min_packets, args.max_packets))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(report: dict, out: Path | None) -> None:
    text = bench.dumps(report)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_bench(args) -> int:
    profile = _profile(args)
    strategies = list(Strategy) if args.strategy == "both" else [Strategy(args.strategy)]
    key_seed = args.key_seed if args.key_seed is not None else secrets.randbits(64)
    report = bench.hash_bench(
        gen_tuples(profile), args.table_size, key_seed, strategies, seed=args.seed, profile=profile.name
    )
    _emit(report.as_dict(), args.out)
    return EXIT_OK


def _cmd_run(args) -> int:
    signatures = load_signatures(args.rules.read_text(encoding="utf-8"))
    hash_cfg = HashConfig.create(args.table_size, args.strategy, args.key_seed)
    config = EngineConfig(
        signatures=signatures,
        mode=Mode(args.mode),
        hash=hash_cfg,
        timeout=args.timeout_secs * 1_000_000,
        strict_syn=args.strict_syn,
    )
    if args.pcap is not None:
        frames = read_pcap(args.pcap)
        source = {"pcap": str(args.pcap)}
    else:
        profile = _profile(args)
        frames = gen_traffic(profile)
        source = {"profile": profile.name, "connections": profile.count, "seed": profile.seed}

    body = bench.replay(Engine(config), frames, timing=args.timing)
    report = {
        "schema_version": bench.SCHEMA_VERSION,
        "kind": "run",
        "parameters": {
            "source": source,
            "rules": len(signatures),
            "mode": config.mode.value,
            "N": hash_cfg.table_size,
            "strategy": hash_cfg.strategy.value,
            "key_seed": hash_cfg.key_seed,
            "key": hash_cfg.key.hex(),
            "timeout_secs": args.timeout_secs,
            "strict_syn": args.strict_syn,
        },
        **body,
    }
    _emit(report, args.out)
    return EXIT_OK


def _cmd_gen(args) -> int:
    n = write_pcap(args.out, gen_traffic(_profile(args)))
    print(f"wrote {n} frames to {args.out}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {"bench": _cmd_bench, "run": _cmd_run, "gen": _cmd_gen}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, PcapError) as exc:
        print(f"streamguard: error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run_cli())
