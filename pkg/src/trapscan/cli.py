"""Command-line frontend.

    trapscan simulate <scenario.json|dir> [--out report.jsonl]
    trapscan gen-corpus --n 200 --seed 7 --out-dir corpus/
    trapscan scan --mode sim --scenario corpus/ [...]
    trapscan scan --mode live --rpc-url URL --from-block A --to-block B [...]

Exit codes: 0 success (simulate: all verdicts match ground truth),
1 runtime failure or mismatch, 2 malformed input file.

Environment: TRAPSCAN_RPC_URL overrides the endpoint, TRAPSCAN_CHECKPOINT
the checkpoint path.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .analyzer import verdict_to_json_line, verdict_to_json_obj
from .core import Address
from .corpus import gen_corpus
from .mockchain.scenario_io import ScenarioFormatError, load_scenario
from .mockchain.scripts import run_attack_script
from .pipeline import ScanSettings, ScanSummary, scan_pool, scan_pools_resumable

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_SCHEMA = 2


def _parse_threshold(text: str) -> Fraction:
    frac = Fraction(text)
    if not (0 < frac < 1):
        raise argparse.ArgumentTypeError(f"threshold must be in (0,1): {text}")
    return frac


def _parse_sample(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("sample size must be >= 1")
    return n


def _settings_from_args(args) -> ScanSettings:
    return ScanSettings(
        interval=args.interval,
        threshold=args.threshold,
        workers=getattr(args, "workers", 1),
    )


def _scenario_paths(source: Path) -> list[Path]:
    if source.is_dir():
        return sorted(source.glob("*.json"))  # empty is a valid zero-pool scan
    if not source.exists():
        raise FileNotFoundError(f"no such scenario file: {source}")
    return [source]


def _simulate_one(path: Path, settings: ScanSettings) -> tuple[dict, bool]:
    scenario = load_scenario(path)
    trace = run_attack_script(scenario.script, scenario.seed)
    verdict = scan_pool(
        trace.chain, trace.pool, trace.trap_token, 1, trace.final_block, settings
    )
    truth = sorted(t.value for t in trace.ground_truth)
    got = sorted(t.value for t in verdict.traps)
    match = truth == got
    report = verdict_to_json_obj(verdict)
    report["scenario"] = path.name
    report["ground_truth"] = truth
    report["match"] = match
    if scenario.expected_traps is not None:
        embedded = sorted(t.value for t in scenario.expected_traps)
        if embedded != truth:
            report["label_mismatch"] = embedded
    return report, match


def cmd_simulate(args) -> int:
    settings = _settings_from_args(args)
    try:
        paths = _scenario_paths(Path(args.scenario))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    reports: list[dict] = []
    all_match = True
    for path in paths:
        try:
            report, match = _simulate_one(path, settings)
        except json.JSONDecodeError as exc:
            print(
                f"error: {path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                file=sys.stderr,
            )
            return EXIT_SCHEMA
        except ScenarioFormatError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        except Exception as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        reports.append(report)
        all_match = all_match and match

    lines = [json.dumps(r, separators=(",", ":")) for r in reports]
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    matched = sum(1 for r in reports if r["match"])
    print(f"ground-truth match: {matched}/{len(reports)}", file=sys.stderr)
    return EXIT_OK if all_match else EXIT_RUNTIME


def cmd_gen_corpus(args) -> int:
    try:
        paths = gen_corpus(args.n, args.seed, args.out_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(paths)} scenarios to {args.out_dir}", file=sys.stderr)
    return EXIT_OK


def _emit_verdicts(lines: list[str], args) -> None:
    if args.format == "csv":
        rows = ["pool,traps,first_flagged_block,scanned_from,scanned_to"]
        for line in lines:
            obj = json.loads(line)
            rng = obj.get("scanned_range", ["", ""])
            rows.append(
                f'{obj["pool"]},{"|".join(obj["traps"])},'
                f'{obj.get("first_flagged_block") or ""},{rng[0]},{rng[1]}'
            )
        payload = "\n".join(rows) + "\n"
    else:
        payload = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def cmd_scan(args) -> int:
    if args.mode == "sim":
        return _scan_sim(args)
    return _scan_live(args)


def _scan_sim(args) -> int:
    if not args.scenario:
        print("error: --scenario is required for sim scans", file=sys.stderr)
        return EXIT_RUNTIME
    settings = _settings_from_args(args)
    try:
        paths = _scenario_paths(Path(args.scenario))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.sample is not None:
        rng = random.Random(args.seed)
        paths = sorted(rng.sample(paths, min(args.sample, len(paths))))

    summary = ScanSummary()
    lines: list[str] = []
    for path in paths:
        try:
            scenario = load_scenario(path)
            trace = run_attack_script(scenario.script, scenario.seed)
            verdict = scan_pool(
                trace.chain, trace.pool, trace.trap_token, 1, trace.final_block, settings
            )
        except (json.JSONDecodeError, ScenarioFormatError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        except Exception as exc:
            print(f"warning: {path}: scan failed: {exc}", file=sys.stderr)
            summary.failures += 1
            continue
        lines.append(verdict_to_json_line(verdict))
        summary.add(verdict)
    _emit_verdicts(lines, args)
    print(summary.table())
    return EXIT_OK


def _scan_live(args) -> int:
    from .rpcbackend import EndpointConfig, RpcChainView, load_backend_config

    url = args.rpc_url or os.environ.get("TRAPSCAN_RPC_URL")
    config_doc = load_backend_config(args.config) if args.config else {}
    if not url:
        url = config_doc.get("url")
    if not url:
        print("error: no endpoint: use --rpc-url, --config or TRAPSCAN_RPC_URL",
              file=sys.stderr)
        return EXIT_RUNTIME
    if args.from_block is None or args.to_block is None:
        print("error: --from-block and --to-block are required for live scans",
              file=sys.stderr)
        return EXIT_RUNTIME

    endpoint = EndpointConfig.from_doc({**config_doc, "url": url})
    chain = RpcChainView(endpoint)
    base_tokens = {Address.from_hex(h) for h in config_doc.get("base_tokens", [])}
    settings = _settings_from_args(args)
    checkpoint = args.checkpoint or os.environ.get("TRAPSCAN_CHECKPOINT")

    try:
        if args.pools:
            pool_addrs = _parse_pool_list(args.pools)
            pools = [chain.pool_info(p) for p in pool_addrs]
        else:
            pools = chain.get_pool_created((args.from_block, args.to_block))
    except Exception as exc:
        print(f"error: pool discovery failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.sample is not None and pools:
        rng = random.Random(args.seed)
        pools = rng.sample(pools, min(args.sample, len(pools)))

    from .monitor import pick_orientations

    targets = []
    for info in pools:
        targets.extend((info, trap) for trap, _base in pick_orientations(info, base_tokens))

    lines, summary = scan_pools_resumable(
        chain, targets, args.from_block, args.to_block, settings, checkpoint
    )
    _emit_verdicts(lines, args)
    print(summary.table())
    return EXIT_OK


def _parse_pool_list(spec: str) -> list[Address]:
    path = Path(spec)
    if path.exists():
        entries = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    else:
        entries = [p.strip() for p in spec.split(",") if p.strip()]
    return [Address.from_hex(e) for e in entries]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapscan",
        description="Detect honeypot-trap liquidity pools by replay and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--interval", type=int, default=1,
                        help="blocks between detection rounds (default 1)")
    common.add_argument("--threshold", type=_parse_threshold, default=Fraction(1, 2),
                        help="detection threshold ratio (default 1/2)")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="run a scenario on the mock chain and verify the verdict")
    p_sim.add_argument("scenario", help="scenario file or directory")
    p_sim.add_argument("--out", help="write the report JSONL here instead of stdout")
    p_sim.set_defaults(func=cmd_simulate)

    p_gen = sub.add_parser("gen-corpus", help="generate a labeled scenario corpus")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out-dir", required=True)
    p_gen.set_defaults(func=cmd_gen_corpus)

    p_scan = sub.add_parser("scan", parents=[common], help="scan pools and report verdicts")
    p_scan.add_argument("--mode", choices=["sim", "live"], default="sim")
    p_scan.add_argument("--scenario", help="scenario file or directory (sim mode)")
    p_scan.add_argument("--rpc-url", help="JSON-RPC endpoint (live mode)")
    p_scan.add_argument("--config", help="backend config file (live mode)")
    p_scan.add_argument("--from-block", type=int)
    p_scan.add_argument("--to-block", type=int)
    p_scan.add_argument("--pools", help="pool addresses: file or comma-separated list")
    p_scan.add_argument("--sample", type=_parse_sample,
                        help="random sample size over discovered pools")
    p_scan.add_argument("--seed", type=int, default=0, help="sampling seed")
    p_scan.add_argument("--out", help="verdict stream output path")
    p_scan.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p_scan.add_argument("--checkpoint", help="checkpoint path for resumable scans")
    p_scan.add_argument("--workers", type=int, default=1)
    p_scan.set_defaults(func=cmd_scan)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
