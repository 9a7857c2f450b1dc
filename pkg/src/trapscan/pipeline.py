"""Per-pool detection pipeline and multi-pool scan orchestration.

For each pool the pipeline ingests blocks one at a time and, at every
detection round (each `interval` blocks, provided liquidity is present):

  * rebuilds a sell simulation for every tracked buyer at their full
    balance and checks the sell-side predicates,
  * runs a buy probe with a funded synthetic account, and a follow-up
    buy-and-sell round trip when the probe delivered,
  * reconciles each buyer's balance movement against the logged evidence.

Findings accumulate into one verdict per pool. Distinct pools are
independent and may scan on parallel workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .analyzer import (
    DEFAULT_THRESHOLD,
    Finding,
    PoolVerdict,
    check_cannot_sell,
    check_invalid_buy,
    check_invalid_sell,
    check_unauthorized_transfer,
    classify_pool,
    verdict_to_json_line,
)
from .chainview import ChainView
from .core import Address, PoolInfo, TrapType
from .monitor import MissingSnapshot, PoolWatch, ingest_block
from .simulator import (
    NoLiquidity,
    ProbeFailed,
    SimulationResult,
    SimulatorError,
    build_buy_probe,
    build_buy_sell_bundle,
    build_sell_bundle,
    run,
)

PROBE_FUNDING = 10**30


@dataclass(frozen=True)
class ScanSettings:
    """Knobs for one scan run."""

    interval: int = 1  # blocks between detection rounds
    threshold: Fraction = DEFAULT_THRESHOLD
    probe_num: int = 1  # probe size as probe_num/probe_den of base reserve
    probe_den: int = 1000
    min_revert_blocks: int = 2
    known_token_allowlist: frozenset[Address] = frozenset()
    workers: int = 1

    def __post_init__(self) -> None:
        if self.interval < 1:
            raise ValueError("interval must be >= 1")
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must be in (0, 1)")


@dataclass
class PoolScanState:
    """Mutable per-pool scan progress; owned by a single worker."""

    watch: PoolWatch
    findings: list[Finding] = field(default_factory=list)
    sell_history: dict[Address, list[SimulationResult]] = field(default_factory=dict)
    skipped_rounds: list[dict] = field(default_factory=list)
    finding_keys: set[tuple[TrapType, Address, int]] = field(default_factory=set)

    def add_finding(self, finding: Finding | None) -> None:
        if finding is None:
            return
        key = (finding.trap, finding.subject, finding.block)
        if key in self.finding_keys:
            return
        self.finding_keys.add(key)
        self.findings.append(finding)


def probe_account_for(pool: PoolInfo) -> Address:
    return Address.derive(f"probe:{pool.pool.hex}")


def _probe_size(chain: ChainView, watch: PoolWatch, block: int, settings: ScanSettings) -> int:
    rx, ry = chain.get_reserves(watch.pool.pool, block)
    base_reserve = rx if watch.base_token == watch.pool.token_x else ry
    return max(1, (base_reserve * settings.probe_num) // settings.probe_den)


def run_detection_round(
    chain: ChainView,
    state: PoolScanState,
    block: int,
    settings: ScanSettings,
) -> None:
    """One simulation-and-analysis pass at a sealed block."""
    watch = state.watch
    if not watch.liquid_at(block):
        state.skipped_rounds.append({"block": block, "reason": "no liquidity"})
        return

    prev_round = block - settings.interval
    for buyer, ledger in watch.buyers.items():
        history = state.sell_history.setdefault(buyer, [])
        balance = ledger.latest_snapshot().balance
        if balance > 0:
            try:
                bundle = build_sell_bundle(
                    chain, buyer, watch.pool, watch.trap_token, balance, block
                )
            except SimulatorError:
                bundle = None
            if bundle is not None:
                result = run(chain, bundle)
                if result.estimate == 0:
                    state.skipped_rounds.append(
                        {"block": block, "reason": "estimate=0", "subject": buyer.hex}
                    )
                else:
                    history.append(result)
                    if not result.sell_reverted:
                        state.add_finding(check_invalid_sell(result, settings.threshold))
        if history:
            state.add_finding(
                check_cannot_sell(history, settings.min_revert_blocks)
            )
        try:
            state.add_finding(
                check_unauthorized_transfer(
                    ledger, max(prev_round, _first_snapshot(ledger)), block, settings.threshold
                )
            )
        except MissingSnapshot:
            pass  # buyer registered inside this window; next round covers it

    probe = probe_account_for(watch.pool)
    overrides = {(watch.base_token, probe): PROBE_FUNDING}
    buy_amount = _probe_size(chain, watch, block, settings)
    try:
        probe_bundle = build_buy_probe(
            chain, probe, watch.pool, watch.trap_token, buy_amount, block
        )
    except SimulatorError:
        return
    probe_result = run(chain, probe_bundle, overrides)
    if probe_result.estimate == 0:
        state.skipped_rounds.append({"block": block, "reason": "estimate=0", "subject": probe.hex})
        return
    state.add_finding(check_invalid_buy(probe_result, settings.threshold))

    probe_history = state.sell_history.setdefault(probe, [])
    try:
        roundtrip = build_buy_sell_bundle(
            chain, probe, watch.pool, watch.trap_token, buy_amount, probe_result, block
        )
    except (ProbeFailed, NoLiquidity):
        return
    rt_result = run(chain, roundtrip, overrides)
    if rt_result.estimate == 0:
        state.skipped_rounds.append({"block": block, "reason": "estimate=0", "subject": probe.hex})
        return
    probe_history.append(rt_result)
    if not rt_result.sell_reverted:
        state.add_finding(check_invalid_sell(rt_result, settings.threshold))
    state.add_finding(check_cannot_sell(probe_history, settings.min_revert_blocks))


def _first_snapshot(ledger) -> int:
    return ledger.snapshots[0].block.number


def scan_pool(
    chain: ChainView,
    pool: PoolInfo,
    trap_token: Address,
    from_block: int,
    to_block: int,
    settings: ScanSettings | None = None,
    state: PoolScanState | None = None,
) -> PoolVerdict:
    """Scan one pool orientation over an inclusive block range."""
    settings = settings or ScanSettings()
    if state is None:
        state = PoolScanState(watch=PoolWatch.create(pool, trap_token))
    watch = state.watch
    start = from_block if watch.last_ingested is None else watch.last_ingested + 1
    for block in range(start, to_block + 1):
        ingest_block(watch, chain, block)
        is_round = (block - from_block + 1) % settings.interval == 0 or block == to_block
        if is_round:
            run_detection_round(chain, state, block, settings)
    return classify_pool(
        watch,
        state.findings,
        (from_block, to_block),
        set(settings.known_token_allowlist) or None,
    )


@dataclass
class ScanSummary:
    """Shape of the final report: per-trap counts (overlapping) plus the
    distinct flagged total over the scanned population."""

    scanned: int = 0
    flagged: int = 0
    per_trap: dict[str, int] = field(default_factory=dict)
    failures: int = 0

    def add(self, verdict: PoolVerdict) -> None:
        self.scanned += 1
        if verdict.is_flagged:
            self.flagged += 1
        for trap in verdict.traps:
            self.per_trap[trap.value] = self.per_trap.get(trap.value, 0) + 1

    def add_line(self, line: str) -> None:
        """Count an already-serialized verdict (checkpoint resume path)."""
        obj = json.loads(line)
        self.scanned += 1
        traps = obj.get("traps", [])
        if traps:
            self.flagged += 1
        for trap in traps:
            self.per_trap[trap] = self.per_trap.get(trap, 0) + 1

    def total_line(self) -> str:
        return f"{self.flagged}/{self.scanned}"

    def table(self) -> str:
        rows = [("Types of Trap", "Num of Pool")]
        for i, trap in enumerate(TrapType, start=1):
            rows.append((f"({i}) {trap.value}", str(self.per_trap.get(trap.value, 0))))
        rows.append(("Total", self.total_line()))
        width = max(len(r[0]) for r in rows) + 2
        lines = [f"{name:<{width}}{num}" for name, num in rows]
        sep = "-" * (width + max(len(r[1]) for r in rows))
        return "\n".join([lines[0], sep, *lines[1:]])

    def to_csv(self) -> str:
        lines = ["trap,count"]
        for trap in TrapType:
            lines.append(f"{trap.value},{self.per_trap.get(trap.value, 0)}")
        lines.append(f"total,{self.total_line()}")
        return "\n".join(lines) + "\n"


def scan_pools(
    chain: ChainView,
    targets: list[tuple[PoolInfo, Address]],
    from_block: int,
    to_block: int,
    settings: ScanSettings | None = None,
    on_verdict=None,
) -> tuple[list[PoolVerdict], ScanSummary]:
    """Scan many (pool, trap_token) orientations on a bounded worker pool.

    Per-pool failures are counted, never abort the scan. Verdict callbacks
    fire in completion order; the returned list preserves target order.
    """
    settings = settings or ScanSettings()
    summary = ScanSummary()
    results: list[PoolVerdict | None] = [None] * len(targets)

    def work(idx: int) -> tuple[int, PoolVerdict]:
        pool, trap = targets[idx]
        return idx, scan_pool(chain, pool, trap, from_block, to_block, settings)

    if settings.workers <= 1:
        completed = map(work, range(len(targets)))
        for idx, verdict in completed:
            results[idx] = verdict
            summary.add(verdict)
            if on_verdict:
                on_verdict(verdict)
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool_exec:
            futures = [pool_exec.submit(work, i) for i in range(len(targets))]
            for fut in futures:
                try:
                    idx, verdict = fut.result()
                except Exception:
                    summary.failures += 1
                    continue
                results[idx] = verdict
                summary.add(verdict)
                if on_verdict:
                    on_verdict(verdict)
    return [v for v in results if v is not None], summary


# ----------------------------------------------------------------------
# scan checkpointing (pool-level granularity)

CHECKPOINT_SCHEMA = "trapscan-scan-checkpoint/1"


def write_checkpoint(path: str | Path, done: dict[str, str]) -> None:
    """Persist completed pools: pool address hex -> verdict JSON line."""
    doc = {"schema": CHECKPOINT_SCHEMA, "done": done}
    Path(path).write_text(json.dumps(doc))


def read_checkpoint(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        return {}
    doc = json.loads(p.read_text())
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema: {doc.get('schema')}")
    return dict(doc["done"])


def scan_pools_resumable(
    chain: ChainView,
    targets: list[tuple[PoolInfo, Address]],
    from_block: int,
    to_block: int,
    settings: ScanSettings | None = None,
    checkpoint_path: str | Path | None = None,
) -> tuple[list[str], ScanSummary]:
    """Like scan_pools but skips pools already present in the checkpoint
    and records each finished pool into it; returns verdict JSON lines.

    Scanning runs on the configured worker width; checkpoint writes stay
    serialized on the collecting thread.
    """
    settings = settings or ScanSettings()
    done = read_checkpoint(checkpoint_path) if checkpoint_path else {}
    summary = ScanSummary()
    lines: list[str | None] = [None] * len(targets)

    pending: list[int] = []
    for idx, (pool, trap) in enumerate(targets):
        key = f"{pool.pool.hex}:{trap.hex}"
        if key in done:
            lines[idx] = done[key]
            summary.add_line(done[key])
        else:
            pending.append(idx)

    def work(idx: int) -> tuple[int, PoolVerdict]:
        pool, trap = targets[idx]
        return idx, scan_pool(chain, pool, trap, from_block, to_block, settings)

    def collect(result_iter) -> None:
        for item in result_iter:
            if isinstance(item, Exception):
                summary.failures += 1
                continue
            idx, verdict = item
            pool, trap = targets[idx]
            line = verdict_to_json_line(verdict)
            lines[idx] = line
            summary.add(verdict)
            done[f"{pool.pool.hex}:{trap.hex}"] = line
            if checkpoint_path:
                write_checkpoint(checkpoint_path, done)

    if settings.workers <= 1:
        def results():
            for idx in pending:
                try:
                    yield work(idx)
                except Exception as exc:
                    yield exc
        collect(results())
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool_exec:
            futures = [pool_exec.submit(work, i) for i in pending]

            def results():
                for fut in futures:
                    try:
                        yield fut.result()
                    except Exception as exc:
                        yield exc
            collect(results())
    return [line for line in lines if line is not None], summary
