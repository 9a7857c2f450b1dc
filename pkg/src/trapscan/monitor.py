"""Per-pool evidence ledger: buyers, balances, transfers, liquidity.

A `PoolWatch` is fed strictly one block at a time. Every recipient of the
watched trap token in a swap becomes a tracked buyer; from then on the
buyer gets a balance snapshot at every ingested block, plus all logged
transfers and approvals of the trap token that touch them. Detection
logic consumes these ledgers, never the chain directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chainview import (
    ApproveRecord,
    BalanceSnapshot,
    ChainView,
    LiquidityEvent,
    LiquidityKind,
    SwapRecord,
    TransferRecord,
    UnknownPool,
    UnknownToken,
)
from .core import Address, BlockIndex, PoolInfo

CHECKPOINT_SCHEMA = "trapscan-poolwatch/1"

# Pools pair a trap candidate with one of these by default; the live
# config can extend the set (wrapped-native, major stables).
DEFAULT_BASE_TOKEN_TAGS = ("base:wrapped-native",)


class MonitorError(Exception):
    pass


class IngestGap(MonitorError):
    """Blocks must be ingested consecutively."""


class MissingSnapshot(MonitorError):
    pass


@dataclass
class BuyerLedger:
    """Everything observed about one buyer of the trap token."""

    buyer: Address
    pool: Address
    trap_token: Address
    buys: list[SwapRecord] = field(default_factory=list)
    snapshots: list[BalanceSnapshot] = field(default_factory=list)
    transfers: list[TransferRecord] = field(default_factory=list)
    approvals: list[ApproveRecord] = field(default_factory=list)

    def snapshot_at(self, block: int) -> BalanceSnapshot:
        for snap in self.snapshots:
            if snap.block.number == block:
                return snap
        raise MissingSnapshot(f"no snapshot for {self.buyer} at block {block}")

    def latest_snapshot(self) -> BalanceSnapshot:
        if not self.snapshots:
            raise MissingSnapshot(f"no snapshots for {self.buyer}")
        return self.snapshots[-1]

    def outgoing_logged(self) -> list[TransferRecord]:
        return [t for t in self.transfers if t.sender == self.buyer]

    def incoming_logged(self) -> list[TransferRecord]:
        return [t for t in self.transfers if t.recipient == self.buyer]


@dataclass
class PoolWatch:
    """Monitor state for one pool, oriented at one trap-token side."""

    pool: PoolInfo
    trap_token: Address
    base_token: Address
    buyers: dict[Address, BuyerLedger] = field(default_factory=dict)
    liquidity: list[LiquidityEvent] = field(default_factory=list)
    has_liquidity: dict[int, bool] = field(default_factory=dict)
    last_ingested: int | None = None

    @classmethod
    def create(cls, pool: PoolInfo, trap_token: Address) -> "PoolWatch":
        return cls(pool=pool, trap_token=trap_token, base_token=pool.other_token(trap_token))

    def liquid_at(self, block: int) -> bool:
        return self.has_liquidity.get(block, False)


def discover_pools(chain: ChainView, block_range: tuple[int, int]) -> list[PoolInfo]:
    """Validated pass-through of the backend's pool-creation query."""
    lo, hi = block_range
    if hi < lo or lo < 0:
        raise ValueError(f"invalid block range: {block_range}")
    return chain.get_pool_created(block_range)


def pick_orientations(
    pool: PoolInfo, base_tokens: set[Address]
) -> list[tuple[Address, Address]]:
    """(trap_token, base_token) pairs to watch for a pool.

    The non-base side is the trap candidate. When neither side is a known
    base token the pool is watched in both directions.
    """
    x_base = pool.token_x in base_tokens
    y_base = pool.token_y in base_tokens
    if x_base and not y_base:
        return [(pool.token_y, pool.token_x)]
    if y_base and not x_base:
        return [(pool.token_x, pool.token_y)]
    return [(pool.token_y, pool.token_x), (pool.token_x, pool.token_y)]


def ingest_block(watch: PoolWatch, chain: ChainView, block: int) -> PoolWatch:
    """Advance the watch by exactly one block; mutates and returns `watch`."""
    if watch.last_ingested is not None and block != watch.last_ingested + 1:
        raise IngestGap(f"expected block {watch.last_ingested + 1}, got {block}")

    one = (block, block)
    try:
        swaps = chain.get_swaps(watch.pool.pool, one)
    except UnknownPool:
        # Scan range may start before the pool (or its tokens) exist.
        watch.has_liquidity[block] = False
        watch.last_ingested = block
        return watch
    for swap in swaps:
        if swap.token_out != watch.trap_token:
            continue
        if swap.recipient == watch.pool.pool:
            continue
        ledger = watch.buyers.get(swap.recipient)
        if ledger is None:
            ledger = BuyerLedger(
                buyer=swap.recipient, pool=watch.pool.pool, trap_token=watch.trap_token
            )
            watch.buyers[swap.recipient] = ledger
        ledger.buys.append(swap)

    buyer_set = set(watch.buyers)
    if buyer_set:
        try:
            transfers = chain.get_transfers(watch.trap_token, one)
            approvals = chain.get_approvals(watch.trap_token, one)
        except UnknownToken:
            transfers, approvals = [], []
        for rec in transfers:
            if rec.sender == watch.pool.pool:
                continue  # pool deliveries are already evidenced by SwapRecords
            for buyer in {rec.sender, rec.recipient} & buyer_set:
                watch.buyers[buyer].transfers.append(rec)
        for rec in approvals:
            if rec.approver in buyer_set:
                watch.buyers[rec.approver].approvals.append(rec)

    for ledger in watch.buyers.values():
        snap = chain.balance_of(watch.trap_token, ledger.buyer, block)
        ledger.snapshots.append(snap)

    watch.liquidity.extend(chain.get_liquidity_events(watch.pool.pool, one))
    try:
        rx, ry = chain.get_reserves(watch.pool.pool, block)
        watch.has_liquidity[block] = rx > 0 and ry > 0
    except UnknownPool:
        watch.has_liquidity[block] = False
    watch.last_ingested = block
    return watch


def buyer_delta(
    ledger: BuyerLedger, from_block: int, to_block: int
) -> tuple[int, list[TransferRecord]]:
    """Signed balance change between two snapshotted blocks, plus the
    logged transfers touching the buyer in (from_block, to_block]."""
    start = ledger.snapshot_at(from_block)
    end = ledger.snapshot_at(to_block)
    moved = [
        t for t in ledger.transfers if from_block < t.block.number <= to_block
    ]
    return end.balance - start.balance, moved


def swaps_in_window(ledger: BuyerLedger, from_block: int, to_block: int) -> list[SwapRecord]:
    return [s for s in ledger.buys if from_block < s.block.number <= to_block]


# ----------------------------------------------------------------------
# checkpoint serialization

def _block_to_json(block: BlockIndex) -> dict:
    return {"number": block.number, "tx_index": block.tx_index}


def _block_from_json(data: dict) -> BlockIndex:
    return BlockIndex(data["number"], data.get("tx_index"))


def watch_to_json(watch: PoolWatch) -> str:
    """Serialize a PoolWatch so long scans can checkpoint and resume."""
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "pool": {
            "pool": watch.pool.pool.hex,
            "token_x": watch.pool.token_x.hex,
            "token_y": watch.pool.token_y.hex,
            "dex_version": watch.pool.dex_version.value,
            "fee_num": watch.pool.fee_num,
            "fee_den": watch.pool.fee_den,
        },
        "trap_token": watch.trap_token.hex,
        "base_token": watch.base_token.hex,
        "last_ingested": watch.last_ingested,
        "has_liquidity": {str(k): v for k, v in watch.has_liquidity.items()},
        "liquidity": [
            {
                "block": _block_to_json(ev.block),
                "kind": ev.kind.value,
                "amount_x": str(ev.amount_x),
                "amount_y": str(ev.amount_y),
                "provider": ev.provider.hex,
            }
            for ev in watch.liquidity
        ],
        "buyers": [
            {
                "buyer": led.buyer.hex,
                "buys": [
                    {
                        "tx_hash": s.tx_hash.hex(),
                        "block": _block_to_json(s.block),
                        "sender": s.sender.hex,
                        "token_in": s.token_in.hex,
                        "amount_in": str(s.amount_in),
                        "token_out": s.token_out.hex,
                        "amount_out": str(s.amount_out),
                        "recipient": s.recipient.hex,
                    }
                    for s in led.buys
                ],
                "snapshots": [
                    {
                        "block": _block_to_json(s.block),
                        "balance": str(s.balance),
                        "failed": s.failed,
                    }
                    for s in led.snapshots
                ],
                "transfers": [
                    {
                        "block": _block_to_json(t.block),
                        "sender": t.sender.hex,
                        "recipient": t.recipient.hex,
                        "value": str(t.value),
                        "logged": t.logged,
                        "tx_sender": t.tx_sender.hex if t.tx_sender else None,
                    }
                    for t in led.transfers
                ],
                "approvals": [
                    {
                        "block": _block_to_json(a.block),
                        "spender": a.spender.hex,
                        "value": str(a.value),
                    }
                    for a in led.approvals
                ],
            }
            for led in watch.buyers.values()
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def watch_from_json(text: str) -> PoolWatch:
    doc = json.loads(text)
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise MonitorError(f"unsupported checkpoint schema: {doc.get('schema')}")
    from .core import DexVersion  # local to avoid widening the module surface

    p = doc["pool"]
    pool = PoolInfo(
        pool=Address.from_hex(p["pool"]),
        token_x=Address.from_hex(p["token_x"]),
        token_y=Address.from_hex(p["token_y"]),
        dex_version=DexVersion(p["dex_version"]),
        fee_num=p["fee_num"],
        fee_den=p["fee_den"],
    )
    trap = Address.from_hex(doc["trap_token"])
    watch = PoolWatch(
        pool=pool,
        trap_token=trap,
        base_token=Address.from_hex(doc["base_token"]),
        last_ingested=doc["last_ingested"],
        has_liquidity={int(k): v for k, v in doc["has_liquidity"].items()},
    )
    for ev in doc["liquidity"]:
        watch.liquidity.append(
            LiquidityEvent(
                pool=pool.pool,
                block=_block_from_json(ev["block"]),
                kind=LiquidityKind(ev["kind"]),
                amount_x=int(ev["amount_x"]),
                amount_y=int(ev["amount_y"]),
                provider=Address.from_hex(ev["provider"]),
            )
        )
    for b in doc["buyers"]:
        buyer = Address.from_hex(b["buyer"])
        led = BuyerLedger(buyer=buyer, pool=pool.pool, trap_token=trap)
        for s in b["buys"]:
            led.buys.append(
                SwapRecord(
                    tx_hash=bytes.fromhex(s["tx_hash"]),
                    block=_block_from_json(s["block"]),
                    sender=Address.from_hex(s["sender"]),
                    token_in=Address.from_hex(s["token_in"]),
                    amount_in=int(s["amount_in"]),
                    token_out=Address.from_hex(s["token_out"]),
                    amount_out=int(s["amount_out"]),
                    recipient=Address.from_hex(s["recipient"]),
                )
            )
        for s in b["snapshots"]:
            led.snapshots.append(
                BalanceSnapshot(
                    token=trap,
                    holder=buyer,
                    block=_block_from_json(s["block"]),
                    balance=int(s["balance"]),
                    failed=s["failed"],
                )
            )
        for t in b["transfers"]:
            led.transfers.append(
                TransferRecord(
                    token=trap,
                    block=_block_from_json(t["block"]),
                    sender=Address.from_hex(t["sender"]),
                    recipient=Address.from_hex(t["recipient"]),
                    value=int(t["value"]),
                    logged=t["logged"],
                    tx_sender=Address.from_hex(t["tx_sender"]) if t["tx_sender"] else None,
                )
            )
        for a in b["approvals"]:
            led.approvals.append(
                ApproveRecord(
                    token=trap,
                    block=_block_from_json(a["block"]),
                    approver=buyer,
                    spender=Address.from_hex(a["spender"]),
                    value=int(a["value"]),
                )
            )
        watch.buyers[buyer] = led
    return watch
