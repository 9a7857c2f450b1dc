"""Swap-output estimation and transaction-bundle construction.

Three bundle shapes probe a pool without publishing anything:

  Sell      [balance_of(X, buyer), sell Y, balance_of(X, buyer)]
  BuyProbe  [balance_of(Y, account), buy Y, balance_of(Y, account)]
  BuySell   [buy Y, balance_of(X, account), sell Y, balance_of(X, account)]

X is the pool's base token, Y the trap-token side being examined. The
balance reads bracket the swap whose effect the analyzer compares against
the estimator's prediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .chainview import (
    BalanceOfCall,
    BalanceSnapshot,
    Call,
    CallOutcome,
    ChainView,
    SwapExactInCall,
)
from .core import Address, BlockIndex, PoolInfo, TokenAmount, check_amount


class SimulatorError(Exception):
    pass


class NoLiquidity(SimulatorError):
    pass


class ZeroBalance(SimulatorError):
    pass


class ProbeFailed(SimulatorError):
    """The buy probe reverted or delivered nothing, so no sell leg can be
    built from it. This is itself buy-side trap evidence."""


def estimate_output(
    reserve_in: TokenAmount,
    reserve_out: TokenAmount,
    amount_in: TokenAmount,
    fee_num: int = 3,
    fee_den: int = 1000,
) -> TokenAmount:
    """Constant-product swap output after the pool fee, floored.

    output = amount_in * (fee_den - fee_num) * reserve_out
             // (reserve_in * fee_den + amount_in * (fee_den - fee_num))
    """
    check_amount(reserve_in, "reserve_in")
    check_amount(reserve_out, "reserve_out")
    check_amount(amount_in, "amount_in")
    if reserve_in == 0 or reserve_out == 0:
        raise NoLiquidity("estimate_output: empty reserve")
    if amount_in == 0:
        raise ValueError("estimate_output: zero input")
    if not (0 <= fee_num < fee_den):
        raise ValueError("fee must satisfy 0 <= fee_num < fee_den")
    net_in = amount_in * (fee_den - fee_num)
    return (net_in * reserve_out) // (reserve_in * fee_den + net_in)


class BundleKind(Enum):
    SELL = "sell"
    BUY_PROBE = "buy_probe"
    BUY_SELL = "buy_sell"


@dataclass(frozen=True, slots=True)
class Bundle:
    kind: BundleKind
    actor: Address
    pool: PoolInfo
    calls: tuple[Call, ...]
    block: int
    trap_token: Address
    base_token: Address
    swap_amount: TokenAmount  # input amount of the sell (or buy for probes)


@dataclass(frozen=True, slots=True)
class SimulationResult:
    bundle: Bundle
    outcomes: tuple[CallOutcome, ...]
    pre_balance: BalanceSnapshot
    post_balance: BalanceSnapshot
    estimate: TokenAmount
    sell_reverted: bool

    @property
    def balance_delta(self) -> int:
        """post - pre around the swap of interest; negative only if the
        bundle somehow cost the actor balance."""
        return self.post_balance.balance - self.pre_balance.balance


def _reserves_oriented(
    chain: ChainView, pool: PoolInfo, token_in: Address, block: int
) -> tuple[TokenAmount, TokenAmount]:
    rx, ry = chain.get_reserves(pool.pool, block)
    return (rx, ry) if token_in == pool.token_x else (ry, rx)


def _require_liquidity(chain: ChainView, pool: PoolInfo, block: int) -> None:
    rx, ry = chain.get_reserves(pool.pool, block)
    if rx == 0 or ry == 0:
        raise NoLiquidity(f"pool {pool.pool} has no liquidity at block {block}")


def pool_sides(pool: PoolInfo, trap_token: Address) -> tuple[Address, Address]:
    """(trap_token, base_token) orientation for a pool."""
    if not pool.has_token(trap_token):
        raise ValueError(f"{trap_token} is not a token of pool {pool.pool}")
    return trap_token, pool.other_token(trap_token)


def build_sell_bundle(
    chain: ChainView,
    buyer: Address,
    pool: PoolInfo,
    trap_token: Address,
    amount: TokenAmount,
    block: int,
) -> Bundle:
    """Sell bundle for a tracked buyer: can they cash out what they hold?"""
    trap, base = pool_sides(pool, trap_token)
    _require_liquidity(chain, pool, block)
    check_amount(amount, "amount")
    if amount == 0:
        raise ZeroBalance("buyer holds nothing to sell")
    held = chain.balance_of(trap, buyer, block)
    if held.failed or held.balance < amount:
        raise ZeroBalance(
            f"buyer {buyer} holds {held.balance}, cannot sell {amount}"
        )
    calls: tuple[Call, ...] = (
        BalanceOfCall(caller=buyer, token=base, holder=buyer),
        SwapExactInCall(
            caller=buyer, pool=pool.pool, token_in=trap, token_out=base,
            amount_in=amount, recipient=buyer,
        ),
        BalanceOfCall(caller=buyer, token=base, holder=buyer),
    )
    return Bundle(
        kind=BundleKind.SELL, actor=buyer, pool=pool, calls=calls, block=block,
        trap_token=trap, base_token=base, swap_amount=amount,
    )


def build_buy_probe(
    chain: ChainView,
    account: Address,
    pool: PoolInfo,
    trap_token: Address,
    buy_amount: TokenAmount,
    block: int,
) -> Bundle:
    """Buy probe with a funded synthetic account: does buying deliver?"""
    trap, base = pool_sides(pool, trap_token)
    _require_liquidity(chain, pool, block)
    check_amount(buy_amount, "buy_amount")
    if buy_amount == 0:
        raise ValueError("buy_amount must be positive")
    calls: tuple[Call, ...] = (
        BalanceOfCall(caller=account, token=trap, holder=account),
        SwapExactInCall(
            caller=account, pool=pool.pool, token_in=base, token_out=trap,
            amount_in=buy_amount, recipient=account,
        ),
        BalanceOfCall(caller=account, token=trap, holder=account),
    )
    return Bundle(
        kind=BundleKind.BUY_PROBE, actor=account, pool=pool, calls=calls, block=block,
        trap_token=trap, base_token=base, swap_amount=buy_amount,
    )


def build_buy_sell_bundle(
    chain: ChainView,
    account: Address,
    pool: PoolInfo,
    trap_token: Address,
    buy_amount: TokenAmount,
    probe_result: "SimulationResult",
    block: int,
) -> Bundle:
    """Buy-then-sell round trip; the sell amount is exactly what the probe
    observed arriving, not what any log claimed."""
    trap, base = pool_sides(pool, trap_token)
    if probe_result.bundle.kind is not BundleKind.BUY_PROBE:
        raise ProbeFailed("need a buy-probe result to size the sell")
    if probe_result.outcomes[1].reverted:
        raise ProbeFailed("buy probe reverted")
    received = probe_result.balance_delta
    if received <= 0:
        raise ProbeFailed("buy probe delivered nothing")
    _require_liquidity(chain, pool, block)
    calls: tuple[Call, ...] = (
        SwapExactInCall(
            caller=account, pool=pool.pool, token_in=base, token_out=trap,
            amount_in=buy_amount, recipient=account,
        ),
        BalanceOfCall(caller=account, token=base, holder=account),
        SwapExactInCall(
            caller=account, pool=pool.pool, token_in=trap, token_out=base,
            amount_in=received, recipient=account,
        ),
        BalanceOfCall(caller=account, token=base, holder=account),
    )
    return Bundle(
        kind=BundleKind.BUY_SELL, actor=account, pool=pool, calls=calls, block=block,
        trap_token=trap, base_token=base, swap_amount=received,
    )


def _estimate_for(chain: ChainView, bundle: Bundle) -> TokenAmount:
    """Expected swap output under the bundle's block state.

    The backend may supply its own quote (live V3-style pools); otherwise
    the local constant-product formula prices it from the reserves.
    """
    if bundle.kind is BundleKind.BUY_PROBE:
        token_in = bundle.base_token
    else:
        token_in = bundle.trap_token
    quoted = chain.quote_exact_in(bundle.pool, token_in, bundle.swap_amount, bundle.block)
    if quoted is not None:
        return quoted
    reserve_in, reserve_out = _reserves_oriented(chain, bundle.pool, token_in, bundle.block)
    if reserve_in == 0 or reserve_out == 0 or bundle.swap_amount == 0:
        return 0
    return estimate_output(
        reserve_in, reserve_out, bundle.swap_amount, bundle.pool.fee_num, bundle.pool.fee_den
    )


_SELL_CALL_POS = {BundleKind.SELL: 1, BundleKind.BUY_SELL: 2}
_BALANCE_POSITIONS = {
    BundleKind.SELL: (0, 2),
    BundleKind.BUY_PROBE: (0, 2),
    BundleKind.BUY_SELL: (1, 3),
}


def run(
    chain: ChainView,
    bundle: Bundle,
    balance_overrides: dict[tuple[Address, Address], TokenAmount] | None = None,
) -> SimulationResult:
    """Execute the bundle on a private fork and package the evidence."""
    estimate = _estimate_for(chain, bundle)
    outcomes = chain.simulate_bundle(bundle.block, list(bundle.calls), balance_overrides)
    pre_pos, post_pos = _BALANCE_POSITIONS[bundle.kind]
    pre = _snapshot_from(bundle, outcomes[pre_pos], pre_pos)
    post = _snapshot_from(bundle, outcomes[post_pos], post_pos)
    sell_pos = _SELL_CALL_POS.get(bundle.kind)
    sell_reverted = outcomes[sell_pos].reverted if sell_pos is not None else False
    return SimulationResult(
        bundle=bundle,
        outcomes=tuple(outcomes),
        pre_balance=pre,
        post_balance=post,
        estimate=estimate,
        sell_reverted=sell_reverted,
    )


def _snapshot_from(bundle: Bundle, outcome: CallOutcome, pos: int) -> BalanceSnapshot:
    call = bundle.calls[pos]
    assert isinstance(call, BalanceOfCall)
    return BalanceSnapshot(
        token=call.token,
        holder=call.holder,
        block=BlockIndex(bundle.block),
        balance=outcome.return_value if outcome.ok and outcome.return_value is not None else 0,
        failed=not outcome.ok,
    )
