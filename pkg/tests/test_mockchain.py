from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import run_simple, simple_script
from trapscan.chainview import CallStatus, LiquidityKind, UnknownPool
from trapscan.core import Address, ZERO_ADDRESS
from trapscan.mockchain import (
    AmbiguousParameters,
    AttackScript,
    CreatePool,
    DelayedSellTax,
    DeployToken,
    Drain,
    FlipSwitch,
    GateMode,
    HiddenTax,
    Honest,
    LimitedSell,
    ListGate,
    MockChain,
    OwnerDrain,
    ScriptError,
    SwitchTrigger,
    TransferContext,
    VictimBuy,
    Wait,
    WashBuy,
    run_attack_script,
    validate_script,
    wash_and_drain_script,
)
from trapscan.core import TrapType

OWNER = Address.derive("owner")
ALICE = Address.derive("alice")
BOB = Address.derive("bob")


def fresh_pool(chain, behavior_y, x_liq=1000, y_liq=1000, supply=10**24):
    base = chain.deploy_token(Honest(Fraction(0)), supply, OWNER)
    trap = chain.deploy_token(behavior_y, supply, OWNER)
    pool = chain.create_pool(base, trap)
    assert chain.add_liquidity(pool, OWNER, x_liq, y_liq).ok
    chain.advance_block()
    return base, trap, pool


class TestDeploy:
    def test_owner_holds_supply(self, chain):
        token = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        chain.advance_block()
        assert chain.balance_of(token, OWNER, chain.head()).balance == 10**24

    def test_mint_record_from_zero_address(self, chain):
        token = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        chain.advance_block()
        (rec,) = chain.get_transfers(token, (0, chain.head()))
        assert rec.sender == ZERO_ADDRESS and rec.recipient == OWNER
        assert rec.value == 10**24 and rec.logged

    def test_trap_deploys_look_identical(self, chain):
        hidden = chain.deploy_token(HiddenTax(Fraction(1, 10)), 10**24, OWNER)
        delayed = chain.deploy_token(DelayedSellTax(Fraction(1)), 10**24, OWNER)
        chain.advance_block()
        for token in (hidden, delayed):
            assert chain.balance_of(token, OWNER, chain.head()).balance == 10**24
            assert len(chain.get_transfers(token, (0, chain.head()))) == 1


class TestTokenTransfer:
    def test_honest_tax_nets_and_logs_net(self, chain):
        token = chain.deploy_token(Honest(Fraction(60, 100)), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 10**6)  # owner exempt
        out = chain.token_transfer(token, ALICE, BOB, 1000)
        chain.advance_block()
        assert out.ok
        assert chain.balance_of(token, BOB, chain.head()).balance == 400
        rec = chain.get_transfers(token, (0, chain.head()))[-1]
        assert rec.value == 400

    def test_hidden_tax_delivers_fraction_logs_full(self, chain):
        token = chain.deploy_token(HiddenTax(Fraction(1, 10)), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 10**6)
        chain.token_transfer(token, ALICE, BOB, 1000)
        chain.advance_block()
        assert chain.balance_of(token, BOB, chain.head()).balance == 100
        rec = chain.get_transfers(token, (0, chain.head()))[-1]
        assert rec.value == 1000  # the event lies

    def test_hidden_tax_exempt_sender_moves_full(self, chain):
        token = chain.deploy_token(
            HiddenTax(Fraction(1, 10), exempt=frozenset({OWNER})), 10**24, OWNER
        )
        chain.token_transfer(token, OWNER, ALICE, 1000)
        chain.advance_block()
        assert chain.balance_of(token, ALICE, chain.head()).balance == 1000

    def test_list_gate_blocks_nonmember(self, chain):
        token = chain.deploy_token(
            ListGate(mode=GateMode.ALLOW, members=frozenset(), global_open=False),
            10**24, OWNER,
        )
        chain.token_transfer(token, OWNER, ALICE, 1000)  # owner auto-member
        out = chain.token_transfer(token, ALICE, BOB, 10)
        assert out.reverted
        assert out.revert_reason == "ERC20: transfer to the zero address"

    def test_limited_sell_caps_pool_payment(self, chain):
        token = chain.deploy_token(LimitedSell(Fraction(1, 100)), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 10**6)
        out = chain.token_transfer(token, ALICE, BOB, 10**5, TransferContext.POOL_IN)
        chain.advance_block()
        assert out.ok
        assert chain.balance_of(token, BOB, chain.head()).balance == 10**4

    def test_balance_check_reason_strings(self, chain):
        limited = chain.deploy_token(LimitedSell(Fraction(1, 2)), 100, OWNER)
        plain = chain.deploy_token(Honest(Fraction(0)), 100, OWNER)
        deny = chain.token_transfer(limited, ALICE, BOB, 10)
        assert deny.reverted and deny.revert_reason == "balanceNotEnough"
        deny2 = chain.token_transfer(plain, ALICE, BOB, 10)
        assert deny2.reverted and "exceeds balance" in deny2.revert_reason


class TestOwnerDrain:
    def test_logged_drain(self, chain):
        token = chain.deploy_token(OwnerDrain(owner=OWNER, emits_event=True), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 500)
        out = chain.owner_drain(token, ALICE, OWNER)
        chain.advance_block()
        assert out.ok and out.return_value == 500
        assert chain.balance_of(token, ALICE, chain.head()).balance == 0
        rec = chain.get_transfers(token, (0, chain.head()))[-1]
        assert rec.sender == ALICE and rec.recipient == ZERO_ADDRESS and rec.value == 500
        assert rec.tx_sender == OWNER

    def test_silent_drain_leaves_no_log(self, chain):
        token = chain.deploy_token(OwnerDrain(owner=OWNER, emits_event=False), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 500)
        before = len(chain.get_transfers(token, (0, chain.head() + 1)))
        assert chain.owner_drain(token, ALICE, OWNER).ok
        chain.advance_block()
        assert chain.balance_of(token, ALICE, chain.head()).balance == 0
        assert len(chain.get_transfers(token, (0, chain.head()))) == before

    def test_drain_empty_is_noop(self, chain):
        token = chain.deploy_token(OwnerDrain(owner=OWNER), 10**24, OWNER)
        out = chain.owner_drain(token, ALICE, OWNER)
        assert out.ok and out.return_value == 0

    def test_non_owner_rejected(self, chain):
        token = chain.deploy_token(OwnerDrain(owner=OWNER), 10**24, OWNER)
        assert chain.owner_drain(token, ALICE, BOB).reverted


class TestSwap:
    def test_constant_product_example(self, chain):
        base, trap, pool = fresh_pool(chain, Honest(Fraction(0)))
        chain.token_transfer(base, OWNER, ALICE, 1000)
        out = chain.swap(pool, ALICE, base, 100, ALICE)
        chain.advance_block()
        assert out.ok and out.return_value == 90
        assert chain.balance_of(trap, ALICE, chain.head()).balance == 90
        assert chain.get_reserves(pool, chain.head()) == (1100, 910)
        (swap,) = chain.get_swaps(pool, (0, chain.head()))
        assert swap.amount_in == 100 and swap.amount_out == 90

    def test_hidden_tax_distorts_delivery_not_record(self, chain):
        base, trap, pool = fresh_pool(chain, HiddenTax(Fraction(1, 10)))
        chain.token_transfer(base, OWNER, ALICE, 1000)
        out = chain.swap(pool, ALICE, base, 100, ALICE)
        chain.advance_block()
        assert out.ok
        (swap,) = chain.get_swaps(pool, (0, chain.head()))
        assert swap.amount_out == 90
        assert chain.balance_of(trap, ALICE, chain.head()).balance == 9

    def test_gated_sell_reverts_and_preserves_reserves(self, chain):
        base, trap, pool = fresh_pool(
            chain, ListGate(mode=GateMode.ALLOW, members=frozenset())
        )
        chain.token_transfer(base, OWNER, ALICE, 1000)
        assert chain.swap(pool, ALICE, base, 100, ALICE).ok  # buy works
        chain.advance_block()
        reserves = chain.get_reserves(pool, chain.head())
        out = chain.swap(pool, ALICE, trap, 90, ALICE)
        chain.advance_block()
        assert out.reverted
        assert chain.get_reserves(pool, chain.head()) == reserves

    def test_zero_input_and_empty_pool_revert(self, chain):
        base = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        trap = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        pool = chain.create_pool(base, trap)
        assert chain.swap(pool, OWNER, base, 0, OWNER).reverted
        assert chain.swap(pool, OWNER, base, 100, OWNER).reverted  # no liquidity

    def test_emitted_records_on_success(self, chain):
        base, trap, pool = fresh_pool(chain, Honest(Fraction(0)))
        chain.token_transfer(base, OWNER, ALICE, 1000)
        out = chain.swap(pool, ALICE, base, 100, ALICE)
        kinds = [type(r).__name__ for r in out.emitted]
        assert kinds == ["TransferRecord", "TransferRecord", "SwapRecord"]


class TestLiquidity:
    def test_add_then_reserves(self, chain):
        base, trap, pool = fresh_pool(chain, Honest(Fraction(0)))
        assert chain.get_reserves(pool, chain.head()) == (1000, 1000)
        events = chain.get_liquidity_events(pool, (0, chain.head()))
        assert [e.kind for e in events] == [LiquidityKind.ADD]

    def test_remove_all_returns_current_reserves(self, chain):
        base, trap, pool = fresh_pool(chain, Honest(Fraction(0)))
        chain.token_transfer(base, OWNER, ALICE, 1000)
        chain.swap(pool, ALICE, base, 100, ALICE)
        chain.advance_block()
        before = chain.get_reserves(pool, chain.head())
        assert before == (1100, 910)
        out = chain.remove_liquidity(pool, OWNER)
        chain.advance_block()
        assert out.ok
        event = chain.get_liquidity_events(pool, (0, chain.head()))[-1]
        assert (event.amount_x, event.amount_y) == before
        assert chain.get_reserves(pool, chain.head()) == (0, 0)

    def test_remove_empty_reverts(self, chain):
        base = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        trap = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        pool = chain.create_pool(base, trap)
        assert chain.remove_liquidity(pool, OWNER).reverted


class TestFlipSwitch:
    def test_delayed_tax_before_and_after(self, chain):
        base, trap, pool = fresh_pool(
            chain, DelayedSellTax(Fraction(1)), x_liq=10**6, y_liq=10**6
        )
        chain.token_transfer(trap, OWNER, ALICE, 10**4)
        chain.advance_block()
        out = chain.swap(pool, ALICE, trap, 1000, ALICE)
        assert out.ok and out.return_value > 900  # full-value sell pre-switch
        assert chain.flip_switch(trap, OWNER).ok
        chain.advance_block()
        out2 = chain.swap(pool, ALICE, trap, 1000, ALICE)
        assert out2.ok and out2.return_value == 0  # sell delivers nothing

    def test_idempotent_and_owner_only(self, chain):
        token = chain.deploy_token(DelayedSellTax(Fraction(1)), 10**24, OWNER)
        assert chain.flip_switch(token, ALICE).reverted
        assert chain.flip_switch(token, OWNER).ok
        assert chain.flip_switch(token, OWNER).ok

    def test_switchless_behavior_rejected(self, chain):
        token = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        assert chain.flip_switch(token, OWNER).reverted

    def test_at_block_auto_switch(self, chain):
        token = chain.deploy_token(
            DelayedSellTax(Fraction(1), trigger=SwitchTrigger.at_block(5)), 10**24, OWNER
        )
        chain.advance_block(3)
        assert chain.switched_at(token) is None
        chain.advance_block(5)
        assert chain.switched_at(token) == 5


class TestBlocks:
    def test_advance(self, chain):
        assert chain.head() == 0
        assert chain.advance_block(1) == 1
        assert chain.advance_block(10) == 11

    def test_snapshot_immutability(self, chain):
        token = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        chain.token_transfer(token, OWNER, ALICE, 100)
        chain.advance_block()
        snapshot_block = chain.head()
        chain.token_transfer(token, OWNER, ALICE, 900)
        chain.advance_block()
        assert chain.balance_of(token, ALICE, snapshot_block).balance == 100
        assert chain.balance_of(token, ALICE, chain.head()).balance == 1000


class TestScripts:
    def test_canonical_drain_scenario(self):
        script, seed = wash_and_drain_script()
        trace = run_attack_script(script, seed)
        assert trace.ground_truth == frozenset({TrapType.UNAUTHORIZED_TRANSFER})
        victim = trace.actors.victims[0]
        head = trace.chain.head()
        assert trace.chain.balance_of(trace.trap_token, victim, head).balance == 0
        assert trace.chain.get_reserves(trace.pool.pool, head) == (0, 0)  # rug pulled
        washes = [
            s for s in trace.chain.get_swaps(trace.pool.pool, (0, head))
            if s.recipient == trace.actors.wash_trader
        ]
        assert len(washes) == 5
        assert all(s.recipient == washes[0].recipient for s in washes)

    def test_honest_script_has_empty_truth(self, honest_trace):
        assert honest_trace.ground_truth == frozenset()

    def test_delayed_script_truth_and_activation(self):
        trace = run_simple(DelayedSellTax(Fraction(9, 10)), extra=(FlipSwitch(),))
        assert trace.ground_truth == frozenset({TrapType.INVALID_SELL})
        assert trace.activation_block is not None

    def test_validation_rejects_bad_scripts(self):
        with pytest.raises(ScriptError):
            validate_script(AttackScript(steps=(CreatePool(),)))
        with pytest.raises(ScriptError):
            validate_script(
                AttackScript(steps=(DeployToken(Honest(Fraction(0))), CreatePool(),
                                    FlipSwitch()))
            )
        with pytest.raises(ScriptError):
            validate_script(
                AttackScript(steps=(DeployToken(Honest(Fraction(0))), CreatePool(),
                                    Drain(victim=0)))
            )

    def test_boundary_parameters_rejected(self):
        with pytest.raises(AmbiguousParameters):
            run_simple(Honest(Fraction(1, 2)))
        with pytest.raises(AmbiguousParameters):
            run_simple(LimitedSell(Fraction(1, 2)))

    def test_determinism_byte_identical(self):
        script, seed = wash_and_drain_script()
        a = run_attack_script(script, seed)
        b = run_attack_script(script, seed)
        assert a.to_jsonl() == b.to_jsonl()
        assert a.ground_truth == b.ground_truth
        assert a.pool == b.pool


class TestInvariants:
    @given(
        transfers=st.lists(
            st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 10**6)),
            max_size=20,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_honest_conservation(self, transfers):
        chain = MockChain()
        actors = [OWNER, ALICE, BOB]
        token = chain.deploy_token(Honest(Fraction(0)), 10**24, OWNER)
        for frm, to, amount in transfers:
            chain.token_transfer(token, actors[frm], actors[to], amount)
        chain.advance_block()
        total = sum(
            chain.balance_of(token, a, chain.head()).balance for a in actors
        )
        assert total == 10**24

    @given(
        swaps=st.lists(st.tuples(st.booleans(), st.integers(1, 10**7)), min_size=1,
                       max_size=15)
    )
    @settings(max_examples=50, deadline=None)
    def test_constant_product_non_decreasing(self, swaps):
        chain = MockChain()
        base, trap, pool = fresh_pool(chain, Honest(Fraction(0)),
                                      x_liq=10**9, y_liq=10**9)
        chain.token_transfer(base, OWNER, ALICE, 10**12)
        chain.token_transfer(trap, OWNER, ALICE, 10**12)
        for buy_base, amount in swaps:
            rx, ry = chain.get_reserves(pool, chain.head())
            k_before = rx * ry
            token_in = base if buy_base else trap
            chain.swap(pool, ALICE, token_in, amount, ALICE)
            chain.advance_block()
            rx2, ry2 = chain.get_reserves(pool, chain.head())
            assert rx2 * ry2 >= k_before

    def test_honest_deltas_fully_logged(self, honest_trace):
        """Every balance change of an honest token is explained by logged
        transfer records (analyzer case-2 must never fire on these)."""
        chain = honest_trace.chain
        token = honest_trace.trap_token
        head = chain.head()
        holders = {honest_trace.actors.wash_trader, *honest_trace.actors.victims}
        transfers = chain.get_transfers(token, (0, head))
        swaps = chain.get_swaps(honest_trace.pool.pool, (0, head))
        for holder in holders:
            expected = 0
            for rec in transfers:
                if rec.recipient == holder:
                    expected += rec.value
                if rec.sender == holder:
                    expected -= rec.value
            assert chain.balance_of(token, holder, head).balance == expected
        # and swap records agree with the logged pool deliveries
        for swap in swaps:
            if swap.token_out != token:
                continue
            delivered = [
                r for r in transfers
                if r.block == swap.block and r.recipient == swap.recipient
                and r.sender == honest_trace.pool.pool
            ]
            assert delivered and delivered[0].value == swap.amount_out
