"""Stratified scenario corpus generation.

Families cover every trap behavior plus honest controls. Parameters are
sampled away from the 50% decision boundary (controls at most 49%, traps
at least 51%) and trade sizes keep the estimator above a few thousand
units of resolution, so every generated scenario has an unambiguous
label. Generation is deterministic for a fixed seed, and each scenario is
executed once at generation time so the embedded label is the one the
script actually produces.
"""

from __future__ import annotations

import random
from pathlib import Path

from .mockchain.scenario_io import dump_scenario, parse_scenario, scenario_to_doc
from .mockchain.scripts import run_attack_script

TRAP_FAMILIES = (
    "hidden_tax",
    "high_tax",
    "owner_drain",
    "list_gate",
    "limited_sell",
    "delayed_sell_tax",
)

HONEST_SHARE = 4  # one honest control per 4 scenarios


def _rat(rng: random.Random, lo_pct: int, hi_pct: int, den: int = 100) -> str:
    return f"{rng.randint(lo_pct, hi_pct)}/{den}"


def _sized_steps(rng: random.Random, extra: list[dict] | None = None) -> tuple[list[dict], int]:
    """Common script skeleton: liquidity, wash trades, victim buys.

    Returns (steps, victim_count). Amounts keep buys in the 0.05%-0.2%
    band of the base reserve.
    """
    base_liq = rng.choice([10**9, 10**10, 10**11])
    ratio_num, ratio_den = rng.choice([(1, 2), (1, 1), (2, 1), (4, 1), (1, 4)])
    y_liq = base_liq * ratio_num // ratio_den
    wash_amount = base_liq * rng.randint(2, 10) // 10_000  # 0.02% - 0.1%
    victim_count = rng.randint(1, 3)
    steps: list[dict] = [
        {"op": "deploy_token", "token": 0},
        {"op": "create_pool", "pool": 0},
        {"op": "add_liquidity", "x": str(base_liq), "y": str(y_liq)},
        {"op": "wash_buy", "amount": str(wash_amount), "times": rng.randint(2, 4)},
    ]
    for v in range(victim_count):
        amount = base_liq * rng.randint(5, 20) // 10_000  # 0.05% - 0.2%
        steps.append({"op": "victim_buy", "victim": v, "amount": str(amount)})
    steps.extend(extra or [])
    steps.append({"op": "wait", "blocks": 3})
    if rng.random() < 0.3:
        steps.append({"op": "remove_liquidity"})
        steps.append({"op": "wait", "blocks": 1})
    return steps, victim_count


def _setup_blocks() -> int:
    # base-token deploy + actor funding, sealed before script steps run
    return 2


def _step_width(step: dict) -> int:
    if step["op"] == "wash_buy":
        return int(step.get("times", 1))
    if step["op"] == "wait":
        return int(step.get("blocks", 1))
    return 1


def _block_of_step(steps: list[dict], index: int) -> int:
    """First block the given step executes in."""
    return _setup_blocks() + 1 + sum(_step_width(s) for s in steps[:index])


def generate_scenario(family: str, seed: int, index: int) -> dict:
    """One scenario document for a behavior family; deterministic."""
    rng = random.Random((seed << 20) ^ index)
    scenario_seed = rng.randrange(2**31)
    name = f"{family}_{index:03d}"

    if family == "honest":
        behavior = ("honest", {"tax": _rat(rng, 0, 49)})
        steps, _ = _sized_steps(rng)
    elif family == "high_tax":
        pct = rng.choice([*range(51, 100), 100])
        behavior = ("honest", {"tax": f"{pct}/100"})
        steps, _ = _sized_steps(rng)
    elif family == "hidden_tax":
        behavior = (
            "hidden_tax",
            {"keep_fraction": _rat(rng, 5, 45), "exempt": ["creator"]},
        )
        steps, _ = _sized_steps(rng)
    elif family == "owner_drain":
        emits = index % 2 == 0
        behavior = ("owner_drain", {"emits_event": emits})
        steps, victims = _sized_steps(rng, extra=[{"op": "drain", "victim": 0}])
    elif family == "list_gate":
        if rng.random() < 0.7:
            behavior = ("list_gate", {"mode": "allow", "members": [], "global_open": False})
            steps, _ = _sized_steps(rng)
        else:
            steps, victims = _sized_steps(rng)
            members = [f"victim:{v}" for v in range(victims)]
            behavior = ("list_gate", {"mode": "deny", "members": members})
    elif family == "limited_sell":
        behavior = (
            "limited_sell",
            {"max_sell_rate": f"{rng.randint(5, 450)}/1000", "fee_exempt": ["creator", "wash"]},
        )
        steps, _ = _sized_steps(rng)
    elif family == "delayed_sell_tax":
        final = _rat(rng, 55, 100)
        style = rng.choice(["manual", "at_block", "after_buyers"])
        steps, victims = _sized_steps(rng)
        if style == "manual":
            insert_at = _last_buy_index(steps) + 1
            steps.insert(insert_at, {"op": "flip_switch"})
            trigger = {"kind": "manual"}
        elif style == "at_block":
            activation = _block_of_step(steps, _last_buy_index(steps) + 1)
            trigger = {"kind": "at_block", "value": activation}
        else:
            trigger = {"kind": "after_buyers", "value": 2}
        behavior = ("delayed_sell_tax", {"final_sell_tax": final, "trigger": trigger})
    else:
        raise ValueError(f"unknown family: {family}")

    kind, params = behavior
    doc = scenario_to_doc(
        seed=scenario_seed,
        name=name,
        behavior_kind=kind,
        params=params,
        supply=10**27,
        steps=steps,
    )
    scenario = parse_scenario(doc)
    trace = run_attack_script(scenario.script, scenario.seed)
    doc["expected_traps"] = sorted(t.value for t in trace.ground_truth)
    return doc


def _last_buy_index(steps: list[dict]) -> int:
    last = 0
    for i, s in enumerate(steps):
        if s["op"] in ("victim_buy", "wash_buy"):
            last = i
    return last


def corpus_families(n: int) -> list[str]:
    """Family per scenario index: one honest control in four, the rest
    cycling through the trap families evenly."""
    honest = n // HONEST_SHARE
    families: list[str] = ["honest"] * honest
    i = 0
    while len(families) < n:
        families.append(TRAP_FAMILIES[i % len(TRAP_FAMILIES)])
        i += 1
    return families


def gen_corpus(n: int, seed: int, out_dir: str | Path) -> list[Path]:
    """Write n labeled scenario files; byte-identical on rerun."""
    if n < 1:
        raise ValueError("need n >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for index, family in enumerate(corpus_families(n)):
        doc = generate_scenario(family, seed, index)
        path = out / f"{index:03d}_{family}.json"
        path.write_text(dump_scenario(doc))
        paths.append(path)
    return paths
