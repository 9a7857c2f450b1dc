"""In-memory deterministic chain, trap behavior models, and attack scripts."""

from .behaviors import (
    DelayedSellTax,
    GateMode,
    HiddenTax,
    Honest,
    LimitedSell,
    ListGate,
    OwnerDrain,
    SwitchTrigger,
    TokenBehavior,
    TransferContext,
    TriggerKind,
)
from .chain import MockChain
from .scenario_io import (
    SCENARIO_SCHEMA,
    Scenario,
    ScenarioFormatError,
    dump_scenario,
    load_scenario,
    parse_scenario,
    scenario_to_doc,
)
from .scripts import (
    AddLiquidity,
    AmbiguousParameters,
    AttackScript,
    CreatePool,
    DeployToken,
    Drain,
    FlipSwitch,
    RemoveLiquidity,
    ScenarioActors,
    ScenarioTrace,
    ScriptError,
    VictimBuy,
    Wait,
    WashBuy,
    derive_actors,
    derive_ground_truth,
    run_attack_script,
    validate_script,
    wash_and_drain_script,
)

__all__ = [
    "AddLiquidity",
    "AmbiguousParameters",
    "AttackScript",
    "CreatePool",
    "DelayedSellTax",
    "DeployToken",
    "Drain",
    "FlipSwitch",
    "GateMode",
    "HiddenTax",
    "Honest",
    "LimitedSell",
    "ListGate",
    "MockChain",
    "OwnerDrain",
    "RemoveLiquidity",
    "SCENARIO_SCHEMA",
    "Scenario",
    "ScenarioActors",
    "ScenarioFormatError",
    "ScenarioTrace",
    "ScriptError",
    "SwitchTrigger",
    "TokenBehavior",
    "TransferContext",
    "TriggerKind",
    "VictimBuy",
    "Wait",
    "WashBuy",
    "derive_actors",
    "derive_ground_truth",
    "dump_scenario",
    "load_scenario",
    "parse_scenario",
    "run_attack_script",
    "scenario_to_doc",
    "validate_script",
    "wash_and_drain_script",
]
