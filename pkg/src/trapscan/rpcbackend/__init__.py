"""Live JSON-RPC chain backend: log fetching, event decoding, bundle simulation."""

from .abi import ALL_SIGNATURES, DecodeError, EventSignature, erc20_balance_slot, selector
from .backend import (
    RpcChainView,
    V2_FACTORY,
    V2_ROUTER,
    V3_FACTORY,
    V3_QUOTER,
    V3_ROUTER,
)
from .client import (
    EndpointConfig,
    JsonRpcClient,
    MethodNotSupported,
    NodeLimitError,
    RpcError,
    TransportError,
    load_backend_config,
)
from .keccak import keccak256, keccak256_text

__all__ = [
    "ALL_SIGNATURES",
    "DecodeError",
    "EndpointConfig",
    "EventSignature",
    "JsonRpcClient",
    "MethodNotSupported",
    "NodeLimitError",
    "RpcChainView",
    "RpcError",
    "TransportError",
    "V2_FACTORY",
    "V2_ROUTER",
    "V3_FACTORY",
    "V3_QUOTER",
    "V3_ROUTER",
    "erc20_balance_slot",
    "keccak256",
    "keccak256_text",
    "load_backend_config",
    "selector",
]
