"""Federated orchestration: wire format, transports, aggregation, density averaging."""

from .aggregation import GlobalModel, fedavg_aggregate
from .client import FederatedClient
from .density import DensityMatrix, riemannian_average, schatten_average, schatten_norm
from .server import RoundMetrics, ServerState, run_round
from .transport import InProcessTransport, LoopbackSocketTransport
from .wire import ClientUpdate, decode_frame, deserialize_update, encode_frame, serialize_update

__all__ = [
    "ClientUpdate", "DensityMatrix", "FederatedClient", "GlobalModel", "InProcessTransport",
    "LoopbackSocketTransport", "RoundMetrics", "ServerState", "decode_frame", "deserialize_update",
    "encode_frame", "fedavg_aggregate", "riemannian_average", "run_round", "schatten_average",
    "schatten_norm", "serialize_update",
]
