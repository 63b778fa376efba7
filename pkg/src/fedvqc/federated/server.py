"""Round orchestration: broadcast, concurrent local training, collection, aggregation."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import ProtocolError, RoundFailure, TransportError
from .aggregation import GlobalModel, fedavg_aggregate
from .wire import deserialize_update, pack_update

log = logging.getLogger(__name__)

MODES = ("strict", "tolerate_stragglers")


@dataclass
class ServerState:
    model: GlobalModel
    num_params: int
    weighted: bool = False
    mode: str = "strict"
    timeout: float = 30.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    accuracy: float
    loss: float
    num_updates: int
    rejected: tuple = field(default=())


def _client_task(client, model, round_index, transport):
    update = client.train(model, round_index)
    transport.send(pack_update(update))


def collect_updates(transport, round_index, expected_ids, num_params, timeout):
    """Receive one item per expected client; returns ``(updates, errors)``."""
    updates, errors, seen = [], [], set()
    for _ in range(len(expected_ids)):
        try:
            update = deserialize_update(transport.recv(timeout=timeout))
            if update.round != round_index:
                raise ProtocolError(f"update for round {update.round} during round {round_index}")
            if update.client_id not in expected_ids:
                raise ProtocolError(f"unknown client id {update.client_id}")
            if update.client_id in seen:
                raise ProtocolError(f"duplicate update from client {update.client_id}")
            if update.params.size != num_params:
                raise ProtocolError(f"client {update.client_id} sent {update.params.size} params, expected {num_params}")
            seen.add(update.client_id)
            updates.append(update)
        except ProtocolError as exc:
            errors.append(exc)
            if isinstance(exc, TransportError) and "no frame within" in str(exc):
                break
    return updates, errors


def run_round(state, clients, transport, evaluate, max_workers=None):
    """One federated round; returns ``(GlobalModel, RoundMetrics)``.

    ``evaluate(params) -> (accuracy, loss)`` scores the aggregated model on
    held-out data owned by the caller. In strict mode any rejected or missing
    update fails the round before aggregation. In ``tolerate_stragglers`` mode
    at least ``ceil(K / 2)`` valid updates are aggregated.
    """
    round_index = state.model.round + 1
    expected = {c.client_id for c in clients}
    if len(expected) != len(clients):
        raise ProtocolError("client ids must be distinct")
    workers = max_workers or len(clients)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_client_task, c, state.model, round_index, transport) for c in clients]
    failed = [f.exception() for f in futures if f.exception() is not None]
    if failed:
        raise RoundFailure(f"round {round_index}: client training failed: {failed[0]}") from failed[0]
    updates, errors = collect_updates(transport, round_index, expected, state.num_params, state.timeout)

    K = len(clients)
    if errors or len(updates) < K:
        reasons = [str(e) for e in errors] or [f"received {len(updates)} of {K} updates"]
        if state.mode == "strict" or len(updates) < math.ceil(K / 2):
            raise RoundFailure(f"round {round_index} failed: " + "; ".join(reasons)) from (errors[0] if errors else None)
        log.warning("round %d: aggregating %d of %d updates (%s)", round_index, len(updates), K, "; ".join(reasons))

    aggregated = fedavg_aggregate(updates, weighted=state.weighted, num_params=state.num_params)
    model = GlobalModel(aggregated.params, round_index)
    accuracy, loss = evaluate(model.params)
    state.model = model
    return model, RoundMetrics(round_index, float(accuracy), float(loss), len(updates),
                               tuple(str(e) for e in errors))
