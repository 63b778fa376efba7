"""Parameter aggregation across client updates."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ProtocolError


@dataclass(frozen=True)
class GlobalModel:
    params: np.ndarray
    round: int = 0

    def __post_init__(self):
        params = np.array(self.params, dtype=float)
        if not np.all(np.isfinite(params)):
            raise ValueError("global parameters must be finite")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)


def validate_updates(updates, num_params=None):
    if not updates:
        raise ProtocolError("no updates to aggregate")
    rounds = {u.round for u in updates}
    if len(rounds) != 1:
        raise ProtocolError(f"updates from mixed rounds {sorted(rounds)}")
    ids = [u.client_id for u in updates]
    if len(set(ids)) != len(ids):
        raise ProtocolError(f"duplicate client ids in {ids}")
    sizes = {u.params.size for u in updates}
    if len(sizes) != 1 or (num_params is not None and sizes != {num_params}):
        raise ProtocolError(f"parameter length mismatch: {sorted(sizes)} (expected {num_params})")


def fedavg_aggregate(updates, weighted=False, num_params=None):
    """Componentwise mean of client parameters (optionally weighted by sample count).

    The mean is computed in exact rational arithmetic and rounded once, so it
    is independent of update order and K copies of ``theta`` give back
    ``theta`` bit for bit.
    """
    validate_updates(updates, num_params)
    weights = [u.num_samples if weighted else 1 for u in updates]
    total = sum(weights)
    columns = zip(*(u.params.tolist() for u in updates))
    mean = [float(sum(w * Fraction(x) for w, x in zip(weights, col)) / total) for col in columns]
    return GlobalModel(np.array(mean), updates[0].round)
