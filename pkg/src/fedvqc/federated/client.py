"""A federated client: private data shard, local optimizer, update packaging."""

from dataclasses import dataclass, field

import numpy as np

from ..training import AdamState, train_local
from .wire import ClientUpdate


@dataclass
class FederatedClient:
    client_id: int
    model: object
    features: np.ndarray
    labels: np.ndarray
    local_iterations: int = 1
    step_size: float = 0.1
    reset_adam: bool = True
    adam: AdamState = None
    loss_log: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.size == 0:
            from ..errors import ConfigurationError
            raise ConfigurationError(f"client {self.client_id} has an empty data shard")

    @property
    def num_samples(self):
        return int(self.labels.size)

    def train(self, global_model, round_index):
        if self.adam is None or self.reset_adam:
            self.adam = AdamState.fresh(self.model.num_params, self.step_size)
        result = train_local(self.model, self.features, self.labels, global_model.params,
                             self.adam, self.local_iterations)
        self.adam = result.adam
        for it, rep in enumerate(result.losses):
            self.loss_log.append((round_index, self.client_id, it, rep.mse))
        return ClientUpdate(round_index, self.client_id, result.params, self.num_samples)
