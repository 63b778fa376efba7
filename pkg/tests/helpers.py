"""Shared fixtures for the federated tests: stub clients and fault injection."""

import numpy as np

from fedvqc.federated import ClientUpdate


class StubClient:
    """Returns fixed parameters without training."""

    def __init__(self, client_id, params, num_samples=1):
        self.client_id = client_id
        self.params = np.asarray(params, dtype=float)
        self.num_samples = num_samples

    def train(self, global_model, round_index):
        return ClientUpdate(round_index, self.client_id, self.params, self.num_samples)


class FaultyTransport:
    """Wraps a transport and damages the frame sent by one client."""

    def __init__(self, inner, victim, damage):
        self.inner = inner
        self.victim = victim
        self.damage = damage
        self.damaged = 0

    def send(self, frame):
        client_id = int.from_bytes(frame[8:12], "little")
        if client_id == self.victim:
            frame = self.damage(frame)
            self.damaged += 1
        self.inner.send(frame)

    def recv(self, timeout=None):
        return self.inner.recv(timeout)


def flip_byte(rng):
    def damage(frame):
        frame = bytearray(frame)
        pos = int(rng.integers(4, len(frame)))
        frame[pos] ^= int(rng.integers(1, 256))
        return bytes(frame)
    return damage


def truncate(rng):
    def damage(frame):
        return frame[:int(rng.integers(0, len(frame)))]
    return damage
