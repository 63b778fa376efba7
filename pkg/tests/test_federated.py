import math
import struct
import threading
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedvqc.data import load_iris, select_and_scale, split_and_partition
from fedvqc.errors import ProtocolError, RoundFailure, TransportError
from fedvqc.federated import (ClientUpdate, FederatedClient, GlobalModel, InProcessTransport,
                              LoopbackSocketTransport, ServerState, fedavg_aggregate, run_round)
from fedvqc.federated.wire import (MAX_FRAME, decode_frame, deserialize_update, encode_frame, pack_update,
                                   read_frame, serialize_update, unpack_update)
from fedvqc.qnn import QNNClassifier

from helpers import FaultyTransport, StubClient, flip_byte, truncate


def upd(cid, params, n=1, rnd=1):
    return ClientUpdate(rnd, cid, np.asarray(params, dtype=float), n)


# -- aggregation --------------------------------------------------------------

def test_fedavg_examples():
    g = fedavg_aggregate([upd(0, [1, 2]), upd(1, [3, 4])])
    assert g.params.tolist() == [2, 3]
    g = fedavg_aggregate([upd(0, [0]), upd(1, [1])], weighted=True)
    assert g.params.tolist() == [0.5]
    g = fedavg_aggregate([upd(0, [0], n=1), upd(1, [1], n=3)], weighted=True)
    assert g.params.tolist() == [0.75]


def test_fedavg_single_update_is_identity(rng):
    th = rng.normal(size=16)
    assert fedavg_aggregate([upd(0, th)]).params.tobytes() == th.tobytes()


def test_fedavg_identical_updates_bit_exact(rng):
    for K in range(1, 8):
        th = rng.normal(size=16) * 10 ** rng.uniform(-5, 5)
        g = fedavg_aggregate([upd(i, th) for i in range(K)])
        assert g.params.tobytes() == th.tobytes()


def test_fedavg_matches_rational_oracle(rng):
    for _ in range(20):
        K = int(rng.integers(1, 9))
        P = np.array([rng.normal(size=5) * 1e3 for _ in range(K)])
        ns = rng.integers(1, 50, K)
        for weighted in (False, True):
            w = ns if weighted else np.ones(K, int)
            ref = [float(sum(Fraction(int(w[k])) * Fraction(P[k, j]) for k in range(K)) / int(w.sum()))
                   for j in range(5)]
            got = fedavg_aggregate([upd(k, P[k], int(ns[k])) for k in range(K)], weighted=weighted)
            assert got.params.tolist() == ref
            np.testing.assert_allclose(got.params, np.average(P, axis=0, weights=w), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(1, 8), weighted=st.booleans())
def test_fedavg_permutation_invariant(seed, K, weighted):
    rng = np.random.default_rng(seed)
    ups = [upd(k, rng.normal(size=4) * 10 ** rng.uniform(-8, 8), int(rng.integers(1, 100))) for k in range(K)]
    a = fedavg_aggregate(ups, weighted)
    b = fedavg_aggregate([ups[i] for i in rng.permutation(K)], weighted)
    assert a.params.tobytes() == b.params.tobytes()
    lo = np.min([u.params for u in ups], axis=0)
    hi = np.max([u.params for u in ups], axis=0)
    assert np.all(lo <= a.params) and np.all(a.params <= hi)


def test_fedavg_rejects_bad_sets():
    with pytest.raises(ProtocolError):
        fedavg_aggregate([])
    with pytest.raises(ProtocolError):
        fedavg_aggregate([upd(0, [1, 2]), upd(1, [1])])
    with pytest.raises(ProtocolError):
        fedavg_aggregate([upd(0, [1]), upd(0, [2])])
    with pytest.raises(ProtocolError):
        fedavg_aggregate([upd(0, [1], rnd=1), upd(1, [2], rnd=2)])
    with pytest.raises(ProtocolError):
        fedavg_aggregate([upd(0, [1, 2])], num_params=16)


def test_global_model_requires_finite():
    with pytest.raises(ValueError):
        GlobalModel([np.nan])


# -- wire format --------------------------------------------------------------

def test_wire_layout_explicit():
    u = ClientUpdate(3, 7, np.array([1.5, -2.0]), 11)
    payload = serialize_update(u)
    assert payload == struct.pack("<III", 3, 7, 2) + struct.pack("<2d", 1.5, -2.0) + struct.pack("<I", 11)
    frame = encode_frame(payload)
    assert frame[:4] == len(payload).to_bytes(4, "big")
    import zlib
    assert frame[-4:] == zlib.crc32(payload).to_bytes(4, "big")


@settings(max_examples=100, deadline=None)
@given(rnd=st.integers(0, 2**32 - 1), cid=st.integers(0, 2**32 - 1), n=st.integers(1, 2**32 - 1),
       params=st.lists(st.floats(allow_nan=False), max_size=64))
def test_wire_round_trip(rnd, cid, n, params):
    u = ClientUpdate(rnd, cid, np.array(params, dtype=float), n)
    back = unpack_update(pack_update(u))
    assert back == u and back.checksum is not None


def test_wire_preserves_nan_bits():
    p = np.array([np.nan, -0.0, np.inf])
    back = unpack_update(pack_update(ClientUpdate(0, 0, p, 1)))
    assert back.params.tobytes() == p.tobytes()


def test_decode_rejects_damage(rng):
    frame = pack_update(upd(0, rng.normal(size=16)))
    with pytest.raises(TransportError):
        decode_frame(frame[:-1])
    with pytest.raises(TransportError):
        decode_frame(frame[:5])
    bad = bytearray(frame)
    bad[20] ^= 1
    with pytest.raises(TransportError, match="CRC"):
        decode_frame(bytes(bad))
    with pytest.raises(TransportError):
        decode_frame((MAX_FRAME + 1).to_bytes(4, "big") + frame[4:])
    with pytest.raises(TransportError):
        encode_frame(b"\0" * (MAX_FRAME + 1))


def test_deserialize_rejects_inconsistent_payloads():
    with pytest.raises(TransportError):
        deserialize_update(b"\0" * 10)
    with pytest.raises(TransportError):
        deserialize_update(struct.pack("<III", 0, 0, 3) + b"\0" * 8 + struct.pack("<I", 1))
    with pytest.raises(TransportError):
        deserialize_update(struct.pack("<III", 0, 0, 0) + struct.pack("<I", 0))


def test_read_frame_over_chunks():
    frame = pack_update(upd(2, [1.0, 2.0, 3.0]))
    buf = bytearray(frame + frame)

    def read(n):
        out = bytes(buf[:min(n, 3)])
        del buf[:len(out)]
        return out

    assert unpack_update(encode_frame(read_frame(read))) == upd(2, [1.0, 2.0, 3.0])
    assert read_frame(read) is not None
    assert read_frame(read) is None


def test_read_frame_truncated_raises():
    frame = pack_update(upd(0, [1.0]))
    buf = bytearray(frame[:-2])

    def read(n):
        out = bytes(buf[:n])
        del buf[:len(out)]
        return out

    with pytest.raises(TransportError, match="truncated"):
        read_frame(read)


# -- transports ----------------------------------------------------------------

@pytest.mark.parametrize("cls", [InProcessTransport, LoopbackSocketTransport])
def test_transport_delivers_and_rejects(cls):
    with cls() as t:
        good = pack_update(upd(1, [0.5]))
        t.send(good)
        assert t.recv(timeout=5) == decode_frame(good)
        t.send(good[:-3])
        with pytest.raises(TransportError):
            t.recv(timeout=5)
        with pytest.raises(TransportError, match="no frame"):
            t.recv(timeout=0.05)


# -- rounds ----------------------------------------------------------------------

def iris_clients(K, local_iterations=1):
    ds, _ = select_and_scale(load_iris(), 4)
    split = split_and_partition(ds, 0.2, K, seed=0)
    model = QNNClassifier(num_classes=3)
    clients = [FederatedClient(k, model, ds.features[idx], ds.labels[idx], local_iterations)
               for k, idx in enumerate(split.client_shards)]
    test = split.test_idx

    def evaluate(params):
        pred = model.predict(params, ds.features[test])
        return float(np.mean(pred == ds.labels[test])), 0.0

    return model, clients, evaluate


def test_single_client_round_equals_local_training(rng):
    model, clients, evaluate = iris_clients(1)
    th = rng.uniform(0, 2 * np.pi, model.num_params)
    state = ServerState(GlobalModel(th), model.num_params)
    from fedvqc.training import AdamState, train_local
    ref = train_local(model, clients[0].features, clients[0].labels, th, AdamState.fresh(model.num_params), 1)
    g, metrics = run_round(state, clients, InProcessTransport(), evaluate)
    assert g.params.tobytes() == ref.params.tobytes()
    assert g.round == 1 and metrics.num_updates == 1


def test_identical_shards_round_equals_local_training(rng):
    model, clients, evaluate = iris_clients(1)
    c = clients[0]
    twins = [FederatedClient(k, model, c.features, c.labels) for k in range(4)]
    th = rng.uniform(0, 2 * np.pi, model.num_params)
    g1, _ = run_round(ServerState(GlobalModel(th), model.num_params), [c], InProcessTransport(), evaluate)
    g4, _ = run_round(ServerState(GlobalModel(th), model.num_params), twins, InProcessTransport(), evaluate)
    assert g1.params.tobytes() == g4.params.tobytes()


def test_strict_round_fails_on_corruption_and_keeps_model(rng):
    clients = [StubClient(k, np.full(4, float(k))) for k in range(3)]
    state = ServerState(GlobalModel(np.zeros(4)), 4, timeout=2)
    t = FaultyTransport(InProcessTransport(), victim=1, damage=flip_byte(rng))
    with pytest.raises(RoundFailure) as exc:
        run_round(state, clients, t, lambda p: (0.0, 0.0))
    assert isinstance(exc.value.__cause__, ProtocolError)
    assert state.model.round == 0 and not state.model.params.any()


def test_tolerate_stragglers_aggregates_majority(rng):
    clients = [StubClient(k, np.full(2, float(k))) for k in range(3)]
    state = ServerState(GlobalModel(np.zeros(2)), 2, mode="tolerate_stragglers", timeout=2)
    t = FaultyTransport(InProcessTransport(), victim=2, damage=truncate(rng))
    g, metrics = run_round(state, clients, t, lambda p: (1.0, 0.0))
    assert g.params.tolist() == [0.5, 0.5]
    assert metrics.num_updates == 2 and len(metrics.rejected) == 1


def test_tolerate_stragglers_needs_half():
    class Broken:
        def send(self, frame):
            pass

        def recv(self, timeout=None):
            raise TransportError(f"no frame within {timeout} s")

    state = ServerState(GlobalModel(np.zeros(1)), 1, mode="tolerate_stragglers", timeout=0.01)
    with pytest.raises(RoundFailure):
        run_round(state, [StubClient(k, [1.0]) for k in range(3)], Broken(), lambda p: (0, 0))


def test_client_exception_fails_round():
    class Exploding(StubClient):
        def train(self, global_model, round_index):
            raise FloatingPointError("boom")

    state = ServerState(GlobalModel(np.zeros(1)), 1, timeout=1)
    with pytest.raises(RoundFailure) as exc:
        run_round(state, [StubClient(0, [1.0]), Exploding(1, [1.0])], InProcessTransport(), lambda p: (0, 0))
    assert isinstance(exc.value.__cause__, FloatingPointError)


def test_wrong_round_or_length_is_rejected():
    class Stale(StubClient):
        def train(self, global_model, round_index):
            return ClientUpdate(round_index + 5, self.client_id, self.params, 1)

    state = ServerState(GlobalModel(np.zeros(2)), 2, timeout=1)
    with pytest.raises(RoundFailure, match="round"):
        run_round(state, [Stale(0, [1.0, 2.0])], InProcessTransport(), lambda p: (0, 0))
    with pytest.raises(RoundFailure, match="params"):
        run_round(state, [StubClient(0, [1.0])], InProcessTransport(), lambda p: (0, 0))


def test_concurrent_rounds_are_exact(rng):
    K = 5
    params = rng.normal(size=(K, 16))
    expected = fedavg_aggregate([upd(k, params[k]) for k in range(K)]).params
    clients = [StubClient(k, params[k]) for k in range(K)]
    transport = InProcessTransport()
    state = ServerState(GlobalModel(np.zeros(16)), 16, timeout=5)
    for r in range(1000):
        g, m = run_round(state, clients, transport, lambda p: (0.0, 0.0))
        assert g.round == r + 1 and m.num_updates == K
        assert g.params.tobytes() == expected.tobytes()


def test_concurrent_rounds_over_sockets(rng):
    K = 5
    params = rng.normal(size=(K, 8))
    expected = fedavg_aggregate([upd(k, params[k]) for k in range(K)]).params
    clients = [StubClient(k, params[k]) for k in range(K)]
    with LoopbackSocketTransport() as transport:
        state = ServerState(GlobalModel(np.zeros(8)), 8, timeout=5)
        for _ in range(100):
            g, _ = run_round(state, clients, transport, lambda p: (0.0, 0.0))
            assert g.params.tobytes() == expected.tobytes()


def test_socket_and_inprocess_bit_identical():
    results = []
    for transport_cls in (InProcessTransport, LoopbackSocketTransport):
        model, clients, evaluate = iris_clients(5)
        th = np.random.default_rng(3).uniform(0, 2 * np.pi, model.num_params)
        state = ServerState(GlobalModel(th), model.num_params, timeout=10)
        trace = []
        with transport_cls() as t:
            for _ in range(3):
                g, m = run_round(state, clients, t, evaluate)
                trace.append((g.params.tobytes(), m.accuracy))
        results.append(trace)
    assert results[0] == results[1]


def test_frames_carry_no_raw_features():
    model, clients, evaluate = iris_clients(3)
    transport = InProcessTransport()
    state = ServerState(GlobalModel(np.full(model.num_params, 0.3)), model.num_params)
    run_round(state, clients, transport, evaluate)
    blob = b"".join(transport.sent_frames)
    P = model.num_params
    assert all(len(f) == 4 + 12 + 8 * P + 4 + 4 for f in transport.sent_frames)
    for c in clients:
        for value in np.unique(c.features):
            if value not in (0.0, np.pi / 2):
                assert np.float64(value).tobytes() not in blob
