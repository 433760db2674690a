import hashlib
import random
import socket
import struct
import threading
import time

import numpy as np
import pytest

from evoflow.errors import AllGatherTimeout, ConfigurationError, HandshakeError, ProtocolError
from evoflow.runtime import protocol as proto
from evoflow.runtime.spmd import ClusterConfig, SpmdComm, free_port
from support import HASH, cluster as _cluster, run_nodes

# --- framing -----------------------------------------------------------------------------


def test_hello_layout():
    msg = proto.pack_hello(3, 4, HASH)
    length, kind = struct.unpack(">IB", msg[:5])
    assert kind == 0x01 and length == 1 + 4 + 4 + 32 == len(msg) - 4
    assert msg[5:9] == (3).to_bytes(4, "big") and msg[9:13] == (4).to_bytes(4, "big")
    assert msg[13:] == HASH


def test_shard_layout_and_round_trip():
    m = np.array([[1.5, -2.0], [3.25, 4.0], [0.0, 1e300]])
    msg = proto.pack_shard(7, 12, m)
    assert msg[4] == 0x02
    body = msg[5:]
    assert body[:8] == (7).to_bytes(8, "big")
    assert body[8:12] == (12).to_bytes(4, "big")
    assert body[12:20] == (3).to_bytes(4, "big") + (2).to_bytes(4, "big")
    assert body[20:28] == struct.pack("<d", 1.5)
    it, off, out = proto.unpack_matrix(body)
    assert (it, off) == (7, 12) and np.array_equal(out, m)


def test_gathered_and_abort():
    msg = proto.pack_gathered(2, np.ones((1, 1)))
    assert msg[4] == 0x03 and proto.unpack_matrix(msg[5:])[1] == 0
    ab = proto.pack_abort("bye")
    assert ab[4] == 0x04 and ab[5:] == b"bye"


def test_frame_reader_incremental():
    stream = proto.pack_hello(1, 2, HASH) + proto.pack_shard(0, 0, np.eye(2)) + proto.pack_abort("x")
    reader = proto.FrameReader()
    frames = []
    for i in range(0, len(stream), 3):
        frames += reader.feed(stream[i : i + 3])
    assert [k for k, _ in frames] == [1, 2, 4]


def test_truncated_matrix():
    with pytest.raises(ProtocolError):
        proto.unpack_matrix(proto.pack_shard(0, 0, np.eye(2))[5:-1])


# --- cluster config ----------------------------------------------------------------------


def test_cluster_config_validation():
    with pytest.raises(ConfigurationError):
        ClusterConfig("worker", 2, 2)
    with pytest.raises(ConfigurationError):
        ClusterConfig("coordinator", 1, 2)
    with pytest.raises(ConfigurationError):
        ClusterConfig("single", 0, 2)
    with pytest.raises(ConfigurationError):
        ClusterConfig.from_address("worker", 1, 2, "localhost")
    assert ClusterConfig.from_address("worker", 1, 2, "10.0.0.1:7000").port == 7000


# --- all-gather --------------------------------------------------------------------------


def test_world_one_is_identity():
    comm = SpmdComm(ClusterConfig(), HASH).open()
    x = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(comm.all_gather(x, 0), x)


def test_three_nodes_gather_in_node_order():
    out = run_nodes(3, lambda i, c: c.all_gather(np.array([[float(i + 1)]]), 0, row_offset=i))
    for r in out:
        assert np.array_equal(r, [[1.0], [2.0], [3.0]])


def test_uneven_and_empty_shards():
    sizes = [2, 0, 3]
    offsets = [0, 2, 2]

    def body(i, c):
        return c.all_gather(np.full((sizes[i], 2), float(i)), 0, row_offset=offsets[i])

    out = run_nodes(3, body)
    expect = np.vstack([np.full((s, 2), float(i)) for i, s in enumerate(sizes)])
    for r in out:
        assert np.array_equal(r, expect)


def test_random_delays_do_not_change_result():
    def body(i, c):
        rng = random.Random(i * 7919)
        got = []
        for t in range(15):
            time.sleep(rng.uniform(0, 0.01))
            got.append(c.all_gather(np.array([[t * 10.0 + i]]), t, row_offset=i))
        return got

    out = run_nodes(4, body)
    for r in out:
        assert not isinstance(r, BaseException), r
        for t, m in enumerate(r):
            assert m[:, 0].tolist() == [t * 10.0 + i for i in range(4)]


def test_barrier_has_zero_iteration_skew():
    lock = threading.Lock()
    progress = [0] * 3
    max_skew = [0]
    delays = [0.0, 0.004, 0.012]

    def body(i, c):
        for t in range(20):
            time.sleep(delays[i])
            c.all_gather(np.zeros((1, 1)), t, row_offset=i)
            with lock:
                progress[i] = t + 1
                # a node past the barrier for t may start t+1 while others still hold t,
                # but nobody can be two iterations ahead, and nobody enters t+1's gather early
                max_skew[0] = max(max_skew[0], max(progress) - min(progress) - 1)
        return progress[i]

    out = run_nodes(3, body)
    assert out == [20, 20, 20]
    assert max_skew[0] <= 0


def test_hash_mismatch_rejected():
    other = hashlib.sha256(b"other config").digest()
    out = run_nodes(2, lambda i, c: "opened", hashes=[HASH, other])
    assert all(isinstance(r, HandshakeError) for r in out)
    assert "config hash" in str(out[0])


def test_world_size_mismatch_rejected():
    port = free_port()
    errors = []

    def coord():
        try:
            SpmdComm(_cluster(0, 2, port), HASH, timeout=5).open()
        except BaseException as exc:
            errors.append(exc)

    t = threading.Thread(target=coord)
    t.start()
    with pytest.raises(HandshakeError):
        SpmdComm(ClusterConfig("worker", 1, 3, "127.0.0.1", port), HASH, timeout=5).open()
    t.join(10)
    assert isinstance(errors[0], HandshakeError)


def test_timeout_names_missing_node():
    def body(i, c):
        if i == 2:
            time.sleep(1.5)
            return "slept"
        return c.all_gather(np.zeros((1, 1)), 0, row_offset=i)

    # workers wait longer than the coordinator so the coordinator's deadline fires first
    out = run_nodes(3, body, timeout=[0.5, 3.0, 3.0])
    assert isinstance(out[0], AllGatherTimeout)
    assert out[0].missing == [2]
    assert isinstance(out[1], ProtocolError)


def test_iteration_mismatch_is_protocol_error():
    out = run_nodes(2, lambda i, c: c.all_gather(np.zeros((1, 1)), 5 + i, row_offset=i))
    assert isinstance(out[0], ProtocolError) and "iteration" in str(out[0])
    assert isinstance(out[1], ProtocolError)


def test_worker_disconnect_aborts():
    def body(i, c):
        if i == 1:
            return "left"
        return c.all_gather(np.zeros((1, 1)), 0, row_offset=i)

    out = run_nodes(3, body)
    assert isinstance(out[0], ProtocolError)


def test_coordinator_unreachable():
    port = free_port()
    with pytest.raises(HandshakeError):
        SpmdComm(ClusterConfig("worker", 1, 2, "127.0.0.1", port), HASH, timeout=0.3).open()


def test_garbage_hello_rejected():
    port = free_port()
    errors = []

    def coord():
        try:
            SpmdComm(_cluster(0, 2, port), HASH, timeout=5).open()
        except BaseException as exc:
            errors.append(exc)

    t = threading.Thread(target=coord)
    t.start()
    for _ in range(100):
        try:
            s = socket.create_connection(("127.0.0.1", port))
            break
        except OSError:
            time.sleep(0.02)
    s.sendall(proto.pack_abort("not a hello"))
    t.join(10)
    s.close()
    assert isinstance(errors[0], HandshakeError)
