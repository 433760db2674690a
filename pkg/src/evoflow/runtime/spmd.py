"""SPMD execution: every node runs the same loop and all-gathers fitness each iteration.

Node 0 is the coordinator. It listens for the other ``world_size - 1``
nodes, checks their HELLO (node id, world size, config hash) and then acts
as the hub of every all-gather: it collects one SHARD per node, concatenates
them in node order and sends the GATHERED matrix back. No node leaves an
all-gather before every node has contributed, which makes each call an
iteration barrier.
"""

from __future__ import annotations

import logging
import selectors
import socket
import time
from dataclasses import dataclass

import numpy as np

from evoflow.errors import AllGatherTimeout, ConfigurationError, HandshakeError, ProtocolError
from evoflow.runtime import protocol as proto
from evoflow.runtime.sharding import slices_from_sizes, split_sizes

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class ClusterConfig:
    role: str = "single"
    node_id: int = 0
    world_size: int = 1
    host: str = "127.0.0.1"
    port: int = 29500

    def __post_init__(self):
        if self.role not in ("single", "coordinator", "worker"):
            raise ConfigurationError(f"unknown role {self.role!r}", "role")
        if self.world_size < 1 or not 0 <= self.node_id < self.world_size:
            raise ConfigurationError(f"node id {self.node_id} outside world of size {self.world_size}", "node_id")
        if self.role == "single" and self.world_size != 1:
            raise ConfigurationError("role 'single' requires world_size 1", "world_size")
        if self.role == "coordinator" and self.node_id != 0:
            raise ConfigurationError("the coordinator must be node 0", "node_id")
        if self.role == "worker" and self.node_id == 0:
            raise ConfigurationError("node 0 is reserved for the coordinator", "node_id")

    @classmethod
    def from_address(cls, role: str, node_id: int, world_size: int, addr: str) -> ClusterConfig:
        host, _, port = addr.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigurationError(f"address must look like HOST:PORT, got {addr!r}", "addr")
        return cls(role, node_id, world_size, host, int(port))


class SpmdComm:
    """Socket communicator for one node. Call :meth:`open` before :meth:`all_gather`."""

    def __init__(self, cluster: ClusterConfig, config_hash: bytes, timeout: float = DEFAULT_TIMEOUT):
        self.cluster = cluster
        self.config_hash = config_hash
        self.timeout = timeout
        self._peers: dict[int, socket.socket] = {}
        self._readers: dict[int, proto.FrameReader] = {}
        self._server: socket.socket | None = None
        self._sock: socket.socket | None = None

    @property
    def node_id(self) -> int:
        return self.cluster.node_id

    @property
    def world_size(self) -> int:
        return self.cluster.world_size

    def open(self) -> SpmdComm:
        if self.world_size == 1:
            return self
        if self.node_id == 0:
            self._accept_peers()
        else:
            self._connect()
        return self

    def _accept_peers(self) -> None:
        c = self.cluster
        self._server = socket.create_server((c.host, c.port), reuse_port=False)
        self._server.settimeout(0.2)
        deadline = time.monotonic() + self.timeout
        try:
            while len(self._peers) < self.world_size - 1:
                if time.monotonic() > deadline:
                    missing = sorted(set(range(1, self.world_size)) - set(self._peers))
                    raise HandshakeError(f"nodes {missing} never connected")
                try:
                    conn, _ = self._server.accept()
                except socket.timeout:
                    continue
                conn.settimeout(max(0.1, deadline - time.monotonic()))
                conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                try:
                    kind, payload = proto.recv_frame(conn)
                except (OSError, ProtocolError) as exc:
                    conn.close()
                    raise HandshakeError(f"handshake read failed: {exc}") from exc
                problem = self._check_hello(kind, payload)
                if problem:
                    self._send_quiet(conn, proto.pack_abort(problem))
                    conn.close()
                    self.abort(problem)
                    raise HandshakeError(problem)
                node_id = unpack_node(payload)
                conn.settimeout(None)
                self._peers[node_id] = conn
                self._readers[node_id] = proto.FrameReader()
                log.debug("node %d joined (%d/%d)", node_id, len(self._peers) + 1, self.world_size)
            hello = proto.pack_hello(0, self.world_size, self.config_hash)
            for conn in self._peers.values():
                conn.sendall(hello)
        except BaseException:
            self.close()
            raise

    def _check_hello(self, kind: int, payload: bytes) -> str | None:
        if kind != proto.HELLO:
            return f"expected HELLO, got message type {kind}"
        node_id, world_size, digest = proto.unpack_hello(payload)
        if world_size != self.world_size:
            return f"node {node_id} reports world size {world_size}, coordinator has {self.world_size}"
        if not 1 <= node_id < self.world_size or node_id in self._peers:
            return f"invalid or duplicate node id {node_id}"
        if digest != self.config_hash:
            return f"node {node_id} config hash {digest.hex()[:12]} != coordinator {self.config_hash.hex()[:12]}"
        return None

    def _connect(self) -> None:
        c = self.cluster
        deadline = time.monotonic() + self.timeout
        while True:
            try:
                sock = socket.create_connection((c.host, c.port), timeout=1.0)
                break
            except OSError:
                if time.monotonic() > deadline:
                    raise HandshakeError(f"could not reach coordinator at {c.host}:{c.port}") from None
                time.sleep(0.05)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        try:
            sock.settimeout(max(0.1, deadline - time.monotonic()))
            sock.sendall(proto.pack_hello(self.node_id, self.world_size, self.config_hash))
            kind, payload = proto.recv_frame(sock)
        except (OSError, ProtocolError) as exc:
            self.close()
            raise HandshakeError(f"handshake with coordinator failed: {exc}") from exc
        if kind == proto.ABORT:
            self.close()
            raise HandshakeError(payload.decode("utf-8", "replace"))
        if kind != proto.HELLO or proto.unpack_hello(payload)[2] != self.config_hash:
            self.close()
            raise HandshakeError("coordinator answered with an unexpected handshake")
        sock.settimeout(None)

    def all_gather(self, local: np.ndarray, iteration: int, row_offset: int = 0) -> np.ndarray:
        """Concatenate every node's rows in node order; blocks until all nodes have contributed."""
        local = np.asarray(local, dtype=np.float64)
        if self.world_size == 1:
            return local
        if self.node_id == 0:
            return self._gather_as_coordinator(local, iteration, row_offset)
        return self._gather_as_worker(local, iteration, row_offset)

    def _gather_as_coordinator(self, local, iteration, row_offset):
        shards: dict[int, tuple[int, np.ndarray]] = {0: (row_offset, local)}
        pending = set(self._peers)
        deadline = time.monotonic() + self.timeout
        with selectors.DefaultSelector() as sel:
            for node_id, conn in self._peers.items():
                sel.register(conn, selectors.EVENT_READ, node_id)
            while pending:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    missing = sorted(pending)
                    self.abort(f"all-gather timed out at iteration {iteration}; missing nodes {missing}")
                    raise AllGatherTimeout(missing, iteration)
                for sel_key, _ in sel.select(remaining):
                    node_id = sel_key.data
                    try:
                        data = sel_key.fileobj.recv(1 << 20)
                    except OSError:
                        data = b""
                    if not data:
                        self.abort(f"node {node_id} disconnected")
                        raise ProtocolError(f"node {node_id} disconnected during iteration {iteration}")
                    for kind, payload in self._readers[node_id].feed(data):
                        if kind == proto.ABORT:
                            reason = payload.decode("utf-8", "replace")
                            self.abort(f"node {node_id} aborted: {reason}")
                            raise ProtocolError(f"node {node_id} aborted: {reason}")
                        if kind != proto.SHARD or node_id not in pending:
                            self.abort(f"unexpected message type {kind} from node {node_id}")
                            raise ProtocolError(f"unexpected message type {kind} from node {node_id}")
                        it, offset, matrix = proto.unpack_matrix(payload)
                        if it != iteration:
                            self.abort(f"node {node_id} sent iteration {it}, expected {iteration}")
                            raise ProtocolError(f"node {node_id} sent iteration {it}, expected {iteration}")
                        shards[node_id] = (offset, matrix)
                        pending.discard(node_id)
        full = self._assemble(shards, iteration)
        message = proto.pack_gathered(iteration, full)
        for conn in self._peers.values():
            conn.sendall(message)
        return full

    def _assemble(self, shards, iteration) -> np.ndarray:
        expected = 0
        cols = {m.shape[1] for _, m in shards.values()}
        if len(cols) > 1:
            self.abort(f"column mismatch at iteration {iteration}")
            raise ProtocolError(f"shards disagree on column count: {sorted(cols)}")
        parts = []
        for node_id in range(self.world_size):
            offset, matrix = shards[node_id]
            if offset != expected:
                self.abort(f"node {node_id} row offset {offset}, expected {expected}")
                raise ProtocolError(f"node {node_id} row offset {offset}, expected {expected}")
            expected += matrix.shape[0]
            parts.append(matrix)
        return np.vstack(parts)

    def _gather_as_worker(self, local, iteration, row_offset):
        sock = self._sock
        sock.sendall(proto.pack_shard(iteration, row_offset, local))
        sock.settimeout(self.timeout)
        try:
            kind, payload = proto.recv_frame(sock)
        except socket.timeout:
            raise AllGatherTimeout([0], iteration) from None
        finally:
            if sock.fileno() >= 0:
                sock.settimeout(None)
        if kind == proto.ABORT:
            raise ProtocolError(f"coordinator aborted: {payload.decode('utf-8', 'replace')}")
        if kind != proto.GATHERED:
            raise ProtocolError(f"expected GATHERED, got message type {kind}")
        it, _, full = proto.unpack_matrix(payload)
        if it != iteration:
            raise ProtocolError(f"GATHERED for iteration {it}, expected {iteration}")
        return full

    def abort(self, reason: str) -> None:
        message = proto.pack_abort(reason)
        for conn in list(self._peers.values()):
            self._send_quiet(conn, message)
        if self._sock is not None:
            self._send_quiet(self._sock, message)

    @staticmethod
    def _send_quiet(sock: socket.socket, data: bytes) -> None:
        try:
            sock.sendall(data)
        except OSError:
            pass

    def close(self) -> None:
        for conn in self._peers.values():
            conn.close()
        self._peers.clear()
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        if self._server is not None:
            self._server.close()
            self._server = None

    def __enter__(self):
        return self.open()

    def __exit__(self, *exc):
        self.close()


def free_port(host: str = "127.0.0.1") -> int:
    """An ephemeral TCP port that was free a moment ago."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.bind((host, 0))
        return s.getsockname()[1]


def unpack_node(payload: bytes) -> int:
    return proto.unpack_hello(payload)[0]


def all_gather(local: np.ndarray, comm: SpmdComm, iteration: int, row_offset: int = 0) -> np.ndarray:
    return comm.all_gather(local, iteration, row_offset)


class SpmdEvaluator:
    """Evaluates this node's contiguous row slice and all-gathers the fitness matrix."""

    def __init__(self, comm: SpmdComm, local=None):
        self.comm = comm
        self.local = local

    def node_slice(self, rows: int) -> tuple[int, int]:
        return slices_from_sizes(split_sizes(rows, self.comm.world_size))[self.comm.node_id]

    def evaluate(self, problem, state, pop, iteration=0, plan=None):
        lo, hi = self.node_slice(pop.shape[0])
        mine = pop[lo:hi]
        if self.local is not None:
            fit, state = self.local.evaluate(problem, state, mine)
        else:
            fit, state = problem.evaluate(state, mine)
        return self.comm.all_gather(fit, iteration, row_offset=lo), state

    def close(self) -> None:
        if self.local is not None:
            self.local.close()
