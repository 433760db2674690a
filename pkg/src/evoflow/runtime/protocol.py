"""Binary framing for the SPMD coordinator protocol.

Frame: 4-byte big-endian length of everything that follows, a 1-byte
message type, then the payload.

=========  ====  ===========================================================
HELLO      0x01  node_id u32 BE, world_size u32 BE, 32-byte config SHA-256
SHARD      0x02  iteration u64 BE, row_offset u32 BE, rows u32 BE,
                 cols u32 BE, rows*cols float64 little-endian
GATHERED   0x03  same layout as SHARD with row_offset 0
ABORT      0x04  UTF-8 reason
=========  ====  ===========================================================
"""

from __future__ import annotations

import socket
import struct

import numpy as np

from evoflow.errors import ProtocolError

HELLO = 0x01
SHARD = 0x02
GATHERED = 0x03
ABORT = 0x04

_HEADER = struct.Struct(">IB")
_HELLO = struct.Struct(">II32s")
_SHARD = struct.Struct(">QIII")
MAX_FRAME = 1 << 31


def frame(kind: int, payload: bytes) -> bytes:
    return _HEADER.pack(len(payload) + 1, kind) + payload


def pack_hello(node_id: int, world_size: int, config_hash: bytes) -> bytes:
    if len(config_hash) != 32:
        raise ValueError("config hash must be 32 bytes")
    return frame(HELLO, _HELLO.pack(node_id, world_size, config_hash))


def unpack_hello(payload: bytes) -> tuple[int, int, bytes]:
    if len(payload) != _HELLO.size:
        raise ProtocolError(f"HELLO payload has {len(payload)} bytes, expected {_HELLO.size}")
    return _HELLO.unpack(payload)


def _pack_matrix(kind: int, iteration: int, row_offset: int, matrix: np.ndarray) -> bytes:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("only matrices can be sent")
    rows, cols = matrix.shape
    body = np.ascontiguousarray(matrix, dtype="<f8").tobytes()
    return frame(kind, _SHARD.pack(iteration, row_offset, rows, cols) + body)


def pack_shard(iteration: int, row_offset: int, matrix: np.ndarray) -> bytes:
    return _pack_matrix(SHARD, iteration, row_offset, matrix)


def pack_gathered(iteration: int, matrix: np.ndarray) -> bytes:
    return _pack_matrix(GATHERED, iteration, 0, matrix)


def unpack_matrix(payload: bytes) -> tuple[int, int, np.ndarray]:
    """Decode a SHARD or GATHERED payload into ``(iteration, row_offset, matrix)``."""
    if len(payload) < _SHARD.size:
        raise ProtocolError("truncated matrix header")
    iteration, row_offset, rows, cols = _SHARD.unpack_from(payload)
    body = payload[_SHARD.size :]
    if len(body) != rows * cols * 8:
        raise ProtocolError(f"matrix body has {len(body)} bytes, expected {rows * cols * 8}")
    matrix = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(rows, cols)
    return iteration, row_offset, matrix


def pack_abort(reason: str) -> bytes:
    return frame(ABORT, reason.encode("utf-8"))


class FrameReader:
    """Incremental decoder for a byte stream of frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[tuple[int, bytes]]:
        self._buf += data
        out = []
        while len(self._buf) >= 4:
            (length,) = struct.unpack_from(">I", self._buf)
            if length < 1 or length > MAX_FRAME:
                raise ProtocolError(f"bad frame length {length}")
            if len(self._buf) < 4 + length:
                break
            kind = self._buf[4]
            payload = bytes(self._buf[5 : 4 + length])
            del self._buf[: 4 + length]
            out.append((kind, payload))
        return out


def recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = bytearray()
    while len(chunks) < n:
        chunk = sock.recv(n - len(chunks))
        if not chunk:
            raise ProtocolError("peer closed the connection")
        chunks += chunk
    return bytes(chunks)


def recv_frame(sock: socket.socket) -> tuple[int, bytes]:
    length, kind = _HEADER.unpack(recv_exact(sock, _HEADER.size))
    if length < 1 or length > MAX_FRAME:
        raise ProtocolError(f"bad frame length {length}")
    return kind, recv_exact(sock, length - 1)
