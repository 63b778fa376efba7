"""ClientUpdate serialization and length-prefixed CRC32 framing.

Frame::

    u32 big-endian length | payload | u32 big-endian CRC32(payload)

Payload (all little-endian)::

    u32 round | u32 client_id | u32 P | P x f64 params | u32 num_samples
"""

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ..errors import TransportError

MAX_FRAME = 1 << 20
_HEADER = struct.Struct("<III")
_TAIL = struct.Struct("<I")
_U32BE = struct.Struct(">I")


@dataclass(frozen=True)
class ClientUpdate:
    round: int
    client_id: int
    params: np.ndarray
    num_samples: int
    checksum: int = None

    def __post_init__(self):
        params = np.ascontiguousarray(self.params, dtype="<f8")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.round < 0 or self.client_id < 0:
            raise ValueError("round and client_id must be non-negative")

    def __eq__(self, other):
        if not isinstance(other, ClientUpdate):
            return NotImplemented
        return (self.round, self.client_id, self.num_samples) == (other.round, other.client_id, other.num_samples) \
            and self.params.tobytes() == other.params.tobytes()

    __hash__ = None


def serialize_update(update):
    return (_HEADER.pack(update.round, update.client_id, update.params.size)
            + update.params.tobytes()
            + _TAIL.pack(update.num_samples))


def deserialize_update(payload, checksum=None):
    if len(payload) < _HEADER.size + _TAIL.size:
        raise TransportError(f"payload of {len(payload)} bytes is too short")
    rnd, cid, P = _HEADER.unpack_from(payload, 0)
    expected = _HEADER.size + 8 * P + _TAIL.size
    if len(payload) != expected:
        raise TransportError(f"payload length {len(payload)} inconsistent with P={P}")
    params = np.frombuffer(payload, dtype="<f8", count=P, offset=_HEADER.size).copy()
    (num_samples,) = _TAIL.unpack_from(payload, expected - _TAIL.size)
    if num_samples < 1:
        raise TransportError("num_samples must be >= 1")
    return ClientUpdate(rnd, cid, params, num_samples,
                        zlib.crc32(payload) if checksum is None else checksum)


def encode_frame(payload):
    if len(payload) > MAX_FRAME:
        raise TransportError(f"frame of {len(payload)} bytes exceeds {MAX_FRAME}")
    return _U32BE.pack(len(payload)) + payload + _U32BE.pack(zlib.crc32(payload))


def decode_frame(frame):
    """Validate a complete frame and return its payload."""
    if len(frame) < 8:
        raise TransportError("truncated frame header")
    (length,) = _U32BE.unpack_from(frame, 0)
    if length > MAX_FRAME:
        raise TransportError(f"declared length {length} exceeds {MAX_FRAME}")
    if len(frame) != length + 8:
        raise TransportError(f"frame is {len(frame)} bytes, header declares {length + 8}")
    payload = bytes(frame[4:4 + length])
    (crc,) = _U32BE.unpack_from(frame, 4 + length)
    if zlib.crc32(payload) != crc:
        raise TransportError("CRC32 mismatch")
    return payload


def read_frame(read):
    """Read one frame with ``read(n)`` (e.g. ``sock.recv``-like, returns b'' at EOF).

    Returns ``None`` on a clean EOF before any byte.
    """
    header = _read_exact(read, 4, allow_eof=True)
    if header is None:
        return None
    (length,) = _U32BE.unpack(header)
    if length > MAX_FRAME:
        raise TransportError(f"declared length {length} exceeds {MAX_FRAME}")
    rest = _read_exact(read, length + 4)
    return decode_frame(header + rest)


def _read_exact(read, n, allow_eof=False):
    chunks = []
    got = 0
    while got < n:
        chunk = read(n - got)
        if not chunk:
            if allow_eof and got == 0:
                return None
            raise TransportError(f"truncated frame: expected {n} bytes, got {got}")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def pack_update(update):
    return encode_frame(serialize_update(update))


def unpack_update(frame):
    return deserialize_update(decode_frame(frame))
