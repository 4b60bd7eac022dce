"""Canonical byte framing shared by every serialized structure.

Everything that goes on the wire (or into a hash) is built from two
primitives: fixed-width big-endian integers and length-prefixed byte
strings.  Length prefixes are 4-byte big-endian, so no serialization is
ambiguous and concatenated fields can never alias each other.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Raised when a byte string does not parse as the expected layout."""


def enc_u32(n: int) -> bytes:
    if not 0 <= n < 1 << 32:
        raise DecodeError(f"u32 out of range: {n}")
    return struct.pack(">I", n)


def enc_u64(n: int) -> bytes:
    if not 0 <= n < 1 << 64:
        raise DecodeError(f"u64 out of range: {n}")
    return struct.pack(">Q", n)


def enc_bytes(b: bytes) -> bytes:
    return enc_u32(len(b)) + b


def enc_str(s: str) -> bytes:
    return enc_bytes(s.encode("utf-8"))


class Reader:
    """Sequential reader over a serialized buffer with strict bounds checks."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise DecodeError("unexpected end of buffer")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def bytes_(self) -> bytes:
        return self.take(self.u32())

    def str_(self) -> str:
        return self.bytes_().decode("utf-8")

    def done(self) -> None:
        if self._pos != len(self._data):
            raise DecodeError(f"{len(self._data) - self._pos} trailing bytes")
