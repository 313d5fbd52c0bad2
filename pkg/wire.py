"""Big-endian, length-prefixed binary codec shared by the key, envelope and store containers."""

import struct
from typing import List, Type

from errors import CorruptContainer, CpabeError


class ByteWriter:
    def __init__(self):
        self._parts: List[bytes] = []

    def raw(self, data: bytes) -> "ByteWriter":
        self._parts.append(bytes(data))
        return self

    def u8(self, value: int) -> "ByteWriter":
        return self.raw(struct.pack(">B", value))

    def u16(self, value: int) -> "ByteWriter":
        return self.raw(struct.pack(">H", value))

    def u32(self, value: int) -> "ByteWriter":
        return self.raw(struct.pack(">I", value))

    def blob16(self, data: bytes) -> "ByteWriter":
        if len(data) > 0xFFFF:
            raise ValueError("blob too long for a 2-byte length prefix")
        return self.u16(len(data)).raw(data)

    def blob32(self, data: bytes) -> "ByteWriter":
        return self.u32(len(data)).raw(data)

    def text16(self, text: str) -> "ByteWriter":
        return self.blob16(text.encode("utf-8"))

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    """Reads what ByteWriter wrote; every short read raises the configured error."""

    def __init__(self, data: bytes, error: Type[CpabeError] = CorruptContainer):
        self._data = memoryview(bytes(data))
        self._offset = 0
        self._error = error

    @property
    def remaining(self) -> int:
        return len(self._data) - self._offset

    def raw(self, size: int) -> bytes:
        if size < 0 or self.remaining < size:
            raise self._error(f"truncated data: wanted {size} bytes at offset {self._offset}")
        chunk = self._data[self._offset:self._offset + size].tobytes()
        self._offset += size
        return chunk

    def u8(self) -> int:
        return struct.unpack(">B", self.raw(1))[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.raw(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.raw(4))[0]

    def blob16(self) -> bytes:
        return self.raw(self.u16())

    def blob32(self) -> bytes:
        return self.raw(self.u32())

    def text16(self) -> str:
        try:
            return self.blob16().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise self._error("invalid UTF-8 text") from exc

    def expect(self, magic: bytes):
        if self.raw(len(magic)) != magic:
            raise self._error(f"bad magic, expected {magic!r}")

    def expect_end(self):
        if self.remaining:
            raise self._error(f"{self.remaining} trailing bytes")
