from typing import Tuple

import numpy as np


class ByteReader:
    """Cursor over an in-memory little-endian binary file."""

    def __init__(self, data: bytes, name: str) -> None:
        self.data = data
        self.name = name
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.data)

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise ValueError(f"{self.name}: truncated at byte {self.pos} (wanted {n} more bytes)")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self, count: int = 1) -> Tuple[int, ...]:
        values = np.frombuffer(self.take(4 * count), dtype="<u4")
        return tuple(int(v) for v in values)

    def text(self) -> str:
        (length,) = self.u32()
        return self.take(length).decode("utf-8")

    def f32(self, shape: Tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        return np.frombuffer(self.take(4 * count), dtype="<f4").reshape(shape).astype(np.float32)


def u32(*values: int) -> bytes:
    return np.array(values, dtype="<u4").tobytes()


def text(value: str) -> bytes:
    encoded = value.encode("utf-8")
    return u32(len(encoded)) + encoded


def f32(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f4").tobytes()
