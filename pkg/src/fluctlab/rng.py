"""Counter-based random streams.

Every trial owns a fixed window of the Philox4x64 output sequence keyed by
``(seed, stream)``. Trial ``t`` reads the words ``[t * stride, t * stride + width)``,
so the draws of a trial depend only on ``(seed, stream, t, width)`` and never on
how trials are grouped into chunks or spread over workers.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

_WORDS_PER_COUNTER = 4
_TWO_M53 = 2.0**-53


def stream_id(label: str) -> int:
    """Stable 32-bit id for a named stream (experiment label)."""
    return zlib.crc32(label.encode("utf-8"))


def _stride(width: int) -> int:
    return _WORDS_PER_COUNTER * -(-width // _WORDS_PER_COUNTER)


def _bit_generator(seed: int, stream: int) -> np.random.Philox:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Philox(key=(int(stream) << 64) | int(seed))


def block_uniforms(seed: int, stream: int, start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1) for trials ``start..stop-1``.

    Returns an array of shape ``(stop - start, width)``.
    """
    if stop < start or width < 1:
        raise ValueError("need stop >= start and width >= 1")
    stride = _stride(width)
    bg = _bit_generator(seed, stream)
    bg.advance(start * stride // _WORDS_PER_COUNTER)
    raw = bg.random_raw((stop - start) * stride).reshape(stop - start, stride)[:, :width]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


@dataclass(frozen=True)
class Stream:
    """The random stream of a single trial."""

    seed: int
    trial: int
    stream: int = 0

    def uniforms(self, width: int) -> np.ndarray:
        return block_uniforms(self.seed, self.stream, self.trial, self.trial + 1, width)[0]


def chunk_bounds(trials: int, chunk: int) -> list[tuple[int, int]]:
    """Fixed chunk boundaries; independent of the number of workers."""
    return [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
