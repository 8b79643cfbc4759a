"""
Deterministic pseudo-randomness and Laplace sampling shared by all mechanisms.

Every random entity (a site in a round, the server, an adversary, a trial)
owns an `RngStream` derived from the master seed and a path such as
(("trial", 3), ("round", 0), ("site", 2)). Derivation hashes the seed and the
path, so streams do not depend on the order in which they are created.
"""
import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from app.errors import ParameterError

EntityPath = tuple[tuple[str, int], ...]


class NoiseMode(str, Enum):
    STANDARD = "standard"
    DISABLED = "disabled"


def derive_key(master_seed: int, path: Iterable[tuple[str, int]]) -> int:
    """
    128-bit key for the stream identified by (master_seed, path).

    Args:
        master_seed (int): 64-bit experiment seed.
        path (Iterable[tuple[str, int]]): Entity tags and indices.

    Returns:
        int: Key suitable for a Philox bit generator.
    """
    text = f"{int(master_seed) & 0xFFFFFFFFFFFFFFFF:016x}"
    for tag, index in path:
        text += f"/{tag}:{int(index)}"
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:16], "big")


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream owned by one logical entity.

    Args:
        master_seed (int): 64-bit experiment seed.
        path (EntityPath): Entity path identifying this stream.
        noise_mode (NoiseMode): Disabled turns every Laplace draw into 0.
    """

    master_seed: int
    path: EntityPath = ()
    noise_mode: NoiseMode = NoiseMode.STANDARD
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = derive_key(self.master_seed, self.path)
        object.__setattr__(self, "generator", np.random.Generator(np.random.Philox(key=key)))

    def child(self, tag: str, index: int = 0) -> "RngStream":
        """Stream for a sub-entity; independent of how much of this stream was consumed."""
        return RngStream(self.master_seed, self.path + ((tag, int(index)),), self.noise_mode)


def derive_stream(
    master_seed: int,
    path: Iterable[tuple[str, int]] = (),
    noise_mode: NoiseMode = NoiseMode.STANDARD,
) -> RngStream:
    return RngStream(int(master_seed), tuple((str(t), int(i)) for t, i in path), NoiseMode(noise_mode))


def laplace(rng: RngStream, scale: float) -> float:
    """
    Draws from Lap(scale) by inverting the CDF of a uniform draw.

    Args:
        rng (RngStream): Stream to draw from.
        scale (float): Scale b of the density exp(-|x|/b) / 2b.

    Returns:
        float: The draw, or exactly 0.0 when the stream's noise mode is Disabled.

    Raises:
        ParameterError: If scale is not positive.
    """
    if not scale > 0:
        raise ParameterError(f"Laplace scale must be positive, got {scale}")
    if rng.noise_mode is NoiseMode.DISABLED:
        return 0.0
    v = rng.generator.random()
    while v == 0.0:
        v = rng.generator.random()
    u = v - 0.5
    return -scale * math.copysign(1.0, u) * math.log1p(-2.0 * abs(u))


def uniform_threshold(rng: RngStream, delta: int) -> int:
    """
    Uniform integer on {1, ..., delta}.

    Raises:
        ParameterError: If delta < 1.
    """
    if delta < 1:
        raise ParameterError(f"Threshold support must be at least 1, got {delta}")
    return int(rng.generator.integers(1, delta + 1))


def uniform_thresholds(rng: RngStream, delta: int, size: int) -> np.ndarray:
    """Batched `uniform_threshold`: `size` i.i.d. draws as an int64 array."""
    if delta < 1:
        raise ParameterError(f"Threshold support must be at least 1, got {delta}")
    return rng.generator.integers(1, delta + 1, size=size, dtype=np.int64)
