"""Counter-based random streams.

Every uniform is a pure function of ``(seed, purpose, round, seat, position)``
run through the splitmix64 finalizer, so

* the draws of a given (round, seat) do not depend on anything that happened
  earlier in the tournament, including how many draws other seats used or
  whether logging is on;
* the scalar engine and the vectorized batch simulator see identical numbers.

Purposes are small integers (see the ``TURN`` / ``SEATING`` / ``STRATEGY``
constants) so that separate uses never share a stream.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)

TURN = 1
SEATING = 2
STRATEGY = 3
AUX = 4


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def derive(key: int, *parts: int) -> int:
    """Fold integers into a 64-bit stream key."""
    for p in parts:
        key = mix64(key ^ ((p * GOLDEN + 0x632BE59BD9B4E019) & MASK))
    return key


class RngStream:
    """Sequential uniforms from one stream key; ``position`` counts draws."""

    __slots__ = ("seed", "key", "position")

    def __init__(self, seed: int, *parts: int, position: int = 0):
        self.seed = int(seed) & MASK
        self.key = derive(mix64(self.seed + GOLDEN), *parts)
        self.position = position

    @classmethod
    def from_key(cls, seed: int, key: int) -> "RngStream":
        obj = cls.__new__(cls)
        obj.seed = seed
        obj.key = key
        obj.position = 0
        return obj

    def uniform(self) -> float:
        z = (self.key + (self.position + 1) * GOLDEN) & MASK
        self.position += 1
        z = ((z ^ (z >> 30)) * _M1) & MASK
        z = ((z ^ (z >> 27)) * _M2) & MASK
        return ((z ^ (z >> 31)) >> 11) * _INV53

    def uniform_between(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def below(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)

    def permutation(self, n: int) -> list[int]:
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


class GameRng:
    """Stream factory for one tournament."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK
        self._base = mix64(self.seed + GOLDEN)
        self._turn = derive(self._base, TURN)
        self._seating = derive(self._base, SEATING)

    def turn(self, round_index: int, seat: int) -> RngStream:
        return RngStream.from_key(self.seed, derive(self._turn, round_index, seat))

    def seating(self, round_index: int, n: int) -> list[int]:
        return RngStream.from_key(self.seed, derive(self._seating, round_index)).permutation(n)

    def strategy(self, player_id: int) -> RngStream:
        return RngStream.from_key(self.seed, derive(self._base, STRATEGY, player_id))

    def aux(self, *parts: int) -> RngStream:
        return RngStream.from_key(self.seed, derive(self._base, AUX, *parts))


# ---------------------------------------------------------------------------
# vectorized counterparts (uint64 arithmetic wraps, matching the & MASK above)
# ---------------------------------------------------------------------------

_U = np.uint64


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> _U(30)
        z *= _U(_M1)
        z ^= z >> _U(27)
        z *= _U(_M2)
        z ^= z >> _U(31)
    return z


def derive_array(key, *parts) -> np.ndarray:
    key = np.asarray(key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for p in parts:
            p = np.asarray(p).astype(np.uint64)
            key = mix64_array(key ^ (p * _U(GOLDEN) + _U(0x632BE59BD9B4E019)))
    return key


def uniforms_array(keys: np.ndarray, position: int) -> np.ndarray:
    """Draw number ``position`` (0-based) of every stream in ``keys``."""
    with np.errstate(over="ignore"):
        z = keys + _U((position + 1) * GOLDEN & MASK)
    return (mix64_array(z) >> _U(11)).astype(np.float64) * _INV53


def turn_keys(rng: GameRng, rounds: np.ndarray, seat: int) -> np.ndarray:
    return derive_array(np.full(rounds.shape, rng._turn, dtype=np.uint64), rounds, np.full(rounds.shape, seat))
