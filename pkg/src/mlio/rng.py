"""Portable seeded PRNG.

All randomness in the package flows through :class:`Xoshiro256`, the
xoshiro256** generator of Blackman and Vigna with its state expanded from a
single 64-bit seed by splitmix64.  The stream is fully specified by the
algorithm name and ``VERSION`` below, so fixtures generated here can be
reproduced bit-for-bit by any other implementation.

Derived draws:

* ``random()``: ``(next_u64() >> 11) * 2**-53`` in [0, 1).
* ``integers(n)``: rejection sampling on ``next_u64() % n`` with threshold
  ``2**64 % n``, unbiased.
* ``normal()``: Box-Muller, one value per two uniforms, ``u1`` mapped to
  (0, 1] as ``1 - random()``.
* ``shuffle(seq)``: Fisher-Yates from the last index down using ``integers``.
* ``weighted_index(w)``: ``u = random() * sum(w)``, first index whose
  cumulative weight exceeds ``u``.
"""
import math

NAME = "xoshiro256**"
VERSION = 1

_MASK = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state):
    """Return ``(new_state, output)`` for one splitmix64 step."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int = 42):
        sm = int(seed) & _MASK
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def integers(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        u1 = 1.0 - self.random()
        u2 = self.random()
        return mean + sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.integers(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def permutation(self, n: int) -> list:
        idx = list(range(n))
        self.shuffle(idx)
        return idx

    def weighted_index(self, weights) -> int:
        total = float(sum(weights))
        if not total > 0.0:
            raise ValueError("weights must have a positive sum")
        u = self.random() * total
        acc = 0.0
        last = 0
        for i, w in enumerate(weights):
            if w <= 0:
                continue
            acc += w
            last = i
            if u < acc:
                return i
        return last
