"""Counter-based deterministic random values (SplitMix64).

Response realization must replay identically given a seed, including across
processes, so random choices are drawn from a stateless counter-based
generator instead of a shared stateful one: draw i of stream `seed` is a
pure function of (seed, i).
"""

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def counter_value(seed: int, counter: int) -> int:
    """Return the `counter`-th 64-bit output of the SplitMix64 stream `seed`."""
    return _mix((seed + (counter + 1) * _GAMMA) & _MASK64)


def counter_choice(seed: int, counter: int, n: int) -> int:
    """Pick an index in [0, n) for draw `counter` of stream `seed`."""
    if n <= 0:
        raise ValueError("cannot choose from an empty range")
    return counter_value(seed, counter) % n


def derive_seed(seed: int, *parts: int) -> int:
    """Fold extra stream identifiers into a seed (order-sensitive)."""
    out = seed & _MASK64
    for part in parts:
        out = _mix((out + (part + 1) * _GAMMA) & _MASK64)
    return out
