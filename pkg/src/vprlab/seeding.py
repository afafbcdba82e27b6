"""Deterministic seed derivation so every component owns an independent stream."""

MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Mix integer parts into a stable 64-bit seed.

    Unlike ``hash()``, the result is identical across processes and platforms,
    so seeded runs replay bit-for-bit.
    """
    acc = 0x6A09E667F3BCC909
    for p in parts:
        acc = _splitmix64(acc ^ (p & MASK64))
    return acc
