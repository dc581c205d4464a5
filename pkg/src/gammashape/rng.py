"""Counter-based random streams.

Every Monte-Carlo routine draws from a Philox generator keyed by
``(seed, *keys)``, so work split into chunks or restarts gets disjoint,
reproducible substreams independent of thread count.
"""

import numpy as np

DEFAULT_SEED = 20251201


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, chunk: int):
    """Split ``n`` trials into fixed-size chunks (last one may be short)."""
    full, rest = divmod(int(n), int(chunk))
    sizes = [chunk] * full
    if rest:
        sizes.append(rest)
    return sizes


def complex_normal(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    """Circular complex Gaussian draws with total variance ``variance``."""
    scale = np.sqrt(variance / 2.0)
    z = rng.standard_normal((2, n))
    return scale * (z[0] + 1j * z[1])
