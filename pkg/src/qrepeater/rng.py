"""Counter-based random streams addressable by (seed, stream label, trial).

Each stream is a Philox generator keyed from the master seed and a tuple
label, read as 32-bit words (low half of each 64-bit output first). Trial
``i`` of a stream that draws ``width`` words per trial always reads words
``[i * width, (i + 1) * width)``, so any split of the trial range into
chunks reproduces the same numbers.
"""

from __future__ import annotations

import numpy as np

# one Philox counter step yields 4 x 64 bits = 8 x 32 bits
_WORDS_PER_COUNTER = 8


def stream_key(master_seed: int, label: tuple[int, ...]) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(x) for x in label))
    return seq.generate_state(2, dtype=np.uint64)


def raw_words(master_seed: int, label: tuple[int, ...], start_trial: int, n_trials: int, width: int) -> np.ndarray:
    """32-bit words for trials ``start_trial .. start_trial + n_trials - 1``.

    Returns a ``uint32`` array of shape ``(n_trials, width)``.
    """
    offset = start_trial * width
    if offset % _WORDS_PER_COUNTER:
        raise ValueError("chunk boundaries must fall on whole Philox counter blocks")
    bitgen = np.random.Philox(key=stream_key(master_seed, label))
    bitgen.advance(offset // _WORDS_PER_COUNTER)
    count = n_trials * width
    wide = bitgen.random_raw((count + 1) // 2).astype("<u8", copy=False)
    return wide.view("<u4")[:count].reshape(n_trials, width)


def bernoulli_threshold(p: float) -> int | None:
    """Integer cut so that ``word < cut`` has probability ``p`` (to 2**-32)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p >= 1.0:
        return None
    return min(int(round(p * 2.0**32)), 2**32 - 1)


def bernoulli_bits(master_seed: int, label: tuple[int, ...], start_trial: int, n_trials: int, width: int, p: float) -> np.ndarray:
    """Boolean ``(n_trials, width)`` array of independent Bernoulli(p) draws."""
    if p == 0.0:
        return np.zeros((n_trials, width), dtype=bool)
    cut = bernoulli_threshold(p)
    if cut is None:
        return np.ones((n_trials, width), dtype=bool)
    return raw_words(master_seed, label, start_trial, n_trials, width) < np.uint32(cut)
