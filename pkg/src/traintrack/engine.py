"""Batch word arithmetic on flat numpy arrays.

Words are stored CSR-style: one int16 array of letters and an int64
offset array, word i occupying flat[offsets[i]:offsets[i+1]].  All
operations are vectorized passes; nothing here allocates per word.
Used by the class enumeration and the orbit/certificate searches, where
millions of conjugacy classes are pushed through an automorphism at
once.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "WordBatch",
    "ImageTable",
    "batch_from_words",
    "batch_to_words",
    "batch_lengths",
    "image_table",
    "batch_apply",
    "batch_reduce",
    "batch_cyclic_reduce",
    "key_bytes",
    "cyclic_equal_bytes",
    "enumerate_classes",
    "class_count",
]


class WordBatch(NamedTuple):
    flat: np.ndarray
    offsets: np.ndarray

    def __len__(self) -> int:
        return len(self.offsets) - 1


class ImageTable(NamedTuple):
    flat: np.ndarray
    off: np.ndarray
    lens: np.ndarray


def batch_from_words(words: Sequence[Sequence[int]]) -> WordBatch:
    lens = np.fromiter((len(w) for w in words), dtype=np.int64, count=len(words))
    offsets = np.zeros(len(words) + 1, dtype=np.int64)
    np.cumsum(lens, out=offsets[1:])
    flat = np.empty(offsets[-1], dtype=np.int16)
    pos = 0
    for w in words:
        flat[pos : pos + len(w)] = w
        pos += len(w)
    return WordBatch(flat, offsets)


def batch_to_words(batch: WordBatch) -> list[tuple[int, ...]]:
    flat, offsets = batch
    return [
        tuple(int(x) for x in flat[offsets[i] : offsets[i + 1]])
        for i in range(len(batch))
    ]


def batch_lengths(batch: WordBatch) -> np.ndarray:
    return np.diff(batch.offsets)


def _keys(flat: np.ndarray) -> np.ndarray:
    # letter_key, vectorized: 2x-2 for x > 0, -2x-1 for x < 0
    return np.where(flat > 0, 2 * flat - 2, -2 * flat - 1)


def image_table(images: dict[int, Sequence[int]], rank: int) -> ImageTable:
    """Pack generator images (letters +-1..+-rank each mapped to a word)
    into flat arrays indexed by letter key."""
    chunks = []
    lens = np.zeros(2 * rank, dtype=np.int64)
    for x in range(1, rank + 1):
        fwd = tuple(images[x])
        bwd = tuple(-y for y in reversed(fwd))
        lens[2 * x - 2] = len(fwd)
        lens[2 * x - 1] = len(bwd)
        chunks.append(np.asarray(fwd, dtype=np.int16))
        chunks.append(np.asarray(bwd, dtype=np.int16))
    off = np.zeros(2 * rank + 1, dtype=np.int64)
    np.cumsum(lens, out=off[1:])
    flat = (
        np.concatenate(chunks)
        if off[-1]
        else np.empty(0, dtype=np.int16)
    )
    return ImageTable(flat, off, lens)


def batch_apply(batch: WordBatch, table: ImageTable) -> WordBatch:
    """Substitute each letter by its image, without reduction."""
    flat, offsets = batch
    k = _keys(flat)
    counts = table.lens[k]
    total = int(counts.sum())
    out_starts = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=out_starts[1:])
    src = np.repeat(table.off[k], counts) + (
        np.arange(total, dtype=np.int64) - np.repeat(out_starts[:-1], counts)
    )
    new_flat = table.flat[src]
    # word boundaries: sum image lengths per word
    word_lens = np.add.reduceat(counts, offsets[:-1]) if len(flat) else np.zeros(len(batch), dtype=np.int64)
    if len(batch) and (np.diff(offsets) == 0).any():
        raise ValueError("empty word in batch")
    new_offsets = np.zeros(len(batch) + 1, dtype=np.int64)
    np.cumsum(word_lens, out=new_offsets[1:])
    return WordBatch(new_flat, new_offsets)


def batch_reduce(batch: WordBatch) -> WordBatch:
    """Free reduction of every word.  Each pass deletes a maximal
    non-overlapping set of cancelling neighbor pairs (even positions
    inside each run of cancellable pairs); nesting resolves over
    successive passes."""
    flat, offsets = batch
    nw = len(batch)
    lens = np.diff(offsets)
    word_id = np.repeat(np.arange(nw, dtype=np.int64), lens)
    while True:
        if len(flat) < 2:
            break
        flag = (flat[:-1] == -flat[1:]) & (word_id[:-1] == word_id[1:])
        idx = np.flatnonzero(flag)
        if not len(idx):
            break
        run_start = np.ones(len(idx), dtype=bool)
        run_start[1:] = np.diff(idx) != 1
        run_origin = idx[run_start][np.cumsum(run_start) - 1]
        sel = idx[((idx - run_origin) & 1) == 0]
        keep = np.ones(len(flat), dtype=bool)
        keep[sel] = False
        keep[sel + 1] = False
        lens = lens - 2 * np.bincount(word_id[sel], minlength=nw)
        flat = flat[keep]
        word_id = word_id[keep]
    offsets = np.zeros(nw + 1, dtype=np.int64)
    np.cumsum(lens, out=offsets[1:])
    return WordBatch(flat, offsets)


def batch_cyclic_reduce(batch: WordBatch) -> WordBatch:
    """Trim inverse first/last pairs from every (already reduced) word."""
    flat, offsets = batch
    if not len(flat):
        return batch
    starts = offsets[:-1].copy()
    ends = offsets[1:].copy()
    while True:
        long_enough = ends - starts >= 2
        s = np.where(long_enough, starts, 0)
        e = np.where(long_enough, ends - 1, 0)
        act = long_enough & (flat[s] == -flat[e])
        if not act.any():
            break
        starts[act] += 1
        ends[act] -= 1
    lens = ends - starts
    new_offsets = np.zeros(len(batch) + 1, dtype=np.int64)
    np.cumsum(lens, out=new_offsets[1:])
    total = int(new_offsets[-1])
    src = np.repeat(starts, lens) + (
        np.arange(total, dtype=np.int64) - np.repeat(new_offsets[:-1], lens)
    )
    return WordBatch(flat[src], new_offsets)


def key_bytes(word: Sequence[int]) -> bytes:
    return bytes(2 * x - 2 if x > 0 else -2 * x - 1 for x in word)


def cyclic_equal_bytes(canon: bytes, other: bytes) -> bool:
    """Whether two equal-length key-encoded words are rotations of each
    other (doubled-word substring test)."""
    return len(canon) == len(other) and canon in other + other


# --- conjugacy class enumeration -------------------------------------

def _grow_reduced(first_key: int, n: int, nkeys: int) -> np.ndarray:
    """All linearly reduced key words of length n starting with the
    given key, as a (N, n) uint8 array."""
    succ = np.empty((nkeys, nkeys - 1), dtype=np.uint8)
    for k in range(nkeys):
        succ[k] = [c for c in range(nkeys) if c != k ^ 1]
    cur = np.full((1, 1), first_key, dtype=np.uint8)
    for _ in range(n - 1):
        nxt = succ[cur[:, -1]].reshape(-1, 1)
        cur = np.concatenate(
            [np.repeat(cur, nkeys - 1, axis=0), nxt], axis=1
        )
    return cur


def _min_rotation_mask(words: np.ndarray) -> np.ndarray:
    """Rows that are lexicographically minimal among their rotations."""
    n_words, n = words.shape
    keep = np.ones(n_words, dtype=bool)
    for s in range(1, n):
        eq = np.ones(n_words, dtype=bool)
        less = np.zeros(n_words, dtype=bool)
        for j in range(n):
            a = words[:, (j + s) % n]
            b = words[:, j]
            less |= eq & (a < b)
            eq &= a == b
            if not eq.any():
                break
        keep &= ~less
    return keep


def _letters_from_keys(words: np.ndarray) -> np.ndarray:
    k = words.astype(np.int16)
    return np.where(k & 1, -(k // 2) - 1, k // 2 + 1)


def enumerate_classes(
    rank: int,
    max_norm: int,
    partitions: int = 1,
) -> Iterator[WordBatch]:
    """Canonical conjugacy classes with norm <= max_norm, in chunks.

    A class is a cyclically reduced word taken at its lexicographically
    least rotation in letter-key order; a class and its inverse are both
    produced.  Chunk boundaries depend on the partition count but the
    union of chunks does not.
    """
    if rank < 1 or max_norm < 1:
        raise ValueError("rank and max_norm must be positive")
    if partitions < 1:
        raise ValueError("partitions must be positive")
    nkeys = 2 * rank
    pending_flat: list[np.ndarray] = []
    pending_off: list[np.ndarray] = []
    pending_words = 0

    def drain():
        nonlocal pending_flat, pending_off, pending_words
        flat = (
            np.concatenate(pending_flat)
            if pending_flat
            else np.empty(0, dtype=np.int16)
        )
        lens = np.concatenate(pending_off) if pending_off else np.empty(0, dtype=np.int64)
        offsets = np.zeros(len(lens) + 1, dtype=np.int64)
        np.cumsum(lens, out=offsets[1:])
        pending_flat, pending_off, pending_words = [], [], 0
        return WordBatch(flat, offsets)

    # a canonical word starts with its smallest key, so splitting the
    # outer loop by first key partitions the classes
    total_classes = class_count(rank, max_norm)
    per_chunk = max(1, -(-total_classes // partitions))
    for first in range(nkeys):
        for n in range(1, max_norm + 1):
            words = _grow_reduced(first, n, nkeys)
            if n > 1:
                words = words[words[:, -1] != first ^ 1]
                if not len(words):
                    continue
                words = words[(words >= first).all(axis=1)]
                if not len(words):
                    continue
                words = words[_min_rotation_mask(words)]
                if not len(words):
                    continue
            letters = _letters_from_keys(words)
            pending_flat.append(letters.reshape(-1))
            pending_off.append(np.full(len(words), n, dtype=np.int64))
            pending_words += len(words)
            if pending_words >= per_chunk:
                yield drain()
    if pending_words:
        yield drain()


def class_count(rank: int, max_norm: int) -> int:
    """Number of conjugacy classes with norm <= max_norm (necklace count
    of cyclically reduced words), by Burnside over rotations."""
    from math import gcd

    nkeys = 2 * rank

    def reduced_cyclic(n: int) -> int:
        # closed walks of length n in the non-cancellation graph,
        # J - involution permutation: eigenvalues 2r-1 (once), -1 (once),
        # +-1 from the r-1 ... use the transfer matrix directly instead
        m = np.ones((nkeys, nkeys), dtype=np.int64)
        for k in range(nkeys):
            m[k, k ^ 1] = 0
        return int(np.trace(np.linalg.matrix_power(m, n)))

    total = 0
    for n in range(1, max_norm + 1):
        acc = 0
        for s in range(n):
            acc += reduced_cyclic(gcd(n, s))
        total += acc // n
    return total
