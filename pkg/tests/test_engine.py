import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traintrack.engine import (
    batch_apply,
    batch_cyclic_reduce,
    batch_from_words,
    batch_lengths,
    batch_reduce,
    batch_to_words,
    class_count,
    cyclic_equal_bytes,
    enumerate_classes,
    image_table,
    key_bytes,
)
from traintrack.words import CyclicWord, Word

from conftest import image_dict, naive_apply, naive_cyclic_reduce, naive_reduce


def test_round_trip_words():
    words = [(1, -2), (), (3, 3, -1), (2,)]
    batch = batch_from_words(words)
    assert batch_to_words(batch) == [tuple(w) for w in words]
    assert list(batch_lengths(batch)) == [2, 0, 3, 1]


@given(st.lists(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=25), max_size=15))
def test_batch_reduce_matches_naive(words):
    batch = batch_from_words(words)
    out = batch_to_words(batch_reduce(batch))
    assert out == [naive_reduce(w) for w in words]


@given(st.lists(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=25), max_size=15))
def test_batch_cyclic_reduce_matches_naive(words):
    batch = batch_from_words(words)
    out = batch_to_words(batch_cyclic_reduce(batch_reduce(batch)))
    assert out == [naive_cyclic_reduce(w) for w in words]


def test_batch_apply_matches_naive(fib, plas, rng):
    for phi in (fib, plas):
        table = image_table(
            {i: phi.images[i - 1].letters for i in range(1, phi.rank + 1)},
            phi.rank,
        )
        imgs = image_dict(phi)
        words = [
            tuple(
                rng.choice([s * i for i in range(1, phi.rank + 1) for s in (1, -1)])
                for _ in range(rng.randint(1, 30))
            )
            for _ in range(200)
        ]
        batch = batch_from_words(words)
        out = batch_to_words(batch_reduce(batch_apply(batch, table)))
        assert out == [naive_apply(imgs, w) for w in words]


def test_batch_apply_rejects_empty_words(fib):
    table = image_table({1: (1, 2), 2: (1,)}, 2)
    with pytest.raises(ValueError):
        batch_apply(batch_from_words([()]), table)


def test_key_bytes_cyclic_equality():
    a = key_bytes((1, 2, -1))
    b = key_bytes((2, -1, 1))
    c = key_bytes((1, -2, 1))
    assert cyclic_equal_bytes(a, b)
    assert not cyclic_equal_bytes(a, c)
    assert not cyclic_equal_bytes(a, key_bytes((1, 2)))


def _burnside(rank: int, n: int) -> int:
    # cyclically reduced words of length exactly n, rank r free group:
    # (2r-1)^n + 1 + (r-1)*(1+(-1)^n), counted as necklaces via Burnside
    total = 0
    m = 2 * rank - 1
    for s in range(n):
        d = math.gcd(n, s)
        total += m ** d + 1 + (rank - 1) * (1 + (-1) ** d)
    return total // n


def test_class_count_matches_burnside_formula():
    for rank in (2, 3):
        for max_norm in (1, 2, 3, 4, 5):
            expect = sum(_burnside(rank, n) for n in range(1, max_norm + 1))
            assert class_count(rank, max_norm) == expect


def test_enumerate_classes_exhaustive_and_canonical():
    seen = set()
    for batch in enumerate_classes(2, 5):
        for w in batch_to_words(batch):
            assert naive_cyclic_reduce(w) == w  # cyclically reduced
            assert w not in seen
            seen.add(w)
    assert len(seen) == class_count(2, 5)
    # every class has exactly one canonical representative present
    reps = {min(w[i:] + w[:i] for i in range(len(w))) for w in seen}
    assert len(reps) == len(seen)
    # inverse classes are kept separate: the commutator and its inverse
    comm = CyclicWord((1, 2, -1, -2))
    inv = comm.inverse_class()
    hits = [w for w in seen if cyclic_equal_bytes(key_bytes(w), key_bytes(comm.letters))]
    inv_hits = [w for w in seen if cyclic_equal_bytes(key_bytes(w), key_bytes(inv.letters))]
    assert len(hits) == 1 and len(inv_hits) == 1 and hits != inv_hits


def test_enumerate_classes_partition_invariant():
    flat1 = [w for b in enumerate_classes(3, 6, partitions=1) for w in batch_to_words(b)]
    flat4 = [w for b in enumerate_classes(3, 6, partitions=4) for w in batch_to_words(b)]
    assert flat1 == flat4


def test_enumerate_matches_probe_oracle_count():
    # brute-force oracle (stdlib FKM implementation) counted 1,257,526
    # cyclically reduced classes of norm <= 10 at rank 3
    assert class_count(3, 10) == 1257526


def test_image_table_handles_inverses():
    table = image_table({1: (1, 2), 2: (1,)}, 2)
    batch = batch_from_words([(-1,), (-2,)])
    out = batch_to_words(batch_reduce(batch_apply(batch, table)))
    assert out == [(-2, -1), (-1,)]
