"""
Seeded generators of structures and sequences for randomized checks.
"""
from typing import List, Optional

import numpy as np

from rnapbound.structure.core import (CANONICAL_PAIRS, DEFAULT_MIN_HAIRPIN, NUCLEOTIDES, PartialSequence,
                                      Structure, decompose_loops, oversized_interior)


def random_sequence(n: int, rng: np.random.Generator) -> PartialSequence:
    return PartialSequence.from_string(''.join(NUCLEOTIDES[k] for k in rng.integers(0, 4, size=n)))


def random_structure(n: int, rng: np.random.Generator, min_hairpin: int = DEFAULT_MIN_HAIRPIN,
                     pair_prob: float = 0.6, max_interior: Optional[int] = 30) -> Structure:
    """
    A random pseudoknot-free structure of length ``n``. Each base tries to open
    a pair with probability ``pair_prob``; partners are drawn uniformly.
    """
    pairs = []

    def fill(start, end):
        k = start
        while k <= end - min_hairpin - 1:
            if rng.random() < pair_prob:
                l = int(rng.integers(k + min_hairpin + 1, end + 1))
                pairs.append((k, l))
                fill(k + 1, l - 1)
                k = l + 1
            else:
                k += 1

    fill(1, n)
    y = Structure.from_pairs(n, pairs)
    if max_interior is not None and oversized_interior(decompose_loops(y), max_interior) is not None:
        return random_structure(n, rng, min_hairpin, pair_prob, max_interior)
    return y


def compatible_sequence(y: Structure, rng: np.random.Generator) -> PartialSequence:
    """Uniform pair types on the pairs of ``y`` and uniform bases elsewhere."""
    mapping = {}
    for i, j in y.sorted_pairs():
        bases = CANONICAL_PAIRS[int(rng.integers(0, 6))]
        mapping[i], mapping[j] = bases[0], bases[1]
    for pos in sorted(y.unpaired):
        mapping[pos] = NUCLEOTIDES[int(rng.integers(0, 4))]
    return PartialSequence.from_mapping(mapping)


def structure_corpus(count: int, seed: int, min_len: int = 8, max_len: int = 30,
                     max_pairs: Optional[int] = None) -> List[Structure]:
    """``count`` random structures, each with at least one pair."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        y = random_structure(int(rng.integers(min_len, max_len + 1)), rng)
        if not y.pairs or (max_pairs is not None and len(y.pairs) > max_pairs):
            continue
        out.append(y)
    return out
