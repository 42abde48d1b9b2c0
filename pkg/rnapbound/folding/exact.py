"""
Exact motif bounds by exhaustive enumeration of the motif's design space.
"""
import itertools
import logging
from typing import Iterator, Optional

from rnapbound.common.errors import InfeasibleConstraints, MotifTooLarge
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.energy.model import EnergyModel
from rnapbound.folding.ensemble import prob_motif
from rnapbound.structure.core import CANONICAL_PAIRS, NUCLEOTIDES, Motif, PartialSequence

logger = logging.getLogger(__name__)

DEFAULT_LEN_CAP = 14
DEFAULT_MAX_SEQUENCES = 5000


def design_space_size(m: Motif) -> int:
    """Number of partial sequences on the span of ``m`` compatible with its pairs."""
    return len(CANONICAL_PAIRS) ** len(m.pairs) * len(NUCLEOTIDES) ** len(m.unpaired_positions)


def motif_sequences(m: Motif) -> Iterator[PartialSequence]:
    """
    Every compatible partial sequence of ``m``: pair types vary slowest, in
    pair order, then unpaired nucleotides in span order.
    """
    pairs = sorted(m.pairs)
    unpaired = m.unpaired_positions
    for pair_types in itertools.product(CANONICAL_PAIRS, repeat=len(pairs)):
        mapping = {}
        for (i, j), bases in zip(pairs, pair_types):
            mapping[i], mapping[j] = bases[0], bases[1]
        for nts in itertools.product(NUCLEOTIDES, repeat=len(unpaired)):
            mapping.update(zip(unpaired, nts))
            yield PartialSequence.from_mapping(mapping)


def exact_motif_pbound(model: EnergyModel, m: Motif, len_cap: int = DEFAULT_LEN_CAP,
                       max_sequences: Optional[int] = DEFAULT_MAX_SEQUENCES,
                       params_hash: str = '', log_space: bool = False) -> PBoundRecord:
    """
    max over compatible partial sequences x of p(m | x), with the motif
    ensemble folded under the motif's boundary pairs.
    :param len_cap: (int) longest motif span enumerated
    :param max_sequences: (int) largest design space enumerated, None for no limit
    :return: PBoundRecord with method exact and the maximizing sequence
    """
    if m.length > len_cap:
        raise MotifTooLarge("motif {} spans {} > {} positions".format(m.key, m.length, len_cap))
    size = design_space_size(m)
    if max_sequences is not None and size > max_sequences:
        raise MotifTooLarge("motif {} has {} sequences > {}".format(m.key, size, max_sequences))

    best, best_x = -1.0, None
    for x in motif_sequences(m):
        try:
            p = prob_motif(model, x, m, log_space=log_space)
        except InfeasibleConstraints:
            continue
        if p > best:
            best, best_x = p, x
    logger.debug("exact bound %s: %.6g over %d sequences", m.key, best, size)
    return PBoundRecord(key=m.key, pbound=min(1.0, max(best, 0.0)), method=Method.EXACT,
                        params_hash=params_hash, count_explored=size,
                        sequence=best_x.to_string(m.span_positions) if best_x is not None else None)
