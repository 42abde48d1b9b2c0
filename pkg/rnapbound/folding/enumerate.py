"""
Brute-force enumeration of (constrained) ensembles, used as an oracle for
the folding DP. Written independently of the DP recursions.
"""
from functools import lru_cache
from typing import Iterator, List, Tuple

from rnapbound.common.errors import InfeasibleConstraints, RegionTooLarge
from rnapbound.energy.model import EnergyModel
from rnapbound.folding.constraints import NO_CONSTRAINTS, FoldConstraints
from rnapbound.folding.ensemble import ensemble_energy
from rnapbound.structure.core import CANONICAL_PAIRS, DEFAULT_MIN_HAIRPIN, PartialSequence, Structure

DEFAULT_ORACLE_CAP = 20


def _top_level(pairs):
    return [(a, b) for a, b in pairs if not any(c < a and b < d for c, d in pairs)]


def enumerate_structures(x: PartialSequence, c: FoldConstraints = NO_CONSTRAINTS,
                         min_hairpin: int = DEFAULT_MIN_HAIRPIN, max_interior: int = 30,
                         cap: int = DEFAULT_ORACLE_CAP) -> Iterator[Structure]:
    """
    Yields every pseudoknot-free structure of ``x`` over canonical pairs that
    honours ``min_hairpin``, ``max_interior`` and the constraints, each once.
    """
    positions = c.checked_domain(x)
    n = len(positions)
    if n > cap:
        raise RegionTooLarge("folding domain of {} positions exceeds the oracle cap {}".format(n, cap))
    index = {pos: k for k, pos in enumerate(positions)}
    seq = [x[pos] for pos in positions]
    forced = {(index[i], index[j]) for i, j in c.forced_pairs}
    sealed = {(index[i], index[j]) for i, j in c.sealed_pairs}
    for i, j in c.forced_pairs:
        if x[i] + x[j] not in CANONICAL_PAIRS:
            raise InfeasibleConstraints("forced pair {} is {}".format((i, j), x[i] + x[j]))
    ends = {p for pair in forced for p in pair}

    def can_pair(p, q):
        if (p, q) in forced:
            return True
        if p in ends or q in ends or seq[p] + seq[q] not in CANONICAL_PAIRS:
            return False
        return not any(p < a < q < b or a < p < b < q for a, b in forced)

    @lru_cache(maxsize=None)
    def segment(p, q) -> Tuple[tuple, ...]:
        if p > q:
            return ((),)
        out = []
        if p not in ends:
            out.extend(segment(p + 1, q))
        for k in range(p + 1, q + 1):
            if not can_pair(p, k):
                continue
            for inner in inside(p, k):
                for rest in segment(k + 1, q):
                    out.append(((p, k),) + inner + rest)
        return tuple(out)

    @lru_cache(maxsize=None)
    def inside(p, q) -> Tuple[tuple, ...]:
        if (p, q) in sealed:
            return ((),)
        out = []
        for body in segment(p + 1, q - 1):
            top = _top_level(body)
            if not top:
                if q - p - 1 >= min_hairpin:
                    out.append(body)
            elif len(top) == 1:
                k, l = top[0]
                if (k - p - 1) + (q - l - 1) <= max_interior:
                    out.append(body)
            else:
                out.append(body)
        return tuple(out)

    if n == 0:
        bodies = ((),)
    elif c.region is not None:
        bodies = tuple(((0, n - 1),) + inner for inner in inside(0, n - 1))
    else:
        bodies = segment(0, n - 1)
    length = c.coordinate_length(x)
    for body in bodies:
        yield Structure.from_pairs(length, ((positions[p], positions[q]) for p, q in body))


def enumerate_ensemble(model: EnergyModel, x: PartialSequence, c: FoldConstraints = NO_CONSTRAINTS,
                       cap: int = DEFAULT_ORACLE_CAP) -> List[Tuple[Structure, int]]:
    """Every member of the ensemble with its energy."""
    return [(y, ensemble_energy(model, x, y, c))
            for y in enumerate_structures(x, c, model.min_hairpin, model.max_interior, cap)]
