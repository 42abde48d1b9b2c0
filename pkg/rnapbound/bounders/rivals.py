"""
Rival structures (or motifs), differential positions and free-energy gaps.

A target is either a whole structure or a motif. For a motif the ensemble is
the boundary-pair constrained one, so rivals are compared on the loops that
ensemble counts: the loop outside the motif and loops inside sealed pairs
never take part.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from rnapbound.common.errors import (EmptyRivalSet, IncompleteAssignment, InputError, LengthMismatch,
                                     NoRivalsFound, NonCanonicalPair)
from rnapbound.energy.model import INF, EnergyModel, loop_energy, loop_energy_batch
from rnapbound.folding.constraints import NO_CONSTRAINTS, FoldConstraints
from rnapbound.folding.dp import FoldingDP
from rnapbound.structure.core import (CANONICAL_PAIRS, NUCLEOTIDES, Loop, Motif, Pair, PartialSequence,
                                      Structure, motif_for_domain)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignTarget:
    """
    What a bound is computed for.

    :param key: (str) motif key or structure id
    :param structure: (Structure) full-coordinate structure holding the target pairs
    :param constraints: (FoldConstraints) the ensemble the target competes in
    :param span: (tuple) positions whose nucleotides are designed
    """
    key: str
    structure: Structure
    constraints: FoldConstraints = NO_CONSTRAINTS
    span: Tuple[int, ...] = ()
    motif: Optional[Motif] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_structure(cls, y: Structure, key: Optional[str] = None) -> 'DesignTarget':
        return cls(key or y.dotbracket, y, FoldConstraints(length=y.length), tuple(range(1, y.length + 1)))

    @classmethod
    def from_motif(cls, m: Motif) -> 'DesignTarget':
        return cls(m.key, Structure.from_pairs(m.tree.length, m.pairs), FoldConstraints.for_motif(m),
                   m.span_positions, m)

    @property
    def pairs(self) -> FrozenSet[Pair]:
        return self.structure.pairs

    @property
    def unpaired(self) -> Tuple[int, ...]:
        partner = self.structure.partner
        return tuple(p for p in self.span if partner[p] == 0)

    def loops(self, y: Optional[Structure] = None) -> List[Loop]:
        return self.constraints.member_loops(self.structure if y is None else y)

    def rival_key(self, y: Structure) -> str:
        if self.motif is None:
            return y.dotbracket
        return motif_for_domain(y, self.motif.top_pair, self.motif.sealed_pairs).key


def as_target(target: Union[DesignTarget, Structure, Motif]) -> DesignTarget:
    if isinstance(target, DesignTarget):
        return target
    if isinstance(target, Motif):
        return DesignTarget.from_motif(target)
    return DesignTarget.from_structure(target)


def loop_difference(y_r: Structure, y_t: Structure,
                    c: FoldConstraints = NO_CONSTRAINTS) -> Tuple[List[Loop], List[Loop]]:
    """Loops only in ``y_r`` and loops only in ``y_t``, in decomposition order."""
    if y_r.length != y_t.length:
        raise LengthMismatch("structures of length {} and {}".format(y_r.length, y_t.length))
    rival, target = c.member_loops(y_r), c.member_loops(y_t)
    rival_set, target_set = set(rival), set(target)
    return [z for z in rival if z not in target_set], [z for z in target if z not in rival_set]


def differential_positions(y_r: Structure, y_t: Structure,
                           c: FoldConstraints = NO_CONSTRAINTS) -> FrozenSet[int]:
    """
    Positions whose nucleotides can change ddG(y_r, y_t): the critical
    positions of every loop in the symmetric difference of the loop sets.
    """
    only_r, only_t = loop_difference(y_r, y_t, c)
    out = set()
    for z in only_r + only_t:
        out.update(z.critical.positions)
    return frozenset(out)


def ddg(model: EnergyModel, x: PartialSequence, y_r: Structure, y_t: Structure,
        c: FoldConstraints = NO_CONSTRAINTS) -> float:
    """
    dG(x, y_r) - dG(x, y_t) in deci-kcal, evaluated over the differing loops
    only; +inf when a rival pair is non-canonical under ``x``.
    """
    only_r, only_t = loop_difference(y_r, y_t, c)
    total = 0
    for z in only_r:
        try:
            total += loop_energy(model, z, x)
        except NonCanonicalPair:
            return INF
    for z in only_t:
        total -= loop_energy(model, z, x)
    return total


class RivalProvenance(NamedTuple):
    seed: int
    sample: int
    sequence: str


@dataclass(frozen=True)
class RivalSet:
    """
    Rivals of a target together with their overall differential positions.

    :param target: (DesignTarget) the target
    :param rivals: (tuple) distinct rival structures, none equal to the target
    :param delta: (frozenset) union of the differential positions of all rivals
    :param provenance: (tuple) sampling metadata per rival, or empty
    """
    target: DesignTarget
    rivals: Tuple[Structure, ...]
    delta: FrozenSet[int]
    provenance: Tuple[RivalProvenance, ...] = field(default=(), compare=False)
    differences: Tuple[Tuple[Tuple[Loop, ...], Tuple[Loop, ...]], ...] = field(default=(), compare=False,
                                                                                repr=False)

    @classmethod
    def build(cls, target, rivals: Sequence[Structure],
              provenance: Sequence[RivalProvenance] = ()) -> 'RivalSet':
        target = as_target(target)
        rivals = tuple(rivals)
        if not rivals:
            raise EmptyRivalSet("no rivals for {}".format(target.key))
        if len({y.pairs for y in rivals}) != len(rivals):
            raise InputError("rivals must be pairwise distinct")
        delta = set()
        differences = []
        for y in rivals:
            if y.pairs == target.pairs:
                raise InputError("the target cannot be its own rival")
            only_r, only_t = loop_difference(y, target.structure, target.constraints)
            differences.append((tuple(only_r), tuple(only_t)))
            for z in only_r + only_t:
                delta.update(z.critical.positions)
        return cls(target, rivals, frozenset(delta), tuple(provenance), tuple(differences))

    def __len__(self):
        return len(self.rivals)

    def with_rival(self, y: Structure, provenance: Optional[RivalProvenance] = None) -> 'RivalSet':
        prov = self.provenance + (provenance,) if provenance is not None and self.provenance else ()
        return RivalSet.build(self.target, self.rivals + (y,), prov)

    def keys(self) -> Tuple[str, ...]:
        return tuple(self.target.rival_key(y) for y in self.rivals)

    def ddg_batch(self, model: EnergyModel, codes: Mapping[int, np.ndarray], size: int) -> np.ndarray:
        """
        Per-rival ddG over a batch of assignments of ``delta``.
        :return: float array of shape (rivals, size)
        """
        out = np.zeros((len(self.rivals), size), dtype=np.float64)
        for r, (only_r, only_t) in enumerate(self.differences):
            for z in only_r:
                out[r] += loop_energy_batch(model, z, codes, size)
            for z in only_t:
                out[r] -= loop_energy_batch(model, z, codes, size)
        return out


def aggregate_ddg(rival_ddg: np.ndarray, rt: float, axis: int = 0) -> np.ndarray:
    """
    -RT ln sum_r exp(-ddG_r / RT) in deci-kcal; +inf where every rival is
    infeasible.
    """
    kt = 10.0 * rt
    with np.errstate(divide='ignore', invalid='ignore'):
        return -kt * logsumexp(-np.asarray(rival_ddg, dtype=np.float64) / kt, axis=axis)


def ddg_multi(model: EnergyModel, x: PartialSequence, rivals: RivalSet) -> float:
    """Aggregated gap of the whole rival set under ``x``."""
    if not len(rivals):
        raise EmptyRivalSet("empty rival set")
    missing = rivals.delta - x.domain
    if missing:
        raise IncompleteAssignment(missing)
    c = rivals.target.constraints
    values = [ddg(model, x, y, rivals.target.structure, c) for y in rivals.rivals]
    return float(aggregate_ddg(np.array(values), model.rt))


def random_compatible_sequence(target: DesignTarget, rng: np.random.Generator) -> PartialSequence:
    """Pair types uniform over the six canonical pairs, unpaired bases uniform over ACGU."""
    pairs = sorted(target.pairs)
    unpaired = target.unpaired
    pair_draws = rng.integers(0, len(CANONICAL_PAIRS), size=len(pairs))
    nt_draws = rng.integers(0, len(NUCLEOTIDES), size=len(unpaired))
    mapping: Dict[int, str] = {}
    for (i, j), t in zip(pairs, pair_draws):
        mapping[i], mapping[j] = CANONICAL_PAIRS[t][0], CANONICAL_PAIRS[t][1]
    for pos, t in zip(unpaired, nt_draws):
        mapping[pos] = NUCLEOTIDES[t]
    return PartialSequence.from_mapping(mapping)


def sample_rivals(model: EnergyModel, target, n: int, seed: int) -> RivalSet:
    """
    Folds ``n`` random sequences compatible with ``target`` (within its
    constrained ensemble) and keeps the distinct MFE results that differ from
    it, in order of discovery.
    :raises NoRivalsFound: every fold returned the target
    """
    if n < 1:
        raise InputError("sample count must be positive, got {}".format(n))
    target = as_target(target)
    rng = np.random.default_rng(seed)
    found, provenance, seen = [], [], {target.pairs}
    for sample in range(n):
        x = random_compatible_sequence(target, rng)
        y = FoldingDP(model, x, target.constraints).mfe(check_unique=False).structure
        if y.pairs in seen:
            continue
        seen.add(y.pairs)
        found.append(y)
        provenance.append(RivalProvenance(seed, sample, x.to_string(target.span)))
    if not found:
        raise NoRivalsFound("{} samples of {} all folded into the target".format(n, target.key))
    logger.debug("sampled %d rivals for %s (seed %d)", len(found), target.key, seed)
    return RivalSet.build(target, found, provenance)
