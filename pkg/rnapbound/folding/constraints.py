from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from rnapbound.common.errors import IncompleteAssignment, InvalidConstraints
from rnapbound.structure.core import Loop, LoopKind, Motif, Pair, PartialSequence, Structure, decompose_loops


@dataclass(frozen=True)
class FoldConstraints:
    """
    Restrictions on the folding ensemble.

    :param forced_pairs: (frozenset) pairs every member must contain
    :param region: (tuple) window (i, j) closed by the forced pair (i, j); the
        loop outside it is not part of the ensemble. None folds the whole sequence.
    :param sealed_pairs: (frozenset) forced pairs whose interior is cut out of
        the folding domain (boundary pairs toward excluded motif context)
    :param length: (int) coordinate length of returned structures; defaults to
        the largest assigned position
    """
    forced_pairs: FrozenSet[Pair] = frozenset()
    region: Optional[Pair] = None
    sealed_pairs: FrozenSet[Pair] = frozenset()
    length: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'forced_pairs', frozenset(self.forced_pairs))
        object.__setattr__(self, 'sealed_pairs', frozenset(self.sealed_pairs))
        if self.region is not None:
            object.__setattr__(self, 'region', tuple(self.region))
        self._validate()

    @classmethod
    def for_motif(cls, m: Motif) -> 'FoldConstraints':
        """Constraints of the motif ensemble: every boundary pair clamped."""
        return cls(forced_pairs=m.bpairs, region=m.top_pair, sealed_pairs=m.sealed_pairs,
                   length=m.tree.length)

    def _validate(self):
        pairs = sorted(self.forced_pairs)
        seen = set()
        for i, j in pairs:
            if not i < j:
                raise InvalidConstraints("pair {} is not ordered".format((i, j)))
            if i in seen or j in seen:
                raise InvalidConstraints("forced pairs share a position at {}".format((i, j)))
            seen.update((i, j))
        for a, b in pairs:
            for c, d in pairs:
                if a < c < b < d:
                    raise InvalidConstraints("forced pairs {} and {} cross".format((a, b), (c, d)))
        if not self.sealed_pairs <= self.forced_pairs:
            raise InvalidConstraints("sealed pairs must be forced")
        if self.region is not None:
            if self.region not in self.forced_pairs:
                raise InvalidConstraints("region {} is not closed by a forced pair".format(self.region))
            if self.region in self.sealed_pairs:
                raise InvalidConstraints("the region pair cannot be sealed")
            start, end = self.region
            if any(i < start or j > end for i, j in pairs):
                raise InvalidConstraints("forced pairs outside region {}".format(self.region))

    def coordinate_length(self, x: PartialSequence) -> int:
        if self.length is not None:
            return self.length
        return max(x.domain) if len(x) else 0

    def domain(self, x: PartialSequence) -> Tuple[int, ...]:
        """Positions folded under these constraints, ascending."""
        if self.region is not None:
            start, end = self.region
        else:
            start, end = 1, self.coordinate_length(x)
        hidden = set()
        for k, l in self.sealed_pairs:
            hidden.update(range(k + 1, l))
        return tuple(p for p in range(start, end + 1) if p not in hidden)

    def checked_domain(self, x: PartialSequence) -> Tuple[int, ...]:
        positions = self.domain(x)
        missing = set(positions) - x.domain
        if missing:
            raise IncompleteAssignment(missing)
        return positions

    def counts_loop(self, z: Loop) -> bool:
        """Whether ``z`` contributes to the energy of an ensemble member."""
        if self.region is not None and z.kind == LoopKind.EXTERNAL:
            return False
        return z.outer_pair not in self.sealed_pairs

    def member_loops(self, y: Structure) -> List[Loop]:
        return [z for z in decompose_loops(y) if self.counts_loop(z)]

    @property
    def is_trivial(self) -> bool:
        return not self.forced_pairs and self.region is None


NO_CONSTRAINTS = FoldConstraints()
