"""
Secondary structures, loops, loop trees and motifs.

Indices are 1-based everywhere and a pair is a tuple ``(i, j)`` with ``i < j``.
Every type here is immutable once built, so instances can be shared freely
between worker threads.
"""
import enum
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from rnapbound.common.errors import (HairpinTooSmall, IllegalCharacter, InputError, LonelyPair,
                                     MissingPosition, NotContiguous, UnbalancedBrackets)

Pair = Tuple[int, int]

NUCLEOTIDES = 'ACGU'
CANONICAL_PAIRS = ('CG', 'GC', 'AU', 'UA', 'GU', 'UG')
DEFAULT_MIN_HAIRPIN = 3


class LoopKind(str, enum.Enum):
    EXTERNAL = 'E'
    HAIRPIN = 'H'
    STACK = 'S'
    BULGE = 'B'
    INTERNAL = 'I'
    MULTI = 'M'


# order of the loop-kind prefix in motif keys
KEY_KIND_ORDER = (LoopKind.EXTERNAL, LoopKind.STACK, LoopKind.BULGE, LoopKind.INTERNAL,
                  LoopKind.MULTI, LoopKind.HAIRPIN)


@dataclass(frozen=True)
class Structure:
    """
    A pseudoknot-free secondary structure.

    :param dotbracket: (str) the structure over '(', ')' and '.'
    :param pairs: (frozenset) the matched pairs of ``dotbracket``
    """
    dotbracket: str
    pairs: FrozenSet[Pair]

    @property
    def length(self) -> int:
        return len(self.dotbracket)

    @cached_property
    def partner(self) -> Tuple[int, ...]:
        # partner[i] == 0 means i is unpaired; index 0 is unused
        table = [0] * (self.length + 2)
        for i, j in self.pairs:
            table[i] = j
            table[j] = i
        return tuple(table)

    @cached_property
    def unpaired(self) -> FrozenSet[int]:
        return frozenset(i for i in range(1, self.length + 1) if self.partner[i] == 0)

    def sorted_pairs(self) -> List[Pair]:
        return sorted(self.pairs)

    @classmethod
    def from_pairs(cls, length: int, pairs: Iterable[Pair]) -> 'Structure':
        pairs = frozenset(pairs)
        return cls(render_dotbracket(length, pairs), pairs)

    def __str__(self):
        return self.dotbracket


def render_dotbracket(length: int, pairs: Iterable[Pair]) -> str:
    chars = ['.'] * length
    for i, j in pairs:
        chars[i - 1] = '('
        chars[j - 1] = ')'
    return ''.join(chars)


def parse_dotbracket(text: str, min_hairpin: int = DEFAULT_MIN_HAIRPIN,
                     allow_lonely: bool = True) -> Structure:
    """
    Parses a dot-bracket string by stack matching.

    :param text: (str) dot-bracket string, surrounding whitespace is ignored
    :param min_hairpin: (int) least number of bases enclosed by any pair
    :param allow_lonely: (bool) accept pairs with no stacked neighbour
    :return: Structure
    """
    text = text.strip()
    if not text:
        raise InputError("empty structure")
    stack = []
    pairs = set()
    for pos, char in enumerate(text, start=1):
        if char == '(':
            stack.append(pos)
        elif char == ')':
            if not stack:
                raise UnbalancedBrackets(pos)
            pairs.add((stack.pop(), pos))
        elif char != '.':
            raise IllegalCharacter(char, pos)
    if stack:
        raise UnbalancedBrackets(stack[-1])

    for i, j in sorted(pairs):
        if j - i - 1 < min_hairpin:
            raise HairpinTooSmall((i, j), min_hairpin)
    if not allow_lonely:
        for i, j in sorted(pairs):
            if (i - 1, j + 1) not in pairs and (i + 1, j - 1) not in pairs:
                raise LonelyPair((i, j))
    return Structure(text, frozenset(pairs))


@dataclass(frozen=True)
class CriticalPositions:
    paired: Tuple[Pair, ...]
    mismatch: Tuple[int, ...]

    @property
    def positions(self) -> FrozenSet[int]:
        out = set(self.mismatch)
        for i, j in self.paired:
            out.add(i)
            out.add(j)
        return frozenset(out)

    def union(self, other: 'CriticalPositions') -> 'CriticalPositions':
        return CriticalPositions(tuple(sorted(set(self.paired) | set(other.paired))),
                                 tuple(sorted(set(self.mismatch) | set(other.mismatch))))


EMPTY_CRITICAL = CriticalPositions((), ())


@dataclass(frozen=True)
class Loop:
    """
    One loop of a structure. ``closing_pairs`` holds the outer pair first
    (except for the external loop, which has none) followed by the branches
    in 5' to 3' order. Two loops are the same loop iff kind and closing pairs
    agree.
    """
    kind: LoopKind
    closing_pairs: Tuple[Pair, ...]
    length: int = field(compare=False)

    @property
    def outer_pair(self) -> Optional[Pair]:
        if self.kind == LoopKind.EXTERNAL:
            return None
        return self.closing_pairs[0]

    @property
    def branches(self) -> Tuple[Pair, ...]:
        if self.kind == LoopKind.EXTERNAL:
            return self.closing_pairs
        return self.closing_pairs[1:]

    @property
    def unpaired(self) -> int:
        if self.kind == LoopKind.EXTERNAL:
            inside = self.length
        else:
            i, j = self.closing_pairs[0]
            inside = j - i - 1
        return inside - sum(l - k + 1 for k, l in self.branches)

    @property
    def sides(self) -> Tuple[int, int]:
        """Unpaired bases on the 5' and 3' side of a two-pair loop."""
        (i, j), (k, l) = self.closing_pairs
        return k - i - 1, j - l - 1

    @property
    def critical(self) -> CriticalPositions:
        return critical_positions(self)

    def label(self) -> str:
        return '{}<{}>'.format(self.kind.value, ','.join('({},{})'.format(i, j) for i, j in self.closing_pairs))

    def __str__(self):
        return self.label()


def critical_positions(z: Loop) -> CriticalPositions:
    """
    Positions whose nucleotides determine the energy of ``z``: the closing
    pairs plus the mismatch neighbours of each loop kind.
    """
    if z.kind in (LoopKind.STACK, LoopKind.BULGE):
        return CriticalPositions(z.closing_pairs, ())
    if z.kind == LoopKind.HAIRPIN:
        i, j = z.closing_pairs[0]
        return CriticalPositions(z.closing_pairs, (i + 1, j - 1))
    if z.kind == LoopKind.INTERNAL:
        (i, j), (k, l) = z.closing_pairs
        return CriticalPositions(z.closing_pairs, tuple(sorted({i + 1, j - 1, k - 1, l + 1})))

    mismatch = set()
    if z.kind == LoopKind.MULTI:
        i, j = z.closing_pairs[0]
        mismatch.update((i + 1, j - 1))
    for k, l in z.branches:
        mismatch.update((k - 1, l + 1))
    mismatch = {p for p in mismatch if 1 <= p <= z.length}
    return CriticalPositions(z.closing_pairs, tuple(sorted(mismatch)))


def _branches_between(partner: Sequence[int], start: int, end: int) -> List[Pair]:
    branches = []
    k = start
    while k <= end:
        l = partner[k]
        if l > k:
            branches.append((k, l))
            k = l + 1
        else:
            k += 1
    return branches


def _loop_closed_by(y: Structure, i: int, j: int) -> Loop:
    branches = _branches_between(y.partner, i + 1, j - 1)
    if not branches:
        kind = LoopKind.HAIRPIN
    elif len(branches) == 1:
        k, l = branches[0]
        n5, n3 = k - i - 1, j - l - 1
        if n5 == 0 and n3 == 0:
            kind = LoopKind.STACK
        elif n5 == 0 or n3 == 0:
            kind = LoopKind.BULGE
        else:
            kind = LoopKind.INTERNAL
    else:
        kind = LoopKind.MULTI
    return Loop(kind, ((i, j),) + tuple(branches), y.length)


def oversized_interior(loops: Iterable[Loop], max_interior: int) -> Optional[Loop]:
    """First bulge or internal loop with more than ``max_interior`` unpaired bases, if any."""
    for z in loops:
        if z.kind in (LoopKind.BULGE, LoopKind.INTERNAL) and z.unpaired > max_interior:
            return z
    return None


def external_loop(y: Structure) -> Loop:
    return Loop(LoopKind.EXTERNAL, tuple(_branches_between(y.partner, 1, y.length)), y.length)


def decompose_loops(y: Structure) -> List[Loop]:
    """
    Splits ``y`` into its loops, external loop first, then one loop per pair
    in order of the pair's 5' index (a pre-order walk of the loop tree).
    """
    return [external_loop(y)] + [_loop_closed_by(y, i, j) for i, j in y.sorted_pairs()]


@dataclass(frozen=True)
class LoopTree:
    """
    Rooted tree of the loops of a structure. Node 0 is the external loop; the
    edge between a node and its parent is the node's outer pair.
    """
    structure: Structure
    nodes: Tuple[Loop, ...]
    parent: Tuple[int, ...]
    children: Tuple[Tuple[int, ...], ...]
    root: int = 0

    @property
    def length(self) -> int:
        return self.structure.length

    def __len__(self):
        return len(self.nodes)

    @cached_property
    def _node_by_pair(self) -> Dict[Pair, int]:
        return {loop.outer_pair: idx for idx, loop in enumerate(self.nodes) if loop.outer_pair is not None}

    def node_of_pair(self, pair: Pair) -> int:
        """Node of the loop whose outer pair is ``pair``."""
        return self._node_by_pair[pair]

    def edge_pair(self, node: int) -> Optional[Pair]:
        return self.nodes[node].outer_pair

    def is_hairpin(self, node: int) -> bool:
        return self.nodes[node].kind == LoopKind.HAIRPIN

    def leaves(self) -> List[int]:
        return [idx for idx, kids in enumerate(self.children) if not kids]

    def subtree(self, node: int) -> List[int]:
        out = []
        todo = [node]
        while todo:
            cur = todo.pop()
            out.append(cur)
            todo.extend(reversed(self.children[cur]))
        return out


def build_loop_tree(y: Structure) -> LoopTree:
    loops = decompose_loops(y)
    node_by_pair = {loop.outer_pair: idx for idx, loop in enumerate(loops) if loop.outer_pair is not None}
    parent = [-1] * len(loops)
    children = []
    for idx, loop in enumerate(loops):
        kids = tuple(node_by_pair[pair] for pair in loop.branches)
        for kid in kids:
            parent[kid] = idx
        children.append(kids)
    return LoopTree(y, tuple(loops), tuple(parent), tuple(children))


@dataclass(frozen=True)
class Motif:
    """
    A connected set of loop-tree nodes.

    ``ipairs`` link two loops of the motif, ``bpairs`` link it to the
    excluded context: the outer pair of the top node (unless the top node is
    the external loop) and the outer pairs of excluded children. The span is
    every position of the motif's loops; interiors of excluded children are
    left out.
    """
    tree: LoopTree = field(compare=False, repr=False)
    node_ids: FrozenSet[int] = field(compare=False)
    top: int = field(compare=False)
    ipairs: FrozenSet[Pair]
    bpairs: FrozenSet[Pair]
    span_positions: Tuple[int, ...]
    depth: int = field(compare=False)
    width: int = field(compare=False)

    @property
    def card(self) -> int:
        return len(self.node_ids)

    @property
    def length(self) -> int:
        return len(self.span_positions)

    @property
    def pairs(self) -> FrozenSet[Pair]:
        return self.ipairs | self.bpairs

    @property
    def top_pair(self) -> Optional[Pair]:
        return self.tree.edge_pair(self.top)

    @property
    def sealed_pairs(self) -> FrozenSet[Pair]:
        return self.bpairs - {self.top_pair}

    @property
    def descendants(self) -> Tuple[int, ...]:
        """Excluded children of motif nodes, in node order."""
        return tuple(sorted(kid for node in self.node_ids for kid in self.tree.children[node]
                            if kid not in self.node_ids))

    def loops(self) -> List[Loop]:
        return [self.tree.nodes[node] for node in sorted(self.node_ids)]

    @cached_property
    def unpaired_positions(self) -> Tuple[int, ...]:
        paired = set()
        for i, j in self.pairs:
            paired.add(i)
            paired.add(j)
        return tuple(p for p in self.span_positions if p not in paired)

    @cached_property
    def key(self) -> str:
        return canonical_motif_key(self)

    def __str__(self):
        return self.key


def _levels(tree: LoopTree, top: int, ids: FrozenSet[int]) -> List[int]:
    counts = []
    frontier = [top]
    while frontier:
        counts.append(len(frontier))
        frontier = [kid for node in frontier for kid in tree.children[node] if kid in ids]
    return counts


def motif_from_nodes(tree: LoopTree, ids: Iterable[int]) -> Motif:
    ids = frozenset(ids)
    if not ids:
        raise InputError("a motif needs at least one loop")
    unknown = [node for node in ids if not 0 <= node < len(tree)]
    if unknown:
        raise InputError("unknown loop-tree nodes {}".format(sorted(unknown)))
    tops = [node for node in ids if tree.parent[node] not in ids]
    if len(tops) != 1:
        raise NotContiguous("nodes {} do not form a connected subtree".format(sorted(ids)))
    top = tops[0]

    ipairs = frozenset(tree.edge_pair(node) for node in ids if node != top)
    excluded = [kid for node in ids for kid in tree.children[node] if kid not in ids]
    bpairs = {tree.edge_pair(kid) for kid in excluded}
    if top != tree.root:
        bpairs.add(tree.edge_pair(top))
        start, end = tree.edge_pair(top)
    else:
        start, end = 1, tree.length
    hidden = set()
    for kid in excluded:
        k, l = tree.edge_pair(kid)
        hidden.update(range(k + 1, l))
    span = tuple(p for p in range(start, end + 1) if p not in hidden)

    levels = _levels(tree, top, ids)
    return Motif(tree, ids, top, ipairs, frozenset(bpairs), span, len(levels), max(levels))


def motif_for_domain(y: Structure, top_pair: Optional[Pair], sealed_pairs: Iterable[Pair]) -> Motif:
    """
    Motif of ``y`` made of every loop inside ``top_pair`` (or the whole
    structure when None) that is not enclosed by one of ``sealed_pairs``.
    Used to read back a folded member of a motif ensemble.
    """
    tree = build_loop_tree(y)
    sealed = frozenset(sealed_pairs)
    start = tree.root if top_pair is None else tree.node_of_pair(top_pair)
    ids = []
    todo = [start]
    while todo:
        node = todo.pop()
        ids.append(node)
        todo.extend(kid for kid in tree.children[node] if tree.edge_pair(kid) not in sealed)
    return motif_from_nodes(tree, ids)


def kind_prefix(kinds: Iterable[LoopKind]) -> str:
    counts = Counter(kinds)
    return ''.join('{}{}'.format(kind.value, counts[kind]) for kind in KEY_KIND_ORDER if counts[kind])


def canonical_motif_key(m: Motif) -> str:
    """
    ``<kinds>:<dot-bracket over the span>``, each excluded region written as
    '*' between the brackets of its boundary pair, e.g. ``M1S2:(.(*).(*).)``.
    """
    opening = {i: j for i, j in m.pairs}
    closing = {j: i for i, j in m.pairs}
    sealed_left = {i for i, _ in m.sealed_pairs}
    body = []
    for pos in m.span_positions:
        if pos in opening:
            body.append('(*' if pos in sealed_left else '(')
        elif pos in closing:
            body.append(')')
        else:
            body.append('.')
    return '{}:{}'.format(kind_prefix(loop.kind for loop in m.loops()), ''.join(body))


def expand_motif_key(key: str, min_hairpin: int = DEFAULT_MIN_HAIRPIN) -> Structure:
    """Structure of a motif key with each '*' filled by a minimal hairpin interior."""
    _, _, body = key.partition(':')
    return parse_dotbracket(body.replace('*', '.' * min_hairpin), min_hairpin=min_hairpin)


@dataclass(frozen=True)
class PartialSequence:
    """
    Nucleotides assigned to a subset of positions.

    :param assignments: (tuple) sorted ``(position, nucleotide)`` items
    """
    assignments: Tuple[Tuple[int, str], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, str]) -> 'PartialSequence':
        items = []
        for pos, nt in sorted(mapping.items()):
            nt = nt.upper()
            if nt not in NUCLEOTIDES:
                raise IllegalCharacter(nt, pos)
            items.append((int(pos), nt))
        return cls(tuple(items))

    @classmethod
    def from_string(cls, seq: str, positions: Optional[Sequence[int]] = None) -> 'PartialSequence':
        seq = seq.strip()
        if positions is None:
            positions = range(1, len(seq) + 1)
        if len(positions) != len(seq):
            raise InputError("{} nucleotides for {} positions".format(len(seq), len(positions)))
        return cls.from_mapping(dict(zip(positions, seq)))

    @cached_property
    def mapping(self) -> Dict[int, str]:
        return dict(self.assignments)

    @property
    def domain(self) -> FrozenSet[int]:
        return frozenset(self.mapping)

    def __getitem__(self, pos: int) -> str:
        return self.mapping[pos]

    def __contains__(self, pos) -> bool:
        return pos in self.mapping

    def __len__(self):
        return len(self.assignments)

    def get(self, pos: int, default=None):
        return self.mapping.get(pos, default)

    def code(self, pos: int) -> int:
        return NUCLEOTIDES.index(self.mapping[pos])

    def to_string(self, positions: Optional[Iterable[int]] = None) -> str:
        if positions is None:
            return ''.join(nt for _, nt in self.assignments)
        return ''.join(self.mapping[pos] for pos in positions)

    def compatible_with(self, pairs: Iterable[Pair]) -> bool:
        for i, j in pairs:
            if i in self.mapping and j in self.mapping and \
                    self.mapping[i] + self.mapping[j] not in CANONICAL_PAIRS:
                return False
        return True

    def updated(self, mapping: Mapping[int, str]) -> 'PartialSequence':
        merged = dict(self.mapping)
        merged.update(mapping)
        return PartialSequence.from_mapping(merged)

    def __str__(self):
        return self.to_string()


def project(x: PartialSequence, positions: Iterable[int]) -> PartialSequence:
    positions = frozenset(positions)
    missing = positions - x.domain
    if missing:
        raise MissingPosition(missing)
    return PartialSequence(tuple(item for item in x.assignments if item[0] in positions))
