"""
Candidate motifs rooted at a loop: every connected subtree of the loop tree
hanging from that loop that stays within the depth, width and size limits.
"""
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional

from rnapbound.bounders.hybrid import BoundMode
from rnapbound.common.errors import ConfigError
from rnapbound.folding.exact import DEFAULT_LEN_CAP
from rnapbound.structure.core import LoopTree, Motif, motif_from_nodes


@dataclass(frozen=True)
class DecompConfig:
    """
    :param max_depth: (int) levels of loops in a candidate, None for no limit
    :param max_width: (int) loops on any one level of a candidate, None for no limit
    :param max_loops: (int) loops in a candidate, None for no limit
    :param exact_len_cap: (int) longest motif bounded by exhaustive enumeration
    :param eval_leaf_hairpins: (bool) bound hairpin leaves instead of taking 1
    :param mode: (BoundMode) ablation; no_decomposition bounds with the best single candidate
    """
    max_depth: Optional[int] = 5
    max_width: Optional[int] = 3
    max_loops: Optional[int] = 6
    exact_len_cap: int = DEFAULT_LEN_CAP
    eval_leaf_hairpins: bool = False
    mode: BoundMode = BoundMode.HYBRID

    def __post_init__(self):
        object.__setattr__(self, 'mode', BoundMode.parse(self.mode))
        for name in ('max_depth', 'max_width', 'max_loops', 'exact_len_cap'):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ConfigError("{} must be a positive integer, got {!r}".format(name, value))

    @classmethod
    def unconstrained(cls, **kwargs) -> 'DecompConfig':
        return cls(max_depth=None, max_width=None, max_loops=None, **kwargs)

    def admits(self, depth: int, width: int, card: int) -> bool:
        return ((self.max_depth is None or depth <= self.max_depth)
                and (self.max_width is None or width <= self.max_width)
                and (self.max_loops is None or card <= self.max_loops))


def _levels(tree: LoopTree, top: int) -> Dict[int, int]:
    level = {top: 1}
    todo = [top]
    while todo:
        node = todo.pop()
        for kid in tree.children[node]:
            level[kid] = level[node] + 1
            todo.append(kid)
    return level


def _shape(node_set: FrozenSet[int], level: Dict[int, int]):
    counts = {}
    for node in node_set:
        counts[level[node]] = counts.get(level[node], 0) + 1
    return max(counts), max(counts.values()), len(node_set)


def motif_gen(tree: LoopTree, eta: int, cfg: DecompConfig) -> List[Motif]:
    """
    Candidates rooted at loop ``eta``, the single loop {eta} first, then by
    size and node ids. Grows every candidate by one child loop at a time
    and keeps each node set once.
    """
    level = _levels(tree, eta)
    start = frozenset([eta])
    seen = {start}
    frontier = [start]
    while frontier:
        grown = []
        for node_set in frontier:
            for node in sorted(node_set):
                for kid in tree.children[node]:
                    if kid in node_set:
                        continue
                    bigger = node_set | {kid}
                    if bigger in seen or not cfg.admits(*_shape(bigger, level)):
                        continue
                    seen.add(bigger)
                    grown.append(bigger)
        frontier = grown
    ordered = sorted(seen, key=lambda s: (len(s), sorted(s)))
    return [motif_from_nodes(tree, node_set) for node_set in ordered]
