"""
Memoized decomposition of a loop tree into motifs.

    best(eta) = min over candidates m rooted at eta of
                pbound(m) * prod over excluded children d of m of best(d)

Hairpin leaves are a base case of 1 unless ``eval_leaf_hairpins`` is set.
The count of decompositions follows the same recursion with a sum of
products.

The no_decomposition ablation keeps the smallest bound of any single
candidate, over every loop that is not a base case.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from rnapbound.bounders.hybrid import BoundMode
from rnapbound.common.bound_cache import BoundCache, cache_get, cache_put
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.decomp.motif_gen import DecompConfig, motif_gen
from rnapbound.structure.core import LoopTree, Motif, Structure, build_loop_tree

logger = logging.getLogger(__name__)

BoundFn = Callable[[Motif], PBoundRecord]


@dataclass
class DecompResult:
    """
    :param best: (float) tightest bound found for the subtree
    :param motifs: (list) the optimal decomposition as (Motif, PBoundRecord), pre-order
    :param count_explored: (int) number of decompositions the search covered
    :param backpointers: (dict) node -> chosen Motif, None for base-case hairpins
    :param bound_calls: (int) bound_fn invocations made by this run
    :param single: (Motif) the chosen motif of the no_decomposition ablation
    """
    tree: LoopTree
    root: int
    best: float
    motifs: List[Tuple[Motif, PBoundRecord]] = field(default_factory=list)
    count_explored: int = 0
    backpointers: Dict[int, Optional[Motif]] = field(default_factory=dict)
    values: Dict[int, float] = field(default_factory=dict)
    records: Dict[str, PBoundRecord] = field(default_factory=dict)
    bound_calls: int = 0
    cache_hits: int = 0
    single: Optional[Motif] = None


def _is_base_case(tree: LoopTree, node: int, cfg: DecompConfig) -> bool:
    return node != tree.root and tree.is_hairpin(node) and not cfg.eval_leaf_hairpins


def _post_order(tree: LoopTree, eta: int) -> List[int]:
    return list(reversed(tree.subtree(eta)))


class _Decomposer(object):
    def __init__(self, tree: LoopTree, cfg: DecompConfig, cache: Optional[BoundCache], bound_fn: BoundFn,
                 params_hash: str, executor: Optional[Executor] = None):
        self.tree = tree
        self.cfg = cfg
        self.cache = cache
        self.bound_fn = bound_fn
        self.params_hash = params_hash
        self.executor = executor
        self.records: Dict[str, PBoundRecord] = {}
        self.bound_calls = 0
        self.cache_hits = 0

    def resolve(self, candidates: List[Motif]):
        """Looks up or computes the bound of every candidate key not yet known."""
        todo = []
        for m in candidates:
            if m.key in self.records:
                continue
            hit = cache_get(self.cache, m.key, self.params_hash) if self.cache is not None else None
            if hit is not None:
                self.cache_hits += 1
                self.records[m.key] = hit
            elif all(m.key != other.key for other in todo):
                todo.append(m)
        if self.executor is not None and len(todo) > 1:
            computed = list(self.executor.map(self.bound_fn, todo))
        else:
            computed = [self.bound_fn(m) for m in todo]
        self.bound_calls += len(todo)
        for m, record in zip(todo, computed):
            self.records[m.key] = record
            if self.cache is not None:
                cache_put(self.cache, m.key, record)

    def _rank(self, m: Motif):
        return self.records[m.key].pbound, m.card, m.key

    def run_single(self, eta: int) -> DecompResult:
        candidates = [m for node in self.tree.subtree(eta) if not _is_base_case(self.tree, node, self.cfg)
                      for m in motif_gen(self.tree, node, self.cfg)]
        self.resolve(candidates)
        best = min(candidates, key=self._rank)
        result = DecompResult(self.tree, eta, self.records[best.key].pbound, count_explored=len(candidates),
                              backpointers={best.top: best}, values={eta: self.records[best.key].pbound},
                              records=self.records, bound_calls=self.bound_calls, cache_hits=self.cache_hits,
                              single=best)
        result.motifs = [(best, self.records[best.key])]
        return result

    def run(self, eta: int) -> DecompResult:
        if self.cfg.mode == BoundMode.NO_DECOMPOSITION:
            return self.run_single(eta)
        values: Dict[int, float] = {}
        choice: Dict[int, Optional[Motif]] = {}
        counts: Dict[int, int] = {}
        for node in _post_order(self.tree, eta):
            if _is_base_case(self.tree, node, self.cfg):
                values[node], choice[node], counts[node] = 1.0, None, 1
                continue
            candidates = motif_gen(self.tree, node, self.cfg)
            self.resolve(candidates)
            best, best_rank, total = None, None, 0
            for m in candidates:
                value = self.records[m.key].pbound
                n_ways = 1
                for kid in m.descendants:
                    value *= values[kid]
                    n_ways *= counts[kid]
                total += n_ways
                rank = (value, m.card, m.key)
                if best_rank is None or rank < best_rank:
                    best, best_rank = m, rank
            values[node], choice[node], counts[node] = best_rank[0], best, total

        result = DecompResult(self.tree, eta, values[eta], count_explored=counts[eta], backpointers=choice,
                              values=values, records=self.records, bound_calls=self.bound_calls,
                              cache_hits=self.cache_hits)
        result.motifs = [(m, self.records[m.key]) for m in backtrack(result)]
        return result


def decompose(tree: LoopTree, eta: int, cfg: DecompConfig, cache: Optional[BoundCache], bound_fn: BoundFn,
              params_hash: str = '', executor: Optional[Executor] = None) -> DecompResult:
    """
    Solves every subtree below ``eta`` once, bottom-up, and keeps the chosen
    candidate per node.
    :param cache: (BoundCache) consulted before ``bound_fn``, or None
    :param bound_fn: motif -> PBoundRecord
    :param executor: optional pool that bounds the candidates of one loop concurrently
    """
    return _Decomposer(tree, cfg, cache, bound_fn, params_hash, executor).run(eta)


def count_decompositions(tree: LoopTree, eta: int, cfg: DecompConfig) -> int:
    """
    Number of decompositions of the subtree at ``eta`` the candidate limits
    allow. Under no_decomposition every single candidate counts once.
    """
    if cfg.mode == BoundMode.NO_DECOMPOSITION:
        return sum(len(motif_gen(tree, node, cfg)) for node in tree.subtree(eta)
                   if not _is_base_case(tree, node, cfg))
    counts: Dict[int, int] = {}
    for node in _post_order(tree, eta):
        if _is_base_case(tree, node, cfg):
            counts[node] = 1
            continue
        total = 0
        for m in motif_gen(tree, node, cfg):
            n_ways = 1
            for kid in m.descendants:
                n_ways *= counts[kid]
            total += n_ways
        counts[node] = total
    return counts[eta]


def backtrack(result: DecompResult) -> List[Motif]:
    """Motifs of the optimal decomposition in pre-order."""
    if result.single is not None:
        return [result.single]
    out = []
    todo = [result.root]
    while todo:
        node = todo.pop()
        m = result.backpointers.get(node)
        if m is None:
            continue
        out.append(m)
        todo.extend(reversed(m.descendants))
    return out


def structure_pbound(y: Structure, cfg: DecompConfig, cache: Optional[BoundCache], bound_fn: BoundFn,
                     params_hash: str = '', key: Optional[str] = None,
                     executor: Optional[Executor] = None) -> Tuple[PBoundRecord, DecompResult]:
    """
    Bound on the largest probability any sequence gives ``y``: the product of
    the motif bounds of its best decomposition.
    """
    tree = build_loop_tree(y)
    result = decompose(tree, tree.root, cfg, cache, bound_fn, params_hash, executor)
    records = [record for _, record in result.motifs]
    record = PBoundRecord(key=key or y.dotbracket, pbound=min(1.0, result.best), method=Method.DECOMPOSED,
                          params_hash=params_hash, rival_count=sum(r.rival_count for r in records),
                          umfe_undesignable=any(r.umfe_undesignable for r in records),
                          count_explored=result.count_explored)
    logger.debug("%s: pbound %.6g from %d motifs, %d bound calls", record.key, record.pbound,
                 len(records), result.bound_calls)
    return record, result
