"""
Property checks behind the ``oracle`` command. Every check compares a fast
code path with an independent brute-force computation on inputs small
enough to enumerate. ``scale`` shrinks or grows the number of trials.
"""
import hashlib
import itertools
import logging
import math
from typing import Callable, Dict, FrozenSet, Iterator, List, NamedTuple, Optional

import numpy as np
from scipy.special import expit

from rnapbound.bounders.approx import ApproxBounder, approx_pbound
from rnapbound.bounders.exact import ExactBounder
from rnapbound.bounders.hybrid import HybridBounder
from rnapbound.bounders.rivals import (DesignTarget, RivalSet, aggregate_ddg, ddg, differential_positions,
                                       sample_rivals)
from rnapbound.common.errors import InfeasibleConstraints, NoRivalsFound
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.common.test_structures import (CHICKEN_FEET, compatible_sequence, load, random_sequence,
                                              structure_corpus)
from rnapbound.decomp.dp import count_decompositions, decompose, structure_pbound
from rnapbound.decomp.motif_gen import DecompConfig, motif_gen
from rnapbound.energy.model import EnergyModel, motif_energy
from rnapbound.folding.constraints import FoldConstraints
from rnapbound.folding.dp import FoldingDP
from rnapbound.folding.enumerate import enumerate_ensemble
from rnapbound.folding.ensemble import mfe_fold, partition_function, prob_motif, prob_structure
from rnapbound.folding.exact import exact_motif_pbound, motif_sequences
from rnapbound.structure.core import (CANONICAL_PAIRS, NUCLEOTIDES, LoopTree, Motif, PartialSequence,
                                      Structure, build_loop_tree, motif_from_nodes)

logger = logging.getLogger(__name__)

TINY_TARGETS = ('(...)', '((...))', '(...).', '.(...)', '(....)')
SOUNDNESS_TARGETS = TINY_TARGETS + ('((...)).', '.((...))', '(.(...))', '((....))')
SYNTHETIC_HASH = 'synthetic'
ORACLE_CAP = 200000


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


# brute-force references

def compatible_sequences(y: Structure) -> Iterator[PartialSequence]:
    """Every sequence compatible with ``y``, pair types first."""
    pairs = y.sorted_pairs()
    unpaired = sorted(y.unpaired)
    for pair_types in itertools.product(CANONICAL_PAIRS, repeat=len(pairs)):
        mapping = {}
        for (i, j), bases in zip(pairs, pair_types):
            mapping[i], mapping[j] = bases[0], bases[1]
        for nts in itertools.product(NUCLEOTIDES, repeat=len(unpaired)):
            mapping.update(zip(unpaired, nts))
            yield PartialSequence.from_mapping(mapping)


def max_structure_probability(model: EnergyModel, y: Structure) -> float:
    """max over compatible sequences x of p(y | x)."""
    return max(prob_structure(model, x, y) for x in compatible_sequences(y))


def exact_motif_brute_force(model: EnergyModel, m: Motif) -> float:
    """max over sequences of the motif weight over the enumerated constrained ensemble."""
    c = FoldConstraints.for_motif(m)
    kt = 10.0 * model.rt
    best = 0.0
    for x in motif_sequences(m):
        members = enumerate_ensemble(model, x, c)
        q = sum(math.exp(-e / kt) for _, e in members)
        best = max(best, math.exp(-motif_energy(model, m, x) / kt) / q)
    return best


def _components(tree: LoopTree, split: FrozenSet[int]) -> Dict[int, List[int]]:
    top_of = {tree.root: tree.root}
    groups = {tree.root: [tree.root]}
    for node in tree.subtree(tree.root)[1:]:
        top = node if node in split else top_of[tree.parent[node]]
        top_of[node] = top
        groups.setdefault(top, []).append(node)
    return groups


def brute_force_decompositions(tree: LoopTree, cfg: DecompConfig) -> Iterator[List[Motif]]:
    """
    Every decomposition the candidate limits allow, as the motifs that carry
    a bound (uncovered hairpin leaves are left out).
    """
    edges = [node for node in range(len(tree)) if node != tree.root]
    for mask in range(1 << len(edges)):
        split = frozenset(node for k, node in enumerate(edges) if mask >> k & 1)
        motifs, valid = [], True
        for top, nodes in sorted(_components(tree, split).items()):
            if top != tree.root and tree.is_hairpin(top) and not cfg.eval_leaf_hairpins:
                continue
            m = motif_from_nodes(tree, nodes)
            if not cfg.admits(m.depth, m.width, m.card):
                valid = False
                break
            motifs.append(m)
        if valid:
            yield motifs


def synthetic_bound(m: Motif) -> PBoundRecord:
    """A dyadic pseudo-bound per motif key; products of dyadic values are exact."""
    k = int(hashlib.sha256(m.key.encode()).hexdigest(), 16) % 16
    return PBoundRecord(key=m.key, pbound=(k + 1) / 16.0, method=Method.EXACT, params_hash=SYNTHETIC_HASH)


def brute_force_best(tree: LoopTree, cfg: DecompConfig, bound_fn: Callable[[Motif], PBoundRecord]) -> float:
    best = math.inf
    for motifs in brute_force_decompositions(tree, cfg):
        value = 1.0
        for m in motifs:
            value *= bound_fn(m).pbound
        best = min(best, value)
    return best


# checks

def _trials(count: int, scale: float) -> int:
    return max(1, int(round(count * scale)))


def check_folding_parity(model, rng, scale) -> CheckResult:
    worst = 0.0
    n_trials = _trials(200, scale)
    for _ in range(n_trials):
        x = random_sequence(int(rng.integers(4, 13)), rng)
        members = enumerate_ensemble(model, x)
        folded = mfe_fold(model, x, check_unique=False)
        if folded.energy != min(e for _, e in members):
            return CheckResult('folding_parity', False, 'MFE mismatch on {}'.format(x))
        q = sum(model.boltzmann(e) for _, e in members)
        worst = max(worst, abs(partition_function(model, x).q - q) / q)
    return CheckResult('folding_parity', worst <= 1e-9, '{} sequences, worst rel. error {:.2e}'.format(
        n_trials, worst))


def check_normalization(model, rng, scale) -> CheckResult:
    worst = 0.0
    for _ in range(_trials(50, scale)):
        x = random_sequence(int(rng.integers(4, 13)), rng)
        total = sum(prob_structure(model, x, y) for y, _ in enumerate_ensemble(model, x))
        worst = max(worst, abs(total - 1.0))
    return CheckResult('normalization', worst <= 1e-9, 'worst deviation {:.2e}'.format(worst))


def check_chain_rule(model, rng, scale) -> CheckResult:
    checked = 0
    for y in structure_corpus(_trials(100, scale), int(rng.integers(1 << 30)), 8, 14):
        tree = build_loop_tree(y)
        if len(tree) < 3:
            continue
        x = compatible_sequence(y, rng)
        cut = int(rng.integers(1, len(tree)))
        lower = tree.subtree(cut)
        upper = [node for node in range(len(tree)) if node not in lower]
        whole = motif_from_nodes(tree, range(len(tree)))
        p = prob_motif(model, x, whole)
        pa = prob_motif(model, x, motif_from_nodes(tree, upper))
        pb = prob_motif(model, x, motif_from_nodes(tree, lower))
        if p > pa * pb + 1e-12:
            return CheckResult('chain_rule', False, '{} on {}: {} > {}'.format(y, x, p, pa * pb))
        checked += 1
    return CheckResult('chain_rule', True, '{} splits'.format(checked))


def check_locality(model, rng, scale) -> CheckResult:
    trials = 0
    corpus = structure_corpus(_trials(20, scale), int(rng.integers(1 << 30)), 12, 24)
    per_pair = max(1, _trials(1000, scale) // len(corpus))
    for y_t in corpus:
        x = compatible_sequence(y_t, rng)
        y_r = mfe_fold(model, compatible_sequence(y_t, rng), check_unique=False).structure
        delta = differential_positions(y_r, y_t)
        outside = [p for p in range(1, y_t.length + 1) if p not in delta]
        if not outside:
            continue
        base = ddg(model, x, y_r, y_t)
        for _ in range(per_pair):
            pos = outside[int(rng.integers(len(outside)))]
            mutated = x.updated({pos: NUCLEOTIDES[int(rng.integers(4))]})
            if ddg(model, mutated, y_r, y_t) != base:
                return CheckResult('locality', False, 'mutation at {} changed ddG for {}'.format(pos, y_t))
            trials += 1
    return CheckResult('locality', True, '{} mutations'.format(trials))


def check_rival_algebra(model, rng, scale) -> CheckResult:
    kt = 10.0 * model.rt
    if expit(0.0) != 0.5:
        return CheckResult('rival_algebra', False, 'zero gap does not give 0.5')
    for k in range(1, 10):
        value = float(expit(aggregate_ddg(np.zeros(k), model.rt) / kt))
        if abs(value - 1.0 / (1 + k)) > 1e-12:
            return CheckResult('rival_algebra', False, '{} tied rivals give {}'.format(k, value))
    checked = 0
    for y in structure_corpus(_trials(100, scale), int(rng.integers(1 << 30)), 8, 16):
        try:
            rivals = sample_rivals(model, y, 8, int(rng.integers(1 << 30)))
        except NoRivalsFound:
            continue
        if len(rivals) < 2:
            continue
        fewer = RivalSet.build(y, rivals.rivals[:-1])
        small = approx_pbound(model, y, fewer, ORACLE_CAP, SYNTHETIC_HASH)
        large = approx_pbound(model, y, rivals, ORACLE_CAP, SYNTHETIC_HASH)
        if small.method == large.method == Method.APPROX and large.pbound > small.pbound + 1e-12:
            return CheckResult('rival_algebra', False, 'adding a rival loosened the bound on {}'.format(y))
        checked += 1
    return CheckResult('rival_algebra', True, '{} monotonicity instances'.format(checked))


def check_soundness(model, rng, scale, targets=None) -> CheckResult:
    params_hash = 'oracle'
    cfg = DecompConfig()
    if targets is None:
        targets = SOUNDNESS_TARGETS[:max(len(TINY_TARGETS), _trials(len(SOUNDNESS_TARGETS), scale * 4))]
    for dotbracket in targets:
        y = load(dotbracket)
        truth = max_structure_probability(model, y)
        try:
            rivals = sample_rivals(model, y, 50, int(rng.integers(1 << 30)))
            approx = approx_pbound(model, y, rivals, params_hash=params_hash).pbound
        except NoRivalsFound:
            approx = 1.0
        bounder = HybridBounder(ExactBounder(model, params_hash), ApproxBounder(model, params_hash))
        decomposed = structure_pbound(y, cfg, None, bounder, params_hash)[0].pbound
        if truth > approx + 1e-12 or truth > decomposed + 1e-12:
            return CheckResult('soundness', False, '{}: true {} vs approx {} / dp {}'.format(
                dotbracket, truth, approx, decomposed))
    return CheckResult('soundness', True, '{} targets bounded'.format(len(targets)))


def check_umfe(model, rng, scale) -> CheckResult:
    flagged = 0
    for dotbracket in TINY_TARGETS:
        y = load(dotbracket)
        try:
            rivals = sample_rivals(model, y, 50, int(rng.integers(1 << 30)))
        except NoRivalsFound:
            continue
        if not approx_pbound(model, y, rivals).umfe_undesignable:
            continue
        flagged += 1
        for x in compatible_sequences(y):
            folded = mfe_fold(model, x)
            if folded.unique and folded.structure.pairs == y.pairs:
                return CheckResult('umfe', False, '{} is the unique MFE of {}'.format(dotbracket, x))
    return CheckResult('umfe', True, '{} flagged targets confirmed'.format(flagged))


def check_exact(model, rng, scale) -> CheckResult:
    checked = 0
    for dotbracket in ('((...))', '.(...).', '((....))'):
        tree = build_loop_tree(load(dotbracket))
        for node in range(len(tree)):
            for m in motif_gen(tree, node, DecompConfig()):
                if m.length > 10 or checked >= _trials(12, scale * 4):
                    continue
                got = exact_motif_pbound(model, m, max_sequences=None).pbound
                want = exact_motif_brute_force(model, m)
                if abs(got - want) > 1e-9:
                    return CheckResult('exact', False, '{}: {} vs {}'.format(m.key, got, want))
                checked += 1
    return CheckResult('exact', True, '{} motifs'.format(checked))


def check_decomposition(model, rng, scale) -> CheckResult:
    cfg = DecompConfig(max_depth=3, max_width=2, max_loops=4)
    checked = 0
    for y in structure_corpus(_trials(40, scale), int(rng.integers(1 << 30)), 10, 40, max_pairs=10):
        tree = build_loop_tree(y)
        result = decompose(tree, tree.root, cfg, None, synthetic_bound, SYNTHETIC_HASH)
        if result.best != brute_force_best(tree, cfg, synthetic_bound):
            return CheckResult('decomposition', False, 'DP optimum differs on {}'.format(y))
        beta = max(len(motif_gen(tree, node, cfg)) for node in range(len(tree)))
        if result.bound_calls > len(tree) * beta:
            return CheckResult('decomposition', False, 'too many bound calls on {}'.format(y))
        if count_decompositions(tree, tree.root, cfg) != sum(1 for _ in brute_force_decompositions(tree, cfg)):
            return CheckResult('decomposition', False, 'count differs on {}'.format(y))
        if count_decompositions(tree, tree.root, DecompConfig.unconstrained()) != 2 ** len(y.pairs):
            return CheckResult('decomposition', False, 'unconstrained count is not 2^pairs on {}'.format(y))
        checked += 1
    return CheckResult('decomposition', True, '{} trees'.format(checked))


def check_candidate_grid(model, rng, scale) -> CheckResult:
    tree = build_loop_tree(load(CHICKEN_FEET))
    n = len(motif_gen(tree, tree.root, DecompConfig(max_depth=3, max_width=2, max_loops=5)))
    return CheckResult('candidate_grid', n == 9, '{} candidates at the root'.format(n))


CHECKS = (check_folding_parity, check_normalization, check_chain_rule, check_locality, check_rival_algebra,
          check_exact, check_decomposition, check_candidate_grid, check_soundness, check_umfe)


def run_oracle(model: EnergyModel, scale: float = 0.1, seed: int = 2025,
               only: Optional[List[str]] = None) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for check in CHECKS:
        name = check.__name__[len('check_'):]
        if only and name not in only:
            continue
        try:
            result = check(model, rng, scale)
        except (InfeasibleConstraints, NoRivalsFound) as e:
            result = CheckResult(name, False, 'raised {}: {}'.format(type(e).__name__, e))
        logger.info('%s %s: %s', 'PASS' if result.passed else 'FAIL', result.name, result.detail)
        results.append(result)
    return results
