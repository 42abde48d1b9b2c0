from concurrent.futures import ThreadPoolExecutor

import pytest

from rnapbound.bounders import ExactBounder
from rnapbound.common.bound_cache import BoundCache
from rnapbound.common.errors import ConfigError
from rnapbound.common.record import Method
from rnapbound.common.test_structures import (CHICKEN_FEET, CHICKEN_FOOT, MULTILOOP_51, STEM_HAIRPIN, TINY_HAIRPIN,
                                              load, structure_corpus)
from rnapbound.decomp import DecompConfig, backtrack, count_decompositions, decompose, motif_gen, structure_pbound
from rnapbound.bounders.hybrid import BoundMode
from rnapbound.oracle import SYNTHETIC_HASH, brute_force_best, brute_force_decompositions, synthetic_bound
from rnapbound.structure import build_loop_tree

SMALL = DecompConfig(max_depth=3, max_width=2, max_loops=4)


def test_candidates_at_the_root_of_two_feet():
    tree = build_loop_tree(load(CHICKEN_FEET))
    candidates = motif_gen(tree, tree.root, DecompConfig(max_depth=3, max_width=2, max_loops=5))
    assert len(candidates) == 9
    assert candidates[0].node_ids == {tree.root}
    assert len({m.key for m in candidates}) <= 9


@pytest.mark.parametrize('depth', [1, 2, 3, 4, 5])
def test_chain_candidates(depth):
    tree = build_loop_tree(load('((((...))))'))
    assert len(motif_gen(tree, 1, DecompConfig(max_depth=depth))) == min(depth, 4)


def test_no_decomposition_takes_the_best_single_motif():
    tree = build_loop_tree(load(MULTILOOP_51))
    cfg = DecompConfig(mode=BoundMode.NO_DECOMPOSITION)
    candidates = [m for node in range(len(tree)) if not tree.is_hairpin(node)
                  for m in motif_gen(tree, node, DecompConfig())]
    result = decompose(tree, tree.root, cfg, None, synthetic_bound, SYNTHETIC_HASH)
    assert result.best == min(synthetic_bound(m).pbound for m in candidates)
    assert [m for m, _ in result.motifs] == backtrack(result) == [result.single]
    assert synthetic_bound(result.single).pbound == result.best
    assert result.count_explored == len(candidates) == count_decompositions(tree, tree.root, cfg)

    full = decompose(tree, tree.root, DecompConfig(), None, synthetic_bound, SYNTHETIC_HASH)
    assert full.best <= result.best


def test_config_validation():
    with pytest.raises(ConfigError):
        DecompConfig(max_depth=0)
    with pytest.raises(ConfigError):
        DecompConfig(mode='greedy')
    assert DecompConfig.unconstrained().admits(100, 100, 100)


@pytest.mark.parametrize('dotbracket', [TINY_HAIRPIN, STEM_HAIRPIN, CHICKEN_FOOT, MULTILOOP_51])
def test_unconstrained_count_is_two_to_the_pairs(dotbracket):
    y = load(dotbracket)
    assert count_decompositions(build_loop_tree(y), 0, DecompConfig.unconstrained()) == 2 ** len(y.pairs)


def test_count_matches_brute_force():
    for y in structure_corpus(8, seed=3, min_len=10, max_len=36, max_pairs=9):
        tree = build_loop_tree(y)
        assert count_decompositions(tree, tree.root, SMALL) == sum(1 for _ in brute_force_decompositions(tree, SMALL))


def test_optimum_matches_brute_force():
    for y in structure_corpus(8, seed=4, min_len=10, max_len=36, max_pairs=9) + [load(CHICKEN_FOOT)]:
        tree = build_loop_tree(y)
        result = decompose(tree, tree.root, SMALL, None, synthetic_bound, SYNTHETIC_HASH)
        assert result.best == brute_force_best(tree, SMALL, synthetic_bound)
        assert result.count_explored == count_decompositions(tree, tree.root, SMALL)


def test_each_key_is_bounded_once():
    tree = build_loop_tree(load(CHICKEN_FEET))
    result = decompose(tree, tree.root, SMALL, None, synthetic_bound, SYNTHETIC_HASH)
    assert result.bound_calls == len(result.records)
    beta = max(len(motif_gen(tree, node, SMALL)) for node in range(len(tree)))
    assert result.bound_calls <= len(tree) * beta
    # the two feet are identical, so their motifs share keys
    assert result.bound_calls < sum(len(motif_gen(tree, node, SMALL)) for node in range(len(tree))
                                    if not tree.is_hairpin(node))


def test_backtrack_reproduces_the_optimum():
    tree = build_loop_tree(load(MULTILOOP_51))
    result = decompose(tree, tree.root, SMALL, None, synthetic_bound, SYNTHETIC_HASH)
    motifs = backtrack(result)
    assert [m for m, _ in result.motifs] == motifs
    assert motifs[0].top == tree.root
    product = 1.0
    for _, record in result.motifs:
        product *= record.pbound
    assert product == result.best
    covered = set()
    for m in motifs:
        assert not covered & m.node_ids
        covered |= m.node_ids
    assert all(node in covered or tree.is_hairpin(node) for node in range(len(tree)))


def test_wider_limits_never_loosen():
    tree = build_loop_tree(load(MULTILOOP_51))
    narrow = decompose(tree, tree.root, DecompConfig(max_depth=2, max_width=1, max_loops=2), None,
                       synthetic_bound, SYNTHETIC_HASH)
    wide = decompose(tree, tree.root, DecompConfig(max_depth=4, max_width=2, max_loops=5), None,
                     synthetic_bound, SYNTHETIC_HASH)
    assert wide.best <= narrow.best


def test_cache_short_circuits_bounds():
    tree = build_loop_tree(load(CHICKEN_FOOT))
    cache = BoundCache()
    first = decompose(tree, tree.root, SMALL, cache, synthetic_bound, SYNTHETIC_HASH)
    second = decompose(tree, tree.root, SMALL, cache, synthetic_bound, SYNTHETIC_HASH)
    assert first.bound_calls > 0 and first.cache_hits == 0
    assert second.bound_calls == 0
    assert second.cache_hits == first.bound_calls
    assert second.best == first.best
    third = decompose(tree, tree.root, SMALL, cache, synthetic_bound, 'other-params')
    assert third.bound_calls == first.bound_calls


def test_executor_gives_the_same_result():
    tree = build_loop_tree(load(CHICKEN_FEET))
    sequential = decompose(tree, tree.root, SMALL, None, synthetic_bound, SYNTHETIC_HASH)
    with ThreadPoolExecutor(max_workers=4) as executor:
        parallel = decompose(tree, tree.root, SMALL, None, synthetic_bound, SYNTHETIC_HASH, executor)
    assert parallel.best == sequential.best
    assert [m.key for m, _ in parallel.motifs] == [m.key for m, _ in sequential.motifs]


def test_structure_bound_with_exact_motifs(model):
    bounder = ExactBounder(model, 'h')
    y = load(TINY_HAIRPIN)
    record, result = structure_pbound(y, DecompConfig(max_depth=1), None, bounder, 'h')
    assert record.method == Method.DECOMPOSED
    assert record.pbound == pytest.approx(1.0)
    assert record.count_explored == 1

    record, result = structure_pbound(y, DecompConfig(), None, bounder, 'h', key='tiny')
    assert record.key == 'tiny'
    assert record.pbound < 1.0
    assert record.count_explored == 2
    assert result.best == pytest.approx(min(r.pbound for r in result.records.values()))
