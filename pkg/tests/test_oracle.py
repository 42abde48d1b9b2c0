import numpy as np
import pytest

from rnapbound.oracle import (SOUNDNESS_TARGETS, TINY_TARGETS, check_soundness, max_structure_probability,
                              run_oracle, synthetic_bound)
from rnapbound.common.test_structures import load
from rnapbound.structure import build_loop_tree, motif_from_nodes


def test_cheap_checks_pass(model):
    results = run_oracle(model, scale=0.05, only=['candidate_grid', 'locality', 'chain_rule', 'exact',
                                                  'folding_parity', 'rival_algebra'])
    assert [r.name for r in results] == ['folding_parity', 'chain_rule', 'locality', 'rival_algebra', 'exact',
                                         'candidate_grid']
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_umfe_flags_hold(model):
    (result,) = run_oracle(model, only=['umfe'])
    assert result.name == 'umfe'
    assert result.passed, result.detail


def test_bounds_cover_the_best_sequence(model):
    targets = SOUNDNESS_TARGETS[:7]
    result = check_soundness(model, np.random.default_rng(11), 1.0, targets=targets)
    assert result.passed, result.detail
    assert result.detail == '7 targets bounded'


def test_default_soundness_corpus_grows_with_scale(model):
    assert check_soundness(model, np.random.default_rng(3), 0.1).detail == '5 targets bounded'


def test_synthetic_bound_is_dyadic():
    tree = build_loop_tree(load('((((...))))'))
    record = synthetic_bound(motif_from_nodes(tree, [1, 2]))
    assert (record.pbound * 16).is_integer()
    assert 0 < record.pbound <= 1
    assert synthetic_bound(motif_from_nodes(tree, [1, 2])) == record


@pytest.mark.parametrize('dotbracket', TINY_TARGETS[:2])
def test_tiny_targets_cannot_be_certain(model, dotbracket):
    assert 0 < max_structure_probability(model, load(dotbracket)) < 1
