import math

import pytest

from rnapbound.common.errors import (InfeasibleConstraints, InvalidConstraints, MotifTooLarge, NotInEnsemble,
                                     RegionTooLarge)
from rnapbound.common.record import Method
from rnapbound.common.test_structures import STEM_HAIRPIN, compatible_sequence, load, random_sequence
from rnapbound.folding import (FoldConstraints, enumerate_ensemble, exact_motif_pbound, log_partition, mfe_fold,
                               partition_function, prob_motif, prob_structure)
from rnapbound.folding.exact import design_space_size, motif_sequences
from rnapbound.oracle import exact_motif_brute_force
from rnapbound.structure import PartialSequence, build_loop_tree, motif_from_nodes, parse_dotbracket


def _boltzmann_sum(model, members):
    return sum(math.exp(-e / (10.0 * model.rt)) for _, e in members)


def test_mfe_and_partition_match_enumeration(model, rng):
    for _ in range(25):
        x = random_sequence(int(rng.integers(6, 15)), rng)
        members = enumerate_ensemble(model, x)
        best = min(e for _, e in members)
        argmin = [y for y, e in members if e == best]
        expected = min(argmin, key=lambda y: (len(y.pairs), y.dotbracket))

        result = mfe_fold(model, x)
        assert result.energy == best
        assert result.structure == expected
        assert result.unique == (len(argmin) == 1)
        assert partition_function(model, x).q == pytest.approx(_boltzmann_sum(model, members), rel=1e-9)


def test_hairpin_stem_is_mfe(model):
    result = mfe_fold(model, PartialSequence.from_string('GGGAAACCC'))
    assert result.structure.dotbracket == '(((...)))'
    assert result.energy == -23
    assert result.unique


def test_log_space_agrees(model, rng):
    x = random_sequence(14, rng)
    assert log_partition(model, x, log_space=True) == pytest.approx(log_partition(model, x), rel=1e-9, abs=1e-12)
    summary = partition_function(model, x, log_space=True)
    assert summary.log_q == pytest.approx(math.log(summary.q), rel=1e-9, abs=1e-12)


def test_constrained_ensemble_matches_enumeration(model):
    x = PartialSequence.from_string('GGGAAACCCAGGAAACCU')
    c = FoldConstraints(forced_pairs={(1, 9)}, length=18)
    members = enumerate_ensemble(model, x, c)
    assert members and all((1, 9) in y.pairs for y, _ in members)
    result = mfe_fold(model, x, c)
    assert (1, 9) in result.structure.pairs
    assert result.energy == min(e for _, e in members)
    assert partition_function(model, x, c).q == pytest.approx(_boltzmann_sum(model, members), rel=1e-9)


def test_probabilities_are_normalized(model, rng):
    x = random_sequence(12, rng)
    total = sum(prob_structure(model, x, y) for y, _ in enumerate_ensemble(model, x))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_constraints_validation():
    with pytest.raises(InvalidConstraints):
        FoldConstraints(forced_pairs={(1, 10), (5, 15)})
    with pytest.raises(InvalidConstraints):
        FoldConstraints(forced_pairs={(1, 10)}, sealed_pairs={(2, 9)})
    with pytest.raises(InvalidConstraints):
        FoldConstraints(forced_pairs={(2, 9)}, region=(1, 10))


def test_infeasible_forced_pair(model):
    x = PartialSequence.from_string('AAAAAAA')
    with pytest.raises(InfeasibleConstraints):
        mfe_fold(model, x, FoldConstraints(forced_pairs={(1, 7)}))


def test_enumeration_cap(model, rng):
    with pytest.raises(RegionTooLarge):
        enumerate_ensemble(model, random_sequence(30, rng), cap=20)


def test_hairpin_motif_is_certain(model):
    tree = build_loop_tree(load(STEM_HAIRPIN))
    m = motif_from_nodes(tree, [2])
    for x in motif_sequences(m):
        assert prob_motif(model, x, m) == pytest.approx(1.0)


def test_prob_motif_matches_enumeration(model):
    y = parse_dotbracket('((((...))))')
    tree = build_loop_tree(y)
    m = motif_from_nodes(tree, [1, 2])
    x = PartialSequence.from_string('GGCAAAAAGCC')
    c = FoldConstraints.for_motif(m)
    members = enumerate_ensemble(model, x, c)
    target = next(e for member, e in members if member.pairs == m.pairs)
    expected = math.exp(-target / (10.0 * model.rt)) / _boltzmann_sum(model, members)
    assert prob_motif(model, x, m) == pytest.approx(expected, rel=1e-9)


def test_exact_bound_matches_brute_force(model):
    tree = build_loop_tree(load(STEM_HAIRPIN))
    for ids in ([0], [0, 1], [1], [1, 2]):
        m = motif_from_nodes(tree, ids)
        record = exact_motif_pbound(model, m, params_hash='h')
        assert record.method == Method.EXACT
        assert record.count_explored == design_space_size(m)
        assert record.pbound == pytest.approx(exact_motif_brute_force(model, m), rel=1e-9)
        assert len(record.sequence) == m.length


def test_exact_bound_refuses_large_motifs(model):
    tree = build_loop_tree(parse_dotbracket('(.............)'))
    with pytest.raises(MotifTooLarge):
        exact_motif_pbound(model, motif_from_nodes(tree, [1]))
    tree = build_loop_tree(load(STEM_HAIRPIN))
    with pytest.raises(MotifTooLarge):
        exact_motif_pbound(model, motif_from_nodes(tree, [0, 1, 2]), max_sequences=100)


def test_loops_wider_than_the_ensemble(model, rng):
    narrow = model.with_settings(max_interior=5)
    y = parse_dotbracket('(.......(...))')
    x = compatible_sequence(y, rng)
    assert 0 < prob_structure(model, x, y) <= 1
    with pytest.raises(NotInEnsemble):
        prob_structure(narrow, x, y)
    bulge = motif_from_nodes(build_loop_tree(y), [1, 2])
    with pytest.raises(NotInEnsemble):
        prob_motif(narrow, x, bulge)
