import math

import numpy as np
import pytest
from scipy.special import expit

from rnapbound.bounders import (ApproxBounder, BoundMode, DesignTarget, ExactBounder, HybridBounder, RivalSet,
                                approx_pbound, ddg, ddg_multi, differential_positions, sample_rivals,
                                single_rival_pbound)
from rnapbound.bounders.approx import assignment_domain
from rnapbound.bounders.rivals import aggregate_ddg
from rnapbound.common.errors import ConfigError, EmptyRivalSet, IncompleteAssignment, InputError, NoRivalsFound
from rnapbound.common.record import Method
from rnapbound.common.test_structures import (BULGED_HELIX, BULGED_HELIX_RIVALS, RIVAL_DELTA, RIVAL_RIVAL,
                                              RIVAL_SEQUENCE, RIVAL_TARGET, STEM_HAIRPIN, compatible_sequence,
                                              load)
from rnapbound.energy import structure_energy
from rnapbound.folding import exact_motif_pbound
from rnapbound.oracle import max_structure_probability
from rnapbound.structure import PartialSequence, build_loop_tree, motif_from_nodes


@pytest.fixture(scope='module')
def rival_pair():
    return load(RIVAL_TARGET), load(RIVAL_RIVAL)


def test_differential_positions(rival_pair):
    target, rival = rival_pair
    assert differential_positions(rival, target) == RIVAL_DELTA
    assert differential_positions(target, target) == frozenset()


def test_ddg_is_the_energy_difference(model, rival_pair):
    target, rival = rival_pair
    x = PartialSequence.from_string(RIVAL_SEQUENCE)
    expected = structure_energy(model, rival, x) - structure_energy(model, target, x)
    assert ddg(model, x, rival, target) == expected
    assert ddg(model, x, target, target) == 0


def test_ddg_only_reads_differential_positions(model, rival_pair):
    target, rival = rival_pair
    x = PartialSequence.from_string(RIVAL_SEQUENCE)
    base = ddg(model, x, rival, target)
    outside = [p for p in range(1, target.length + 1) if p not in RIVAL_DELTA and not target.partner[p]]
    for pos in outside[:10]:
        for nt in 'ACGU':
            assert ddg(model, x.updated({pos: nt}), rival, target) == base


def test_aggregate_algebra(model):
    kt = 10.0 * model.rt
    assert expit(float(aggregate_ddg(np.array([0.0]), model.rt)) / kt) == pytest.approx(0.5)
    for k in (2, 5, 9):
        agg = float(aggregate_ddg(np.zeros(k), model.rt))
        assert expit(agg / kt) == pytest.approx(1.0 / (1 + k))
    assert expit(kt * math.log(9) / kt) == pytest.approx(0.9)
    assert float(aggregate_ddg(np.array([np.inf, np.inf]), model.rt)) == np.inf


def test_rival_set_validation(rival_pair):
    target, rival = rival_pair
    with pytest.raises(EmptyRivalSet):
        RivalSet.build(target, [])
    with pytest.raises(InputError):
        RivalSet.build(target, [rival, rival])
    with pytest.raises(InputError):
        RivalSet.build(target, [target])
    rivals = RivalSet.build(target, [rival])
    assert rivals.delta == RIVAL_DELTA
    assert len(rivals.with_rival(load('.' * target.length))) == 2


def test_multi_rival_gap(model, rng):
    target = load(BULGED_HELIX)
    rivals = RivalSet.build(target, [load(r) for r in BULGED_HELIX_RIVALS])
    assert len(rivals) == 9
    for _ in range(5):
        x = compatible_sequence(target, rng)
        values = np.array([ddg(model, x, y, target) for y in rivals.rivals])
        assert ddg_multi(model, x, rivals) == pytest.approx(float(aggregate_ddg(values, model.rt)))
    with pytest.raises(IncompleteAssignment):
        ddg_multi(model, PartialSequence.from_mapping({1: 'A'}), rivals)


def test_assignment_domain(rival_pair):
    target, rival = rival_pair
    domain = assignment_domain(DesignTarget.from_structure(target), RIVAL_DELTA)
    assert domain.pairs == ((7, 39), (17, 29))
    assert domain.unpaired == (6, 8, 16, 30, 38, 40)
    assert domain.size == 36 * 4 ** 6
    codes = domain.decode(np.array([0, domain.size - 1]))
    assert list(codes[7]) == [1, 3] and list(codes[39]) == [2, 2]
    assert list(codes[40]) == [0, 3]


def test_dominating_rival(model, rival_pair):
    target, rival = rival_pair
    record = single_rival_pbound(model, target, rival, params_hash='h')
    assert record.method == Method.APPROX
    assert record.rival_count == 1
    assert record.count_explored == 36 * 4 ** 6
    assert record.ddg_max < 0
    assert record.pbound < 0.5
    assert record.pbound == pytest.approx(expit(record.ddg_max / (10.0 * model.rt)))
    assert record.umfe_undesignable


def test_threads_give_the_same_bound(model, rival_pair):
    target, rival = rival_pair
    rivals = RivalSet.build(target, [rival])
    one = approx_pbound(model, target, rivals, chunk=1 << 14)
    many = approx_pbound(model, target, rivals, chunk=1 << 14, jobs=3)
    assert one == many


def test_explain_fields(model):
    target = load(STEM_HAIRPIN)
    rival = load('.(...).')
    record = approx_pbound(model, target, RivalSet.build(target, [rival]), explain=True)
    assert set(record.assignment) == {0, 1, 5, 6}
    assert record.rival_ddg[0] == pytest.approx(record.ddg_max)
    assert record.rivals == ('.(...).',)


def test_assignment_is_relative_to_the_motif_span(model):
    tree = build_loop_tree(load('((...))...((...))'))
    records = []
    for nodes, rival in (([1, 2], '(.....)..........'), ([3, 4], '..........(.....)')):
        target = DesignTarget.from_motif(motif_from_nodes(tree, nodes))
        records.append(approx_pbound(model, target, RivalSet.build(target, [load(rival)]), explain=True))
    assert records[0].key == records[1].key
    assert set(records[0].assignment) == {0, 1, 2, 4, 5, 6}
    assert records[0].assignment == records[1].assignment


def test_more_rivals_never_loosen_and_stay_sound(model):
    target = load(STEM_HAIRPIN)
    truth = max_structure_probability(model, target)
    one = approx_pbound(model, target, RivalSet.build(target, [load('.(...).')]))
    two = approx_pbound(model, target, RivalSet.build(target, [load('.(...).'), load('.......')]))
    assert two.pbound <= one.pbound + 1e-12
    assert truth <= two.pbound + 1e-12


def test_cap_skips(model, rival_pair):
    target, rival = rival_pair
    record = approx_pbound(model, target, RivalSet.build(target, [rival]), cap=1000, params_hash='h')
    assert record.method == Method.SKIPPED
    assert record.pbound == 1.0


def test_sampling_is_deterministic(model):
    target = load(STEM_HAIRPIN)
    first = sample_rivals(model, target, 30, seed=11)
    second = sample_rivals(model, target, 30, seed=11)
    assert first.rivals == second.rivals
    assert [p.sample for p in first.provenance] == [p.sample for p in second.provenance]
    assert all(y.pairs != target.pairs for y in first.rivals)


def test_motif_without_alternatives(model):
    tree = build_loop_tree(load(STEM_HAIRPIN))
    hairpin = motif_from_nodes(tree, [2])
    with pytest.raises(NoRivalsFound):
        sample_rivals(model, DesignTarget.from_motif(hairpin), 10, seed=1)
    record = ApproxBounder(model, 'h', samples=10, retries=1)(hairpin)
    assert record.method == Method.SKIPPED


def test_motif_rivals_stay_in_the_motif_ensemble(model):
    tree = build_loop_tree(load('((((...))))'))
    m = motif_from_nodes(tree, [1, 2])
    target = DesignTarget.from_motif(m)
    rivals = RivalSet.build(target, [load('(.((...)).)')])
    assert rivals.delta == {1, 2, 3, 9, 10, 11}
    assert rivals.keys() == ('I1:(.(*).)',)
    record = approx_pbound(model, target, rivals)
    assert record.count_explored == 6 ** 3
    assert exact_motif_pbound(model, m).pbound <= record.pbound + 1e-12


def test_hybrid_chain(model):
    tree = build_loop_tree(load(STEM_HAIRPIN))
    hairpin = motif_from_nodes(tree, [2])
    whole = motif_from_nodes(tree, [0, 1, 2])
    exact = ExactBounder(model, 'h', max_sequences=1000)
    approx = ApproxBounder(model, 'h', samples=20)

    hybrid = HybridBounder(exact, approx)
    assert hybrid(hairpin).method == Method.EXACT
    assert hybrid(whole).method in (Method.APPROX, Method.SKIPPED)
    assert hybrid.calls == 2
    assert sum(hybrid.method_counts.values()) == 2

    exact_only = HybridBounder(exact, approx, BoundMode.EXACT_ONLY)
    assert exact_only(whole).method == Method.SKIPPED
    approx_only = HybridBounder(exact, approx, 'approx_only')
    assert approx_only(hairpin).method == Method.SKIPPED

    with pytest.raises(ConfigError):
        BoundMode.parse('fastest')
