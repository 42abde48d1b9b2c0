import math

import numpy as np
import pytest

from rnapbound.common.errors import ConfigError, IncompleteAssignment, MissingSection, NonCanonicalPair, ParseError
from rnapbound.common.test_structures import MULTILOOP_51, compatible_sequence, load, structure_corpus
from rnapbound.decomp import DecompConfig, decompose
from rnapbound.energy import load_params, loop_energy, loop_energy_batch, motif_energy, structure_energy
from rnapbound.energy.model import MAX_TABLE_LEN
from rnapbound.oracle import SYNTHETIC_HASH, synthetic_bound
from rnapbound.structure import PartialSequence, build_loop_tree, decompose_loops, parse_dotbracket


def test_hairpin_stem_energy(model):
    x = PartialSequence.from_string('GGGAAACCC')
    y = parse_dotbracket('(((...)))')
    # two GC/GC stacks plus a size-3 hairpin closed by GC over an A-A mismatch
    assert structure_energy(model, y, x) == -33 - 33 + 54 - 11


def test_terminal_au_penalty(model):
    x = PartialSequence.from_string('AGGAAACCU')
    y = parse_dotbracket('(((...)))')
    assert structure_energy(model, y, x) == -21 - 33 + 54 - 11 + 5


def test_open_chain_is_zero(model):
    x = PartialSequence.from_string('ACGUACGU')
    assert structure_energy(model, parse_dotbracket('........'), x) == 0


def test_length_term_extrapolates(model):
    extra = int(math.floor(10.0 * 1.75 * model.rt * math.log(31 / MAX_TABLE_LEN) + 0.5))
    assert model.length_term(model.hairpin_len, 31) == int(model.hairpin_len[MAX_TABLE_LEN]) + extra
    assert model.length_term(model.hairpin_len, 5) == int(model.hairpin_len[5])


def test_ninio_is_capped(model):
    assert model.ninio_term(1, 3) == 12
    assert model.ninio_term(0, 20) == 30


def test_loop_energy_rejects_bad_assignments(model):
    y = parse_dotbracket('((...))')
    hairpin = decompose_loops(y)[-1]
    with pytest.raises(NonCanonicalPair):
        loop_energy(model, hairpin, PartialSequence.from_string('GAAAAAC'))
    with pytest.raises(IncompleteAssignment):
        loop_energy(model, hairpin, PartialSequence.from_mapping({2: 'G', 6: 'C'}))


def test_batch_matches_scalar(model, rng):
    y = load(MULTILOOP_51)
    sequences = [compatible_sequence(y, rng) for _ in range(8)]
    sequences.append(PartialSequence.from_string('A' * y.length))
    size = len(sequences)
    codes = {pos: np.array([x.code(pos) for x in sequences]) for pos in range(1, y.length + 1)}
    for z in decompose_loops(y):
        batch = loop_energy_batch(model, z, codes, size)
        for k, x in enumerate(sequences):
            try:
                expected = loop_energy(model, z, x)
            except NonCanonicalPair:
                assert batch[k] == np.inf
            else:
                assert batch[k] == expected


def test_digest_tracks_settings(model):
    assert model.digest == load_params().digest
    assert model.with_settings(rt=1.0).digest != model.digest
    assert model.with_settings(max_interior=10).digest != model.digest


def test_rt_must_be_positive(model):
    with pytest.raises(ConfigError):
        model.with_settings(rt=0.0)


def test_missing_section(tmp_path):
    path = tmp_path / 'stack_only.par'
    path.write_text('[STACK]\n' + ' '.join(['-10'] * 36) + '\n')
    with pytest.raises(MissingSection) as info:
        load_params(str(path))
    assert info.value.section == 'HAIRPIN_LENGTH'


def test_bad_token_reports_line(tmp_path):
    path = tmp_path / 'broken.par'
    path.write_text('# header\n[STACK]\n-10 -10 x\n')
    with pytest.raises(ParseError) as info:
        load_params(str(path))
    assert info.value.line == 3


def test_wrong_table_size(tmp_path):
    path = tmp_path / 'short.par'
    path.write_text('[STACK]\n-10\n[HAIRPIN_LENGTH]\n' + ' '.join(['50'] * 31) + '\n')
    with pytest.raises(ParseError):
        load_params(str(path))


def test_structure_energy_splits_over_a_decomposition(model, rng):
    cfg = DecompConfig(max_depth=2, max_width=2, max_loops=3, eval_leaf_hairpins=True)
    for y in structure_corpus(10, seed=23, min_len=12, max_len=40):
        tree = build_loop_tree(y)
        motifs = [m for m, _ in decompose(tree, tree.root, cfg, None, synthetic_bound, SYNTHETIC_HASH).motifs]
        assert sorted(node for m in motifs for node in m.node_ids) == list(range(len(tree)))
        x = compatible_sequence(y, rng)
        assert sum(motif_energy(model, m, x) for m in motifs) == structure_energy(model, y, x)
