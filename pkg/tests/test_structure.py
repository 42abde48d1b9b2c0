from collections import Counter

import pytest

from rnapbound.common.errors import (HairpinTooSmall, IllegalCharacter, InputError, InteriorTooLarge, LonelyPair,
                                     MissingPosition, NotContiguous, ParseError, UnbalancedBrackets)
from rnapbound.common.test_structures import CHICKEN_FEET, MULTILOOP_51, load, structure_corpus
from rnapbound.structure import (LoopKind, PartialSequence, build_loop_tree, critical_positions, decompose_loops,
                                 expand_motif_key, motif_for_domain, motif_from_nodes, parse_dotbracket, project,
                                 read_structures, render_dotbracket)


def test_parse_and_render_round_trip():
    y = parse_dotbracket(MULTILOOP_51)
    assert y.length == 51
    assert len(y.pairs) == 11
    assert (5, 48) in y.pairs and (33, 38) in y.pairs
    assert render_dotbracket(y.length, y.pairs) == MULTILOOP_51


@pytest.mark.parametrize('text, error', [
    ('((..x..))', IllegalCharacter),
    ('((.....)', UnbalancedBrackets),
    ('(.....))', UnbalancedBrackets),
    ('((..))', HairpinTooSmall),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_dotbracket(text)


def test_errors_are_input_errors_with_positions():
    with pytest.raises(InputError) as info:
        parse_dotbracket('((..x..))')
    assert info.value.position == 5
    assert info.value.exit_code == 1


def test_lonely_pairs_only_rejected_on_request():
    y = parse_dotbracket('.(...).')
    assert len(y.pairs) == 1
    with pytest.raises(LonelyPair):
        parse_dotbracket('.(...).', allow_lonely=False)
    parse_dotbracket('((...))', allow_lonely=False)


def test_decompose_multiloop_structure():
    loops = decompose_loops(load(MULTILOOP_51))
    assert loops[0].kind == LoopKind.EXTERNAL
    kinds = [z.kind for z in loops]
    assert kinds.count(LoopKind.STACK) == 6
    assert kinds.count(LoopKind.HAIRPIN) == 2
    assert kinds.count(LoopKind.MULTI) == 1
    assert kinds.count(LoopKind.BULGE) == 1
    assert kinds.count(LoopKind.INTERNAL) == 1
    internal = next(z for z in loops if z.kind == LoopKind.INTERNAL)
    assert internal.closing_pairs == ((29, 43), (32, 39))
    assert internal.sides == (2, 3)


def test_critical_positions_of_multi_and_external_loops():
    loops = {z.closing_pairs[0] if z.kind != LoopKind.EXTERNAL else None: z
             for z in decompose_loops(load(MULTILOOP_51))}
    multi = loops[(5, 48)]
    assert multi.kind == LoopKind.MULTI
    assert multi.critical.positions == {5, 48, 9, 24, 28, 44, 6, 47, 8, 25, 27, 45}
    assert loops[None].critical.positions == {3, 50, 2, 51}


def test_external_critical_positions_are_clipped():
    ext = decompose_loops(load('(...)'))[0]
    assert ext.critical.positions == {1, 5}


def test_loop_tree_of_chicken_feet():
    tree = build_loop_tree(load(CHICKEN_FEET))
    assert len(tree) == 17
    assert len(tree.children[tree.root]) == 2
    assert len(tree.leaves()) == 4
    assert all(tree.is_hairpin(leaf) for leaf in tree.leaves())


def test_motif_pairs_span_and_key():
    tree = build_loop_tree(load('((((...))))'))
    m = motif_from_nodes(tree, [1, 2])
    assert m.top_pair == (1, 11)
    assert m.ipairs == {(2, 10)}
    assert m.bpairs == {(1, 11), (3, 9)}
    assert m.sealed_pairs == {(3, 9)}
    assert m.span_positions == (1, 2, 3, 9, 10, 11)
    assert m.key == 'S2:(((*)))'
    assert m.depth == 2 and m.width == 1


def test_motif_must_be_connected():
    tree = build_loop_tree(load('((((...))))'))
    with pytest.raises(NotContiguous):
        motif_from_nodes(tree, [1, 3])


def test_expand_motif_key_parses():
    tree = build_loop_tree(load(MULTILOOP_51))
    m = motif_from_nodes(tree, [0, 1, 2, 3])
    y = expand_motif_key(m.key)
    assert y.length == m.length + 3 * len(m.sealed_pairs)
    assert m.key.startswith('E1S2M1:')


def test_motif_for_domain_rebuilds_motif():
    y = load('((((...))))')
    tree = build_loop_tree(y)
    m = motif_from_nodes(tree, [1, 2])
    rebuilt = motif_for_domain(y, m.top_pair, m.sealed_pairs)
    assert rebuilt == m


def test_partial_sequence_and_projection():
    x = PartialSequence.from_string('GGGAAACCC')
    assert x[1] == 'G' and x.code(4) == 0
    assert x.compatible_with([(1, 9), (2, 8)])
    assert not x.compatible_with([(4, 5)])
    sub = project(x, [1, 9])
    assert sub.to_string() == 'GC'
    with pytest.raises(MissingPosition):
        project(sub, [2])
    with pytest.raises(IllegalCharacter):
        PartialSequence.from_mapping({1: 'T'})


def test_read_structures(tmp_path):
    path = tmp_path / 'structures.txt'
    path.write_text('# two structures\n>hairpin\n((...))\n\n.(...).\n')
    entries = read_structures(str(path))
    assert [name for name, _ in entries] == ['hairpin', 'structures.txt:5']
    assert entries[0][1].dotbracket == '((...))'


def test_read_structures_reports_line(tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text('((...))\n((..)\n')
    with pytest.raises(ParseError) as info:
        read_structures(str(path))
    assert info.value.line == 2


def test_read_structures_rejects_oversized_interiors(tmp_path):
    path = tmp_path / 'bulge.txt'
    path.write_text('(.......(...))\n')
    assert len(read_structures(str(path))) == 1
    with pytest.raises(ParseError) as info:
        read_structures(str(path), max_interior=5)
    assert info.value.line == 1
    assert isinstance(info.value.__cause__, InteriorTooLarge)


# (inside the outer pair, outside each branch)
MISMATCH_NEIGHBOURS = {
    LoopKind.EXTERNAL: (False, True),
    LoopKind.HAIRPIN: (True, False),
    LoopKind.STACK: (False, False),
    LoopKind.BULGE: (False, False),
    LoopKind.INTERNAL: (True, True),
    LoopKind.MULTI: (True, True),
}


def _reference_critical(z):
    inside, outside = MISMATCH_NEIGHBOURS[z.kind]
    positions = {p for pair in z.closing_pairs for p in pair}
    if inside:
        i, j = z.outer_pair
        positions.update((i + 1, j - 1))
    if outside:
        for k, l in z.branches:
            positions.update(p for p in (k - 1, l + 1) if 1 <= p <= z.length)
    return positions


def test_critical_positions_follow_the_neighbour_table():
    for y in structure_corpus(40, seed=21, min_len=10, max_len=60):
        for z in decompose_loops(y):
            assert critical_positions(z).positions == _reference_critical(z), z


def test_loops_cover_the_structure():
    for y in structure_corpus(40, seed=22, min_len=10, max_len=60):
        loops = decompose_loops(y)
        closing = Counter(pair for z in loops for pair in z.closing_pairs)
        assert set(closing) == set(y.pairs)
        assert set(closing.values()) == {2}
        assert sum(z.unpaired for z in loops) == len(y.unpaired)

        tree = build_loop_tree(y)
        assert len(tree) == len(y.pairs) + 1
        leaves = {node for node in range(len(tree)) if not tree.children[node]}
        assert leaves == {node for node in range(len(tree)) if tree.is_hairpin(node)}
