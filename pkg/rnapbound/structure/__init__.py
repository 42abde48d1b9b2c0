from rnapbound.structure.core import (CANONICAL_PAIRS, NUCLEOTIDES, CriticalPositions, Loop, LoopKind,
                                      LoopTree, Motif, PartialSequence, Structure, build_loop_tree,
                                      canonical_motif_key, critical_positions, decompose_loops,
                                      expand_motif_key, motif_for_domain, motif_from_nodes, oversized_interior,
                                      parse_dotbracket, project, render_dotbracket)
from rnapbound.structure.io import read_structures
