from rnapbound.decomp.dp import DecompResult, backtrack, count_decompositions, decompose, structure_pbound
from rnapbound.decomp.motif_gen import DecompConfig, motif_gen
