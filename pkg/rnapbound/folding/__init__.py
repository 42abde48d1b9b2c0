from rnapbound.folding.constraints import NO_CONSTRAINTS, FoldConstraints
from rnapbound.folding.dp import FoldingDP, MfeResult
from rnapbound.folding.ensemble import (EnsembleSummary, ensemble_energy, log_partition, mfe_fold,
                                        partition_function, prob_motif, prob_structure)
from rnapbound.folding.enumerate import enumerate_ensemble, enumerate_structures
from rnapbound.folding.exact import design_space_size, exact_motif_pbound, motif_sequences
