from rnapbound.bounders.AbstractBounder import AbstractBounder
from rnapbound.common.record import PBoundRecord
from rnapbound.energy.model import EnergyModel
from rnapbound.folding.exact import DEFAULT_LEN_CAP, DEFAULT_MAX_SEQUENCES, exact_motif_pbound
from rnapbound.structure.core import Motif


class ExactBounder(AbstractBounder):
    def __init__(self, model: EnergyModel, params_hash: str, len_cap: int = DEFAULT_LEN_CAP,
                 max_sequences: int = DEFAULT_MAX_SEQUENCES, log_space: bool = False):
        """
        Exhaustive bound; raises MotifTooLarge beyond ``len_cap`` positions or
        ``max_sequences`` compatible sequences.
        """
        super(ExactBounder, self).__init__(model, params_hash)
        self.len_cap = len_cap
        self.max_sequences = max_sequences
        self.log_space = log_space

    def bound(self, m: Motif) -> PBoundRecord:
        return exact_motif_pbound(self.model, m, self.len_cap, self.max_sequences, self.params_hash,
                                  self.log_space)
