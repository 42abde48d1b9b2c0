import threading
from abc import ABC, abstractmethod

from rnapbound.common.record import PBoundRecord
from rnapbound.energy.model import EnergyModel
from rnapbound.structure.core import Motif


class AbstractBounder(ABC):
    def __init__(self, model: EnergyModel, params_hash: str):
        self.model = model
        self.params_hash = params_hash
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, m: Motif) -> PBoundRecord:
        """
        Bounds one motif and counts the call.
        :param m: (Motif) candidate motif
        :return: PBoundRecord keyed by the motif's canonical key
        """
        with self._lock:
            self.calls += 1
        return self.bound(m)

    @abstractmethod
    def bound(self, m: Motif) -> PBoundRecord:
        """
        Upper bound on the largest probability any sequence gives ``m`` in its
        motif ensemble.
        """
        raise NotImplementedError()

    def describe(self) -> str:
        return type(self).__name__
