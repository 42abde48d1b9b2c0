"""
The bound_fn used by the decomposition: exact enumeration for small motifs,
the ensemble approximation otherwise, and a skipped record (pbound 1) when
neither applies. The ablation modes drop one side of the chain.
"""
import enum
import logging
from typing import Optional

from rnapbound.bounders.AbstractBounder import AbstractBounder
from rnapbound.bounders.approx import ApproxBounder
from rnapbound.bounders.exact import ExactBounder
from rnapbound.common.errors import ConfigError, MotifTooLarge
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.structure.core import Motif

logger = logging.getLogger(__name__)


class BoundMode(str, enum.Enum):
    HYBRID = 'hybrid'
    APPROX_ONLY = 'approx_only'
    EXACT_ONLY = 'exact_only'
    NO_DECOMPOSITION = 'no_decomposition'  # hybrid bounds, best single motif instead of a product

    @classmethod
    def parse(cls, value) -> 'BoundMode':
        try:
            return cls(value)
        except ValueError:
            raise ConfigError("unknown mode {!r}, expected one of {}".format(
                value, ', '.join(mode.value for mode in cls)))


class HybridBounder(AbstractBounder):
    def __init__(self, exact: Optional[ExactBounder], approx: Optional[ApproxBounder],
                 mode: BoundMode = BoundMode.HYBRID):
        source = exact if exact is not None else approx
        if source is None:
            raise ConfigError("a bounder needs an exact or an approximate strategy")
        super(HybridBounder, self).__init__(source.model, source.params_hash)
        self.mode = BoundMode.parse(mode)
        self.exact = exact if self.mode != BoundMode.APPROX_ONLY else None
        self.approx = approx if self.mode != BoundMode.EXACT_ONLY else None
        self.method_counts = {method: 0 for method in Method}

    def bound(self, m: Motif) -> PBoundRecord:
        record = None
        if self.exact is not None:
            try:
                record = self.exact.bound(m)
            except MotifTooLarge as e:
                logger.debug("%s, falling back", e)
        if record is None and self.approx is not None:
            record = self.approx.bound(m)
        if record is None:
            record = PBoundRecord.skipped(m.key, self.params_hash)
        with self._lock:
            self.method_counts[record.method] += 1
        return record

    def describe(self) -> str:
        return '{}({})'.format(type(self).__name__, self.mode.value)
