"""
Ensemble approximation: a sigmoid bound from the largest aggregated free
energy gap between the target and a set of rivals, maximized over every
assignment of the differential positions.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import expit

from rnapbound.common.errors import EmptyRivalSet, NoRivalsFound
from rnapbound.common.record import Method, PBoundRecord
from rnapbound.energy.model import PAIR_NUCS, EnergyModel
from rnapbound.bounders.AbstractBounder import AbstractBounder
from rnapbound.bounders.rivals import DesignTarget, RivalSet, aggregate_ddg, as_target, sample_rivals
from rnapbound.structure.core import NUCLEOTIDES, Motif, Pair

logger = logging.getLogger(__name__)

DEFAULT_MAX_ASSIGNMENTS = 10 ** 7
DEFAULT_CHUNK = 1 << 16


class AssignmentDomain(NamedTuple):
    """Target pairs touching the differential positions, then its unpaired ones."""
    pairs: Tuple[Pair, ...]
    unpaired: Tuple[int, ...]

    @property
    def size(self) -> int:
        return 6 ** len(self.pairs) * 4 ** len(self.unpaired)

    def decode(self, index: np.ndarray) -> Dict[int, np.ndarray]:
        """
        Nucleotide codes of the assignments numbered ``index`` in odometer
        order (first pair is the most significant digit).
        """
        codes = {}
        rest = np.array(index, dtype=np.int64)
        for pos in reversed(self.unpaired):
            codes[pos] = rest % 4
            rest = rest // 4
        for i, j in reversed(self.pairs):
            pt = rest % 6
            rest = rest // 6
            codes[i] = PAIR_NUCS[pt, 0]
            codes[j] = PAIR_NUCS[pt, 1]
        return codes


def assignment_domain(target: DesignTarget, delta) -> AssignmentDomain:
    partner = target.structure.partner
    pairs = sorted({(min(p, partner[p]), max(p, partner[p])) for p in delta if partner[p]})
    unpaired = sorted(p for p in delta if not partner[p])
    return AssignmentDomain(tuple(pairs), tuple(unpaired))


class _ChunkResult(NamedTuple):
    best: float
    best_index: int
    best_min: float


def _scan(model: EnergyModel, rivals: RivalSet, domain: AssignmentDomain, start: int, stop: int) -> _ChunkResult:
    index = np.arange(start, stop, dtype=np.int64)
    codes = domain.decode(index)
    rival_ddg = rivals.ddg_batch(model, codes, len(index))
    agg = aggregate_ddg(rival_ddg, model.rt, axis=0)
    k = int(np.argmax(agg))
    return _ChunkResult(float(agg[k]), start + k, float(np.max(np.min(rival_ddg, axis=0))))


def approx_pbound(model: EnergyModel, target, rivals: RivalSet, cap: int = DEFAULT_MAX_ASSIGNMENTS,
                  params_hash: str = '', jobs: int = 1, chunk: int = DEFAULT_CHUNK,
                  explain: bool = False) -> PBoundRecord:
    """
    Bound on p(target | x) over all sequences from the rivals in ``rivals``.
    :param cap: (int) largest number of assignments enumerated; larger
        domains give a skipped record with pbound 1
    :param jobs: (int) worker threads for the chunked enumeration
    :param explain: (bool) keep the maximizing assignment, keyed by offset
        into the target's span so records stay valid for any motif with the same key
    :return: PBoundRecord (method approx or skipped)
    """
    target = as_target(target)
    if not len(rivals):
        raise EmptyRivalSet("no rivals for {}".format(target.key))
    domain = assignment_domain(target, rivals.delta)
    size = domain.size
    if size > cap:
        logger.debug("skipping %s: %d assignments > %d", target.key, size, cap)
        return PBoundRecord.skipped(target.key, params_hash, len(rivals))

    bounds = [(start, min(start + chunk, size)) for start in range(0, size, chunk)]
    if jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            parts = list(executor.map(lambda b: _scan(model, rivals, domain, *b), bounds))
    else:
        parts = [_scan(model, rivals, domain, *b) for b in bounds]

    best = parts[0]
    for part in parts[1:]:
        if part.best > best.best:
            best = part
    ddg_max = best.best
    umfe_max = max(part.best_min for part in parts)
    pbound = float(expit(ddg_max / (10.0 * model.rt)))

    extra = {}
    if explain:
        codes = domain.decode(np.array([best.best_index]))
        at_best = rivals.ddg_batch(model, codes, 1)[:, 0]
        offset = {pos: k for k, pos in enumerate(target.span)}
        extra = dict(assignment={offset[pos]: NUCLEOTIDES[int(code[0])] for pos, code in sorted(codes.items())},
                     rival_ddg=tuple(float(v) for v in at_best),
                     rivals=rivals.keys())
    return PBoundRecord(key=target.key, pbound=pbound, method=Method.APPROX, params_hash=params_hash,
                        ddg_max=ddg_max, rival_count=len(rivals), umfe_undesignable=bool(umfe_max <= 0),
                        count_explored=size, **extra)


def single_rival_pbound(model: EnergyModel, target, rival, cap: int = DEFAULT_MAX_ASSIGNMENTS,
                        params_hash: str = '') -> PBoundRecord:
    """Bound from one rival structure; the singleton case of approx_pbound."""
    return approx_pbound(model, target, RivalSet.build(target, [rival]), cap, params_hash)


class ApproxBounder(AbstractBounder):
    def __init__(self, model: EnergyModel, params_hash: str, samples: int = 100, seed: int = 2025,
                 retries: int = 1, max_assignments: int = DEFAULT_MAX_ASSIGNMENTS, jobs: int = 1,
                 explain: bool = False):
        """
        Bounds motifs by sampling rivals and running the ensemble approximation.
        :param samples: (int) sequences folded per sampling round
        :param seed: (int) seed of the first round; retry k uses seed + k
        :param retries: (int) extra rounds when no rival is found
        :param max_assignments: (int) enumeration cap
        """
        super(ApproxBounder, self).__init__(model, params_hash)
        self.samples = samples
        self.seed = seed
        self.retries = retries
        self.max_assignments = max_assignments
        self.jobs = jobs
        self.explain = explain

    def rivals(self, target) -> Optional[RivalSet]:
        for attempt in range(self.retries + 1):
            try:
                return sample_rivals(self.model, target, self.samples, self.seed + attempt)
            except NoRivalsFound as e:
                logger.debug("%s (attempt %d)", e, attempt + 1)
        return None

    def bound(self, m: Motif) -> PBoundRecord:
        target = DesignTarget.from_motif(m)
        rivals = self.rivals(target)
        if rivals is None:
            return PBoundRecord.skipped(m.key, self.params_hash)
        return approx_pbound(self.model, target, rivals, self.max_assignments, self.params_hash,
                             jobs=self.jobs, explain=self.explain)
