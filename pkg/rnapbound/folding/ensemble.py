import logging
import math
from typing import List, NamedTuple

from rnapbound.common.errors import InfeasibleConstraints, NotInEnsemble
from rnapbound.energy.model import EnergyModel, loop_energy, motif_energy
from rnapbound.folding.constraints import NO_CONSTRAINTS, FoldConstraints
from rnapbound.folding.dp import FoldingDP, MfeResult
from rnapbound.structure.core import CANONICAL_PAIRS, Loop, Motif, PartialSequence, Structure, oversized_interior

logger = logging.getLogger(__name__)


class EnsembleSummary(NamedTuple):
    q: float
    mfe: int
    mfe_structure: Structure
    log_q: float


def mfe_fold(model: EnergyModel, x: PartialSequence, c: FoldConstraints = NO_CONSTRAINTS,
             check_unique: bool = True) -> MfeResult:
    """
    Minimum free energy structure of ``x`` within the ensemble allowed by ``c``.
    :return: MfeResult(structure, energy, unique); ``unique`` is the uMFE flag
        (None when ``check_unique`` is off)
    """
    return FoldingDP(model, x, c).mfe(check_unique=check_unique)


def partition_function(model: EnergyModel, x: PartialSequence, c: FoldConstraints = NO_CONSTRAINTS,
                       log_space: bool = False) -> EnsembleSummary:
    dp = FoldingDP(model, x, c)
    if log_space:
        log_q = dp.partition(log_space=True)
        q = math.exp(log_q) if log_q < 709.0 else math.inf
    else:
        q = dp.partition()
        log_q = math.log(q)
    best = dp.mfe(check_unique=False)
    return EnsembleSummary(q, best.energy, best.structure, log_q)


def log_partition(model: EnergyModel, x: PartialSequence, c: FoldConstraints = NO_CONSTRAINTS,
                  log_space: bool = False) -> float:
    dp = FoldingDP(model, x, c)
    if log_space:
        return dp.partition(log_space=True)
    return math.log(dp.partition())


def ensemble_energy(model: EnergyModel, x: PartialSequence, y: Structure,
                    c: FoldConstraints = NO_CONSTRAINTS) -> int:
    """Energy of ``y`` as a member of the ensemble constrained by ``c``."""
    return sum(loop_energy(model, z, x) for z in c.member_loops(y))


def _check_interiors(model: EnergyModel, loops: List[Loop]):
    too_large = oversized_interior(loops, model.max_interior)
    if too_large is not None:
        raise NotInEnsemble("{} has {} unpaired bases, the ensemble folds at most {}".format(
            too_large, too_large.unpaired, model.max_interior))


def prob_structure(model: EnergyModel, x: PartialSequence, y: Structure,
                   c: FoldConstraints = NO_CONSTRAINTS, log_space: bool = False) -> float:
    for i, j in sorted(y.pairs):
        if x.get(i, '') + x.get(j, '') not in CANONICAL_PAIRS:
            raise NotInEnsemble("pair {} cannot form under the sequence".format((i, j)))
    if not c.forced_pairs <= y.pairs:
        raise NotInEnsemble("structure misses forced pairs")
    _check_interiors(model, c.member_loops(y))
    energy = ensemble_energy(model, x, y, c)
    log_q = log_partition(model, x, c, log_space)
    return math.exp(-energy / (10.0 * model.rt) - log_q)


def prob_motif(model: EnergyModel, x: PartialSequence, m: Motif, log_space: bool = False) -> float:
    """
    Probability of motif ``m`` within its motif ensemble, i.e. among all
    foldings of the span of ``m`` that keep every boundary pair of ``m``.
    """
    for i, j in sorted(m.bpairs):
        if x.get(i, '') + x.get(j, '') not in CANONICAL_PAIRS:
            raise InfeasibleConstraints("boundary pair {} cannot form under the sequence".format((i, j)))
    _check_interiors(model, m.loops())
    c = FoldConstraints.for_motif(m)
    log_q = log_partition(model, x, c, log_space)
    energy = motif_energy(model, m, x)
    return math.exp(-energy / (10.0 * model.rt) - log_q)
