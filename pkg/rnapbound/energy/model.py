"""
Nearest-neighbour energy model in integer deci-kcal/mol.

The loop kernels below are written against numpy indexing so the same code
evaluates one sequence (scalar codes) or a whole batch of assignments
(arrays of codes). Energies are exact integers; +inf marks infeasible
states and is only ever produced as a float.
"""
import hashlib
import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Mapping, Union

import numpy as np

from rnapbound.common.errors import (ConfigError, IncompleteAssignment, MissingSection,
                                     NonCanonicalPair, ParseError)
from rnapbound.structure.core import (CANONICAL_PAIRS, DEFAULT_MIN_HAIRPIN, NUCLEOTIDES, Loop, LoopKind,
                                      Motif, PartialSequence, Structure, decompose_loops)

logger = logging.getLogger(__name__)

Energy = Union[int, float]
INF = math.inf

DEFAULT_RT = 0.6163
DEFAULT_MAX_INTERIOR = 30
MAX_TABLE_LEN = 30
DEFAULT_PARAMS = os.path.join(os.path.dirname(__file__), 'params', 'turner2004_simplified.par')

# pair type of nucleotide codes (A=0, C=1, G=2, U=3); -1 for non-canonical
PAIR_INDEX = np.full((4, 4), -1, dtype=np.int64)
for _idx, _pair in enumerate(CANONICAL_PAIRS):
    PAIR_INDEX[NUCLEOTIDES.index(_pair[0]), NUCLEOTIDES.index(_pair[1])] = _idx
PAIR_NUCS = np.array([[NUCLEOTIDES.index(a), NUCLEOTIDES.index(b)] for a, b in CANONICAL_PAIRS], dtype=np.int64)
REVERSE_PAIR = np.array([CANONICAL_PAIRS.index(b + a) for a, b in CANONICAL_PAIRS], dtype=np.int64)

# section name -> number of integers expected
SECTIONS = {
    'STACK': 36,
    'HAIRPIN_LENGTH': MAX_TABLE_LEN + 1,
    'BULGE_LENGTH': MAX_TABLE_LEN + 1,
    'INTERNAL_LENGTH': MAX_TABLE_LEN + 1,
    'HAIRPIN_MISMATCH': 96,
    'INTERNAL_MISMATCH': 96,
    'MULTI': 3,
    'AU_PENALTY': 1,
    'NINIO': 2,
}
REQUIRED_SECTIONS = ('STACK', 'HAIRPIN_LENGTH')


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """
    Parameter tables plus the folding settings they are used with.

    :param stack: (ndarray) 6x6, outer pair type by inner pair type
    :param hairpin_len: (ndarray) hairpin initiation by size 0..30
    :param bulge_len: (ndarray) bulge initiation by size 0..30
    :param internal_len: (ndarray) internal loop initiation by total size 0..30
    :param hairpin_mismatch: (ndarray) 6x4x4 terminal mismatch of hairpins
    :param internal_mismatch: (ndarray) 6x4x4 terminal mismatch of internal loops
    :param multi: (ndarray) affine multiloop terms a, b, c
    :param au_penalty: (int) terminal AU/GU penalty
    :param ninio: (ndarray) asymmetry slope and cap
    :param rt: (float) RT in kcal/mol
    :param min_hairpin: (int) least number of unpaired bases in a hairpin
    :param max_interior: (int) largest bulge / internal loop admitted by folding
    """
    stack: np.ndarray
    hairpin_len: np.ndarray
    bulge_len: np.ndarray
    internal_len: np.ndarray
    hairpin_mismatch: np.ndarray
    internal_mismatch: np.ndarray
    multi: np.ndarray
    au_penalty: int
    ninio: np.ndarray
    rt: float = DEFAULT_RT
    min_hairpin: int = DEFAULT_MIN_HAIRPIN
    max_interior: int = DEFAULT_MAX_INTERIOR
    source: str = field(default='', compare=False)

    def __post_init__(self):
        if not self.rt > 0:
            raise ConfigError("rt must be positive, got {}".format(self.rt))
        if self.min_hairpin < 0 or self.max_interior < 0:
            raise ConfigError("min_hairpin and max_interior must be non-negative")

    @cached_property
    def au_by_type(self) -> np.ndarray:
        return np.array([0, 0] + [self.au_penalty] * 4, dtype=np.int64)

    @cached_property
    def digest(self) -> str:
        return params_digest(self)

    def with_settings(self, **kwargs) -> 'EnergyModel':
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(kwargs)
        return EnergyModel(**values)

    def boltzmann(self, energy: Energy) -> float:
        """Boltzmann weight of a deci-kcal energy."""
        if energy == INF:
            return 0.0
        return math.exp(-energy / (10.0 * self.rt))

    def length_term(self, table: np.ndarray, size: int) -> int:
        if size <= MAX_TABLE_LEN:
            return int(table[size])
        extra = 10.0 * 1.75 * self.rt * math.log(size / MAX_TABLE_LEN)
        return int(table[MAX_TABLE_LEN]) + int(math.floor(extra + 0.5))

    def ninio_term(self, n5: int, n3: int) -> int:
        slope, cap = int(self.ninio[0]), int(self.ninio[1])
        return min(cap, slope * abs(n5 - n3))

    # kernels: pair types and mismatch codes may be ints or int arrays
    def hairpin_energy(self, size, pt, mm5, mm3):
        return self.length_term(self.hairpin_len, size) + self.hairpin_mismatch[pt, mm5, mm3] + self.au_by_type[pt]

    def interior_energy(self, n5, n3, pt_outer, pt_inner, outer5=None, outer3=None, inner5=None, inner3=None):
        """
        Stack, bulge or internal loop between an outer pair (i,j) and an inner
        pair (k,l). ``outer5``/``outer3`` are x[i+1]/x[j-1], ``inner5``/``inner3``
        are x[l+1]/x[k-1]; only internal loops read them.
        """
        if n5 == 0 and n3 == 0:
            return self.stack[pt_outer, pt_inner]
        if n5 == 0 or n3 == 0:
            size = n5 + n3
            if size == 1:
                return self.length_term(self.bulge_len, 1) + self.stack[pt_outer, pt_inner]
            return self.length_term(self.bulge_len, size) + self.au_by_type[pt_outer] + self.au_by_type[pt_inner]
        return (self.length_term(self.internal_len, n5 + n3) + self.ninio_term(n5, n3)
                + self.internal_mismatch[pt_outer, outer5, outer3]
                + self.internal_mismatch[REVERSE_PAIR[pt_inner], inner5, inner3])

    def multi_energy(self, pts, unpaired):
        a, b, c = (int(v) for v in self.multi)
        total = a + b * len(pts) + c * unpaired
        for pt in pts:
            total = total + self.au_by_type[pt]
        return total

    def external_energy(self, pts):
        total = 0
        for pt in pts:
            total = total + self.au_by_type[pt]
        return total


def _parse_sections(path: str) -> Dict[str, tuple]:
    try:
        with open(path, encoding='utf-8') as fp:
            lines = fp.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError("cannot read parameter file {}: {}".format(path, e))

    sections = {}
    current = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('['):
            if not line.endswith(']'):
                raise ParseError("malformed section header {!r}".format(line), line_no)
            current = line[1:-1].strip().upper()
            if current not in SECTIONS:
                raise ParseError("unknown section [{}]".format(current), line_no)
            if current in sections:
                raise ParseError("section [{}] given twice".format(current), line_no)
            sections[current] = (line_no, [])
            continue
        if current is None:
            raise ParseError("values outside of any section", line_no)
        for token in line.split():
            try:
                sections[current][1].append(int(token))
            except ValueError:
                raise ParseError("not an integer: {!r}".format(token), line_no)
    return sections


def load_params(path: str = DEFAULT_PARAMS, rt: float = DEFAULT_RT, min_hairpin: int = DEFAULT_MIN_HAIRPIN,
                max_interior: int = DEFAULT_MAX_INTERIOR) -> EnergyModel:
    """
    Loads a parameter file. Optional sections that are absent are all zeros.
    :param path: (str) parameter file
    :param rt: (float) RT in kcal/mol
    :return: EnergyModel
    """
    sections = _parse_sections(path)
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            raise MissingSection(name)

    tables = {}
    for name, size in SECTIONS.items():
        line_no, values = sections.get(name, (None, [0] * size))
        if len(values) != size:
            raise ParseError("[{}] expects {} values, got {}".format(name, size, len(values)), line_no)
        tables[name] = np.array(values, dtype=np.int64)

    model = EnergyModel(stack=tables['STACK'].reshape(6, 6),
                        hairpin_len=tables['HAIRPIN_LENGTH'],
                        bulge_len=tables['BULGE_LENGTH'],
                        internal_len=tables['INTERNAL_LENGTH'],
                        hairpin_mismatch=tables['HAIRPIN_MISMATCH'].reshape(6, 4, 4),
                        internal_mismatch=tables['INTERNAL_MISMATCH'].reshape(6, 4, 4),
                        multi=tables['MULTI'],
                        au_penalty=int(tables['AU_PENALTY'][0]),
                        ninio=tables['NINIO'],
                        rt=float(rt), min_hairpin=int(min_hairpin), max_interior=int(max_interior),
                        source=os.path.abspath(path))
    logger.debug("loaded parameters from %s (%s)", path, model.digest[:12])
    return model


def params_digest(model: EnergyModel, **extra) -> str:
    """sha256 over every table, the settings, and any extra config values."""
    h = hashlib.sha256()
    for name in ('stack', 'hairpin_len', 'bulge_len', 'internal_len', 'hairpin_mismatch',
                 'internal_mismatch', 'multi', 'ninio'):
        h.update(name.encode())
        h.update(np.ascontiguousarray(getattr(model, name), dtype=np.int64).tobytes())
    h.update(repr((model.au_penalty, round(model.rt, 12), model.min_hairpin, model.max_interior)).encode())
    for key in sorted(extra):
        h.update('{}={!r}'.format(key, extra[key]).encode())
    return h.hexdigest()


def _evaluate(model: EnergyModel, z: Loop, codes: Mapping[int, object], pts: list):
    if z.kind == LoopKind.HAIRPIN:
        i, j = z.closing_pairs[0]
        return model.hairpin_energy(j - i - 1, pts[0], codes[i + 1], codes[j - 1])
    if z.kind in (LoopKind.STACK, LoopKind.BULGE, LoopKind.INTERNAL):
        (i, j), (k, l) = z.closing_pairs
        n5, n3 = z.sides
        return model.interior_energy(n5, n3, pts[0], pts[1], codes.get(i + 1), codes.get(j - 1),
                                     codes.get(l + 1), codes.get(k - 1))
    if z.kind == LoopKind.MULTI:
        return model.multi_energy(pts, z.unpaired)
    return model.external_energy(pts)


def loop_energy(model: EnergyModel, z: Loop, x: PartialSequence) -> int:
    """
    Energy of loop ``z`` under ``x``; reads only the critical positions of ``z``.
    """
    crit = z.critical
    missing = crit.positions - x.domain
    if missing:
        raise IncompleteAssignment(missing)
    codes = {pos: x.code(pos) for pos in crit.positions}
    pts = []
    for i, j in z.closing_pairs:
        pt = int(PAIR_INDEX[codes[i], codes[j]])
        if pt < 0:
            raise NonCanonicalPair((i, j), x[i] + x[j])
        pts.append(pt)
    return int(_evaluate(model, z, codes, pts))


def loop_energy_batch(model: EnergyModel, z: Loop, codes: Mapping[int, np.ndarray], size: int) -> np.ndarray:
    """
    Energies of ``z`` for a batch of assignments.
    :param codes: position -> int array of nucleotide codes (one entry per assignment)
    :param size: (int) batch size
    :return: float array, +inf where a closing pair is non-canonical
    """
    invalid = np.zeros(size, dtype=bool)
    pts = []
    for i, j in z.closing_pairs:
        pt = PAIR_INDEX[codes[i], codes[j]]
        invalid |= pt < 0
        pts.append(np.where(pt < 0, 0, pt))
    energy = np.broadcast_to(np.asarray(_evaluate(model, z, codes, pts), dtype=np.float64), (size,)).copy()
    energy[invalid] = np.inf
    return energy


def loops_energy(model: EnergyModel, loops: Iterable[Loop], x: PartialSequence) -> int:
    return sum(loop_energy(model, z, x) for z in loops)


def structure_energy(model: EnergyModel, y: Structure, x: PartialSequence) -> int:
    return loops_energy(model, decompose_loops(y), x)


def motif_energy(model: EnergyModel, m: Motif, x: PartialSequence) -> int:
    return loops_energy(model, m.loops(), x)
