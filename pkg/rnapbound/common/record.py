"""
Bound records shared by the folding, approximation and decomposition code.
"""
import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple


class Method(str, enum.Enum):
    EXACT = 'exact'
    APPROX = 'approx'
    SKIPPED = 'skipped'
    DECOMPOSED = 'decomposed'  # structure-level product of motif bounds


@dataclass(frozen=True)
class PBoundRecord:
    """
    An upper bound on the largest probability any sequence gives a motif or
    structure.

    :param key: (str) canonical motif key or structure id
    :param pbound: (float) the bound, in [0, 1]
    :param method: (Method) how the bound was obtained
    :param params_hash: (str) digest of the energy model and bound config
    :param ddg_max: (float) largest aggregated rival gap in deci-kcal (approx only)
    :param rival_count: (int) number of rivals used
    :param umfe_undesignable: (bool) some rival ties or beats the target on every sequence
    :param sequence: (str) maximizing sequence over the motif span (exact only)
    :param assignment: (dict) span offset -> nucleotide of the maximizing assignment (approx only)
    """
    key: str
    pbound: float
    method: Method
    params_hash: str
    ddg_max: Optional[float] = None
    rival_count: int = 0
    umfe_undesignable: bool = False
    count_explored: Optional[int] = None
    # interpretability, not part of the identity of a record
    sequence: Optional[str] = field(default=None, compare=False)
    assignment: Optional[Dict[int, str]] = field(default=None, compare=False)
    rival_ddg: Optional[Tuple[float, ...]] = field(default=None, compare=False)
    rivals: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'method', Method(self.method))
        assert 0.0 <= self.pbound <= 1.0 + 1e-12, "pbound out of range: {}".format(self.pbound)
        if self.method == Method.SKIPPED:
            assert self.pbound == 1.0, "skipped records must carry pbound 1"

    def to_dict(self, explain: bool = True) -> dict:
        out = asdict(self)
        out['method'] = self.method.value
        if self.assignment is not None:
            out['assignment'] = {str(pos): nt for pos, nt in sorted(self.assignment.items())}
        if self.rival_ddg is not None:
            out['rival_ddg'] = list(self.rival_ddg)
        if self.rivals is not None:
            out['rivals'] = list(self.rivals)
        if not explain:
            for name in ('sequence', 'assignment', 'rival_ddg', 'rivals'):
                out.pop(name)
        return out

    def to_json(self, explain: bool = True) -> str:
        return json.dumps(self.to_dict(explain), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> 'PBoundRecord':
        data = dict(data)
        if data.get('assignment') is not None:
            data['assignment'] = {int(pos): nt for pos, nt in data['assignment'].items()}
        for name in ('rival_ddg', 'rivals'):
            if data.get(name) is not None:
                data[name] = tuple(data[name])
        known = cls.__dataclass_fields__
        return cls(**{name: value for name, value in data.items() if name in known})

    @classmethod
    def skipped(cls, key: str, params_hash: str, rival_count: int = 0) -> 'PBoundRecord':
        return cls(key=key, pbound=1.0, method=Method.SKIPPED, params_hash=params_hash, rival_count=rival_count)
