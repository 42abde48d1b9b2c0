"""
Inside-style dynamic program over the nearest-neighbour loop grammar.

One fill routine serves four semirings:
    MinPlusRing    minimum (energy, number of pairs)
    CountRing      minimum energy and the number of structures reaching it
    BoltzmannRing  partition function
    LogBoltzmannRing  partition function in log space

Tables, in reduced coordinates 1..N of the folding domain:
    C[p][q]   p and q pair with each other
    M1[p][q]  one multiloop branch starting at p, unpaired bases up to q
    M[p][q]   at least one multiloop branch in p..q
    F[j]      the prefix 1..j of the external loop

The grammar is unambiguous, which the counting and partition rings rely on.
Bulges and internal loops are limited to model.max_interior unpaired bases.
"""
import logging
import math
import sys
from typing import List, NamedTuple, Optional, Tuple

from rnapbound.common.errors import InfeasibleConstraints, InvalidConstraints
from rnapbound.energy.model import PAIR_INDEX, EnergyModel
from rnapbound.folding.constraints import FoldConstraints
from rnapbound.structure.core import CANONICAL_PAIRS, PartialSequence, Structure

logger = logging.getLogger(__name__)


class MinPlusRing(object):
    one = (0, 0)

    @staticmethod
    def lift(energy, new_pairs):
        return (energy, new_pairs)

    @staticmethod
    def mul(a, b):
        return (a[0] + b[0], a[1] + b[1])

    @staticmethod
    def add(a, b):
        if a is None or b < a:
            return b
        return a


class CountRing(object):
    one = (0, 1)

    @staticmethod
    def lift(energy, new_pairs):
        return (energy, 1)

    @staticmethod
    def mul(a, b):
        return (a[0] + b[0], a[1] * b[1])

    @staticmethod
    def add(a, b):
        if a is None or b[0] < a[0]:
            return b
        if a[0] < b[0]:
            return a
        return (a[0], a[1] + b[1])


class BoltzmannRing(object):
    one = 1.0

    def __init__(self, rt):
        self.beta = 1.0 / (10.0 * rt)

    def lift(self, energy, new_pairs):
        return math.exp(-energy * self.beta)

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def add(a, b):
        if a is None:
            return b
        return a + b


class LogBoltzmannRing(object):
    one = 0.0

    def __init__(self, rt):
        self.beta = 1.0 / (10.0 * rt)

    def lift(self, energy, new_pairs):
        return -energy * self.beta

    @staticmethod
    def mul(a, b):
        return a + b

    @staticmethod
    def add(a, b):
        if a is None:
            return b
        if a < b:
            a, b = b, a
        return a + math.log1p(math.exp(b - a))


class MfeResult(NamedTuple):
    structure: Structure
    energy: int
    unique: Optional[bool]


class FoldingDP(object):
    def __init__(self, model: EnergyModel, x: PartialSequence, c: FoldConstraints):
        """
        Prepares the reduced folding domain of ``x`` under ``c``.
        :param model: (EnergyModel) energy parameters and folding settings
        :param x: (PartialSequence) nucleotides, at least on the domain
        :param c: (FoldConstraints) forced / sealed pairs and region
        """
        self.model = model
        self.constraints = c
        self.length = c.coordinate_length(x)
        self.positions = (0,) + c.checked_domain(x)
        n = self.n = len(self.positions) - 1
        reduced = {pos: idx for idx, pos in enumerate(self.positions) if idx}

        for i, j in c.forced_pairs:
            if i not in reduced or j not in reduced:
                raise InvalidConstraints("forced pair {} lies outside the folding domain".format((i, j)))
            if x[i] + x[j] not in CANONICAL_PAIRS:
                raise InfeasibleConstraints("forced pair {} is {} under the sequence".format((i, j), x[i] + x[j]))
        self.forced = {(reduced[i], reduced[j]) for i, j in c.forced_pairs}
        self.sealed = {(reduced[i], reduced[j]) for i, j in c.sealed_pairs}
        self.top = (1, n) if c.region is not None else None

        self.s = [0] + [x.code(pos) for pos in self.positions[1:]] + [0]
        ends = set()
        for p, q in self.forced:
            ends.update((p, q))
        self.bad = [False] * (n + 2)
        self.count = [0] * (n + 2)
        for p in range(1, n + 1):
            self.bad[p] = p in ends
            self.count[p] = self.count[p - 1] + int(self.bad[p])

        s = self.s
        self.pt = [[-1] * (n + 2) for _ in range(n + 2)]
        self.allowed = [[False] * (n + 2) for _ in range(n + 2)]
        forced = sorted(self.forced)
        for p in range(1, n + 1):
            for q in range(p + 1, n + 1):
                pt = int(PAIR_INDEX[s[p], s[q]])
                self.pt[p][q] = pt
                if (p, q) in self.forced:
                    self.allowed[p][q] = True
                elif pt >= 0 and p not in ends and q not in ends:
                    self.allowed[p][q] = not any(p < a < q < b or a < p < b < q for a, b in forced)

    def free(self, a: int, b: int) -> bool:
        """No forced endpoint in a..b."""
        return a > b or self.count[b] == self.count[a - 1]

    def fill(self, ring):
        n = self.n
        model = self.model
        s, pt, bad, allowed, sealed = self.s, self.pt, self.bad, self.allowed, self.sealed
        free = self.free
        min_hairpin, max_interior = model.min_hairpin, model.max_interior
        a, b, c = (int(v) for v in model.multi)
        au = [int(v) for v in model.au_by_type]
        lift, mul, add = ring.lift, ring.mul, ring.add

        C = [[None] * (n + 2) for _ in range(n + 2)]
        M = [[None] * (n + 2) for _ in range(n + 2)]
        M1 = [[None] * (n + 2) for _ in range(n + 2)]
        for d in range(1, n):
            for p in range(1, n - d + 1):
                q = p + d
                if allowed[p][q]:
                    if (p, q) in sealed:
                        C[p][q] = lift(0, 1)
                    else:
                        C[p][q] = self._closed(ring, C, M, M1, p, q, a, b, au, min_hairpin, max_interior)

                acc = None
                for l in range(q, p, -1):
                    if l < q and bad[l + 1]:
                        break
                    branch = C[p][l]
                    if branch is not None:
                        acc = add(acc, mul(branch, lift(b + au[pt[p][l]] + c * (q - l), 0)))
                M1[p][q] = acc

                acc = None
                for u in range(p, q):
                    last = M1[u][q]
                    if last is None:
                        continue
                    if free(p, u - 1):
                        acc = add(acc, mul(lift(c * (u - p), 0), last))
                    if u > p and M[p][u - 1] is not None:
                        acc = add(acc, mul(M[p][u - 1], last))
                M[p][q] = acc

        F = [None] * (n + 1)
        F[0] = ring.one
        for j in range(1, n + 1):
            acc = None
            if not bad[j] and F[j - 1] is not None:
                acc = F[j - 1]
            for k in range(1, j):
                if C[k][j] is None or F[k - 1] is None:
                    continue
                acc = add(acc, mul(F[k - 1], mul(C[k][j], lift(au[pt[k][j]], 0))))
            F[j] = acc
        return C, M, M1, F

    def _closed(self, ring, C, M, M1, p, q, a, b, au, min_hairpin, max_interior):
        model = self.model
        s, pt, bad = self.s, self.pt, self.bad
        lift, mul, add = ring.lift, ring.mul, ring.add
        pt_outer = pt[p][q]
        acc = None
        if q - p - 1 >= min_hairpin and self.free(p + 1, q - 1):
            energy = int(model.hairpin_energy(q - p - 1, pt_outer, s[p + 1], s[q - 1]))
            acc = add(acc, lift(energy, 1))

        for k in range(p + 1, q):
            n5 = k - p - 1
            if n5 > max_interior or (n5 > 0 and bad[k - 1]):
                break
            for l in range(q - 1, k, -1):
                n3 = q - l - 1
                if n5 + n3 > max_interior or (n3 > 0 and bad[l + 1]):
                    break
                inner = C[k][l]
                if inner is None:
                    continue
                energy = int(model.interior_energy(n5, n3, pt_outer, pt[k][l], s[p + 1], s[q - 1],
                                                   s[l + 1], s[k - 1]))
                acc = add(acc, mul(lift(energy, 1), inner))

        closing = a + b + au[pt_outer]
        for u in range(p + 1, q - 1):
            if M[p + 1][u] is None or M1[u + 1][q - 1] is None:
                continue
            acc = add(acc, mul(lift(closing, 1), mul(M[p + 1][u], M1[u + 1][q - 1])))
        return acc

    def result(self, tables):
        C, _, _, F = tables
        if self.n == 0:
            return None
        if self.top is not None:
            return C[1][self.n]
        return F[self.n]

    def mfe(self, check_unique: bool = True) -> MfeResult:
        """
        Minimum free energy structure; ties go to fewer pairs, then to the
        lexicographically smallest dot-bracket.
        """
        if self.n == 0:
            return MfeResult(Structure.from_pairs(self.length, ()), 0, True)
        tables = self.fill(MinPlusRing)
        best = self.result(tables)
        if best is None:
            raise InfeasibleConstraints("no structure satisfies the constraints")
        dotbracket = _Backtracker(self, tables).run()
        unique = None
        if check_unique:
            unique = self.result(self.fill(CountRing))[1] == 1
        return MfeResult(self._to_structure(dotbracket), int(best[0]), unique)

    def partition(self, log_space: bool = False) -> float:
        """Partition function, or its logarithm when ``log_space``."""
        if self.n == 0:
            return 0.0 if log_space else 1.0
        ring = LogBoltzmannRing(self.model.rt) if log_space else BoltzmannRing(self.model.rt)
        value = self.result(self.fill(ring))
        if value is None:
            raise InfeasibleConstraints("no structure satisfies the constraints")
        return value

    def _to_structure(self, dotbracket: str) -> Structure:
        stack, pairs = [], []
        for idx, char in enumerate(dotbracket, start=1):
            if char == '(':
                stack.append(idx)
            elif char == ')':
                pairs.append((self.positions[stack.pop()], self.positions[idx]))
        return Structure.from_pairs(self.length, pairs)


class _Backtracker(object):
    """Rebuilds the lexicographically smallest co-optimal dot-bracket."""

    def __init__(self, dp: FoldingDP, tables):
        self.dp = dp
        self.C, self.M, self.M1, self.F = tables
        self.memo = {}
        a, b, c = (int(v) for v in dp.model.multi)
        self.multi = (a, b, c)
        self.au = [int(v) for v in dp.model.au_by_type]

    def run(self) -> str:
        dp = self.dp
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20 * dp.n + 1000))
        try:
            if dp.top is not None:
                return self.closed(1, dp.n)
            return self.prefix(dp.n)
        finally:
            sys.setrecursionlimit(limit)

    def prefix(self, n: int) -> str:
        dp, C, F = self.dp, self.C, self.F
        mul, lift = MinPlusRing.mul, MinPlusRing.lift
        best = [''] + [None] * n
        for j in range(1, n + 1):
            if F[j] is None:
                continue
            options = []
            if not dp.bad[j] and F[j - 1] == F[j]:
                options.append(best[j - 1] + '.')
            for k in range(1, j):
                if C[k][j] is None or F[k - 1] is None:
                    continue
                if mul(F[k - 1], mul(C[k][j], lift(self.au[dp.pt[k][j]], 0))) == F[j]:
                    options.append(best[k - 1] + self.closed(k, j))
            best[j] = min(options)
        return best[n]

    def closed(self, p: int, q: int) -> str:
        key = ('C', p, q)
        if key in self.memo:
            return self.memo[key]
        dp, C, M, M1 = self.dp, self.C, self.M, self.M1
        model = dp.model
        mul, lift = MinPlusRing.mul, MinPlusRing.lift
        target = C[p][q]
        if (p, q) in dp.sealed:
            self.memo[key] = '()'
            return '()'
        options = []
        pt_outer = dp.pt[p][q]
        if q - p - 1 >= model.min_hairpin and dp.free(p + 1, q - 1):
            energy = int(model.hairpin_energy(q - p - 1, pt_outer, dp.s[p + 1], dp.s[q - 1]))
            if lift(energy, 1) == target:
                options.append('(' + '.' * (q - p - 1) + ')')
        for k in range(p + 1, q):
            n5 = k - p - 1
            if n5 > model.max_interior or (n5 > 0 and dp.bad[k - 1]):
                break
            for l in range(q - 1, k, -1):
                n3 = q - l - 1
                if n5 + n3 > model.max_interior or (n3 > 0 and dp.bad[l + 1]):
                    break
                if C[k][l] is None:
                    continue
                energy = int(model.interior_energy(n5, n3, pt_outer, dp.pt[k][l], dp.s[p + 1], dp.s[q - 1],
                                                   dp.s[l + 1], dp.s[k - 1]))
                if mul(lift(energy, 1), C[k][l]) == target:
                    options.append('(' + '.' * n5 + self.closed(k, l) + '.' * n3 + ')')
        a, b, _ = self.multi
        closing = a + b + self.au[pt_outer]
        for u in range(p + 1, q - 1):
            if M[p + 1][u] is None or M1[u + 1][q - 1] is None:
                continue
            if mul(lift(closing, 1), mul(M[p + 1][u], M1[u + 1][q - 1])) == target:
                options.append('(' + self.multi_region(p + 1, u) + self.branch(u + 1, q - 1) + ')')
        self.memo[key] = min(options)
        return self.memo[key]

    def branch(self, p: int, q: int) -> str:
        key = ('M1', p, q)
        if key in self.memo:
            return self.memo[key]
        dp, C = self.dp, self.C
        _, b, c = self.multi
        mul, lift = MinPlusRing.mul, MinPlusRing.lift
        options = []
        for l in range(q, p, -1):
            if l < q and dp.bad[l + 1]:
                break
            if C[p][l] is None:
                continue
            if mul(C[p][l], lift(b + self.au[dp.pt[p][l]] + c * (q - l), 0)) == self.M1[p][q]:
                options.append(self.closed(p, l) + '.' * (q - l))
        self.memo[key] = min(options)
        return self.memo[key]

    def multi_region(self, p: int, q: int) -> str:
        key = ('M', p, q)
        if key in self.memo:
            return self.memo[key]
        dp, M, M1 = self.dp, self.M, self.M1
        c = self.multi[2]
        mul, lift = MinPlusRing.mul, MinPlusRing.lift
        options = []
        for u in range(p, q):
            if M1[u][q] is None:
                continue
            if dp.free(p, u - 1) and mul(lift(c * (u - p), 0), M1[u][q]) == M[p][q]:
                options.append('.' * (u - p) + self.branch(u, q))
            if u > p and M[p][u - 1] is not None and mul(M[p][u - 1], M1[u][q]) == M[p][q]:
                options.append(self.multi_region(p, u - 1) + self.branch(u, q))
        self.memo[key] = min(options)
        return self.memo[key]
