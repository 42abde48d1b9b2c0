"""
Exceptions raised by rnapbound.

Everything derives from PBoundError so the command line can map a failure
to its exit code: InputError -> 1, ConfigError -> 2, anything else -> 3.
"""


class PBoundError(RuntimeError):
    exit_code = 3


class InputError(PBoundError, ValueError):
    exit_code = 1


class ConfigError(PBoundError, ValueError):
    exit_code = 2


# structure parsing
class IllegalCharacter(InputError):
    def __init__(self, char, position):
        super(IllegalCharacter, self).__init__(
            "illegal character {!r} at position {}".format(char, position))
        self.char = char
        self.position = position


class UnbalancedBrackets(InputError):
    def __init__(self, position):
        super(UnbalancedBrackets, self).__init__("unbalanced bracket at position {}".format(position))
        self.position = position


class HairpinTooSmall(InputError):
    def __init__(self, pair, min_hairpin):
        super(HairpinTooSmall, self).__init__(
            "pair {} encloses fewer than {} unpaired bases".format(pair, min_hairpin))
        self.pair = pair


class LonelyPair(InputError):
    def __init__(self, pair):
        super(LonelyPair, self).__init__("lonely pair {}".format(pair))
        self.pair = pair


class InteriorTooLarge(InputError):
    def __init__(self, loop, max_interior):
        super(InteriorTooLarge, self).__init__(
            "{} has {} unpaired bases, more than the {} folded".format(loop, loop.unpaired, max_interior))
        self.loop = loop


class NotContiguous(InputError):
    pass


class MissingPosition(InputError):
    def __init__(self, positions):
        positions = sorted(positions)
        super(MissingPosition, self).__init__("positions not in domain: {}".format(positions))
        self.positions = positions


class LengthMismatch(InputError):
    pass


# parameter files
class ParseError(InputError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line {}: {}".format(line, message)
        super(ParseError, self).__init__(message)
        self.line = line


class MissingSection(ParseError):
    def __init__(self, section):
        super(MissingSection, self).__init__("missing section [{}]".format(section))
        self.section = section


# evaluation and folding
class IncompleteAssignment(PBoundError):
    def __init__(self, positions):
        positions = sorted(positions)
        super(IncompleteAssignment, self).__init__("no nucleotide assigned at {}".format(positions))
        self.positions = positions


class NonCanonicalPair(PBoundError):
    def __init__(self, pair, bases):
        super(NonCanonicalPair, self).__init__("pair {} carries non-canonical {}".format(pair, bases))
        self.pair = pair
        self.bases = bases


class InvalidConstraints(PBoundError):
    pass


class InfeasibleConstraints(PBoundError):
    pass


class RegionTooLarge(PBoundError):
    pass


class NotInEnsemble(PBoundError):
    pass


class MotifTooLarge(PBoundError):
    pass


class EmptyRivalSet(PBoundError):
    pass


class NoRivalsFound(PBoundError):
    pass


class PersistenceError(PBoundError):
    pass
