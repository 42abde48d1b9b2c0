import os
from typing import List, Optional, Tuple

from rnapbound.common.errors import InputError, InteriorTooLarge, ParseError
from rnapbound.structure.core import (DEFAULT_MIN_HAIRPIN, Structure, decompose_loops, oversized_interior,
                                      parse_dotbracket)


def read_structures(path: str, min_hairpin: int = DEFAULT_MIN_HAIRPIN, allow_lonely: bool = True,
                    max_interior: Optional[int] = None) -> List[Tuple[str, Structure]]:
    """
    Reads a dot-bracket file: one structure per line, '#' starts a comment
    line, and a '>name' line names the structure that follows. Unnamed
    structures are called ``<file>:<line>``.
    :param path: (str) file to read
    :param max_interior: (int) reject bulges and internal loops the folding
        ensemble cannot hold, None to accept any size
    :return: list of (name, Structure) in file order
    """
    try:
        with open(path, encoding='utf-8') as fp:
            lines = fp.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise InputError("cannot read {}: {}".format(path, e))

    entries = []
    name = None
    base = os.path.basename(path)
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if line.startswith('>'):
            name = line[1:].strip() or None
            continue
        try:
            structure = parse_dotbracket(line, min_hairpin=min_hairpin, allow_lonely=allow_lonely)
            if max_interior is not None:
                too_large = oversized_interior(decompose_loops(structure), max_interior)
                if too_large is not None:
                    raise InteriorTooLarge(too_large, max_interior)
        except InputError as e:
            raise ParseError("{}: {}".format(base, e), line_no) from e
        entries.append((name or '{}:{}'.format(base, line_no), structure))
        name = None
    if not entries:
        raise InputError("no structure found in {}".format(path))
    return entries
