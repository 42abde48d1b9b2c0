from rnapbound.common.test_structures.fixed_structures import (BULGED_HELIX, BULGED_HELIX_RIVALS, CHICKEN_FEET,
                                                               CHICKEN_FOOT, MULTILOOP_51, RIVAL_DELTA, RIVAL_RIVAL,
                                                               RIVAL_SEQUENCE, RIVAL_TARGET, STEM_HAIRPIN, TINY_HAIRPIN,
                                                               load)
from rnapbound.common.test_structures.random_structures import (compatible_sequence, random_sequence,
                                                                random_structure, structure_corpus)
