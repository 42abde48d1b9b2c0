from rnapbound.bounders.AbstractBounder import AbstractBounder
from rnapbound.bounders.approx import ApproxBounder, approx_pbound, single_rival_pbound
from rnapbound.bounders.exact import ExactBounder
from rnapbound.bounders.hybrid import BoundMode, HybridBounder
from rnapbound.bounders.rivals import (DesignTarget, RivalSet, ddg, ddg_multi, differential_positions,
                                       sample_rivals)
