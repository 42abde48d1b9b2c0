from rnapbound.energy.model import (DEFAULT_PARAMS, DEFAULT_RT, INF, PAIR_INDEX, PAIR_NUCS, EnergyModel,
                                    load_params, loop_energy, loop_energy_batch, motif_energy,
                                    params_digest, structure_energy)
