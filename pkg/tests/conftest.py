import numpy as np
import pytest

from cfmimo.beamforming import realize_design
from cfmimo.metrics import coherent_rates, estimate_uatf_stats, uatf_rates
from cfmimo.network import (
    SCENARIOS,
    NetworkConfig,
    build_csi,
    generate_instance,
    sample_channels,
)
from cfmimo.solvers import solve_max_min

N_ACCEPTANCE_DROPS = 20


def drop_seeds(master, d):
    return master + d, master + 1_000_000 + d


@pytest.fixture(scope="session")
def desk_cfg():
    return NetworkConfig.desk()


@pytest.fixture(scope="session")
def maxmin_drops(desk_cfg):
    """Joint max-min solves for 20 desk drops x 3 scenarios, with rate reports.

    Shared by the ordering, bound-ordering and method-ordering acceptance
    tests to keep the suite fast.
    """
    drops = []
    gammas = np.ones(desk_cfg.K)
    budget = desk_cfg.power_budget
    for d in range(N_ACCEPTANCE_DROPS):
        geo_seed, ch_seed = drop_seeds(0, d)
        per_scenario = {}
        batch = None
        for scenario in SCENARIOS:
            inst = generate_instance(desk_cfg, geo_seed, scenario)
            if batch is None:
                batch = sample_channels(inst, desk_cfg.n_sim, ch_seed)
            res = solve_max_min(inst, batch, gammas, budget)
            assert res.converged
            csi = build_csi(batch, inst)
            beams = realize_design(res.design, csi, inst)
            per_scenario[scenario] = {
                "inst": inst,
                "csi": csi,
                "result": res,
                "beams": beams,
                "uatf_rates": uatf_rates(estimate_uatf_stats(batch, beams), res.p),
                "coherent_rates": coherent_rates(batch, beams, res.p),
            }
        drops.append({"batch": batch, "scenarios": per_scenario})
    return drops
