import numpy as np
import pytest

from cbre2.presets import mixed_scenario
from cbre2.simulate import scenario_states

RECORD_TIMES = np.array([0.2, 0.4, 0.6, 0.8, 1.0])


@pytest.fixture(scope="session")
def mixed_big_run():
    """The large mixed-scenario run shared by the acceptance criteria.

    10^5 paths at step 1e-3, states recorded at five grid times.
    """
    sc = mixed_scenario(n_paths=100_000, step=1e-3)
    times, states = scenario_states(sc, sc.n_paths, sc.seed, record_times=RECORD_TIMES)
    return sc, times, states[0]
