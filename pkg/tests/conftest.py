import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from catmix import ARNOLD, PerturbedCatMap, ShearStep, analyze_matrix

LAMBDA = (3 + np.sqrt(5)) / 2
LOG_LAMBDA = float(np.log(LAMBDA))


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)


@pytest.fixture(scope="session")
def hyp():
    return analyze_matrix(ARNOLD)


@pytest.fixture(scope="session")
def pure_map():
    return PerturbedCatMap.pure(ARNOLD)


def perturbed(eps: float, freq: int = 1) -> PerturbedCatMap:
    """Standard two-shear perturbation with total amplitude eps."""
    return PerturbedCatMap(ARNOLD, (ShearStep("horizontal", eps / 2, freq),
                                    ShearStep("vertical", eps / 2, freq)))


@pytest.fixture
def pert_map():
    return perturbed(1e-3)
