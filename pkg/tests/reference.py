"""Reference configurations shared by the test modules."""

import numpy as np

from chainsq.chain import LinearChainParams, SqueezedBathSpec
from chainsq.experiments import Scenario

IDEAL_BATH = SqueezedBathSpec.pure(1.0, 2.0)
IDEAL_PARAMS = LinearChainParams(eta=1.0, Delta=-0.4, delta=0.1)
IDEAL_EN = -np.log2(5 - 2 * np.sqrt(6))

OM_OMEGA0_SI = 2 * np.pi * 1e9
CQED_OMEGA0_SI = 2 * np.pi * 5e9
HW_PARAMS = LinearChainParams(eta=2e-3, Delta=0.8e-3, delta=0.2e-3)
OM_HARDWARE = {"g": 5e-5, "kappa": 0.01, "E_plus": 160.0, "E_minus": 136.0, "omega0_si": OM_OMEGA0_SI, "wavelength": 1.55e-6}
CQED_HARDWARE = {"g": 0.06, "epsilon": 2.0, "E_plus": 0.25, "E_minus": 0.07, "kappa": 0.02, "omega0_si": CQED_OMEGA0_SI}

TEMPERATURES = (0.02, 0.05, 0.1)
HW_GAMMAS = tuple(np.logspace(-7, -4, 7))


def ideal_scenario(gamma=0.01, N=4, params=IDEAL_PARAMS, bath=IDEAL_BATH):
    return Scenario("ideal", params, N, gamma=gamma, bath=bath)


def om_scenario(gamma=1e-5, temperature=0.05, **hardware):
    return Scenario("optomechanical", HW_PARAMS, 4, gamma=gamma, temperature=temperature, hardware={**OM_HARDWARE, **hardware})


def cqed_scenario(gamma=1e-5, temperature=0.05, **hardware):
    return Scenario("circuit-qed", HW_PARAMS, 4, gamma=gamma, temperature=temperature, hardware={**CQED_HARDWARE, **hardware})
