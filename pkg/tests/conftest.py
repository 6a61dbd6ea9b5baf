"""Shared helpers: random but reproducible problem instances.

The random RaInstance family assigns every CH to exactly one serving UAV
(dwell drawn uniformly, rescaled to respect each UAV's slot budget), with
per-link gains from random distances in 300..800 m at the default radio
numerology. Power caps stay slack by construction.
"""

import numpy as np
import pytest

from uavm2m import channel
from uavm2m.model import DwellMatrix, RadioParams
from uavm2m.raopt import RaInstance

WAVELENGTH = 3e8 / 2e9
BETA = channel.snr_gap(1e-7)


def random_instance(rng, max_uavs=3, max_chs=6, max_rbs=24, packet_bits=100.0,
                    min_dwell=0.1):
    n_u = int(rng.integers(1, max_uavs + 1))
    n_g = int(rng.integers(1, max_chs + 1))
    total = int(rng.integers(n_u, max_rbs + 1))
    dwell = np.zeros((n_u, n_g))
    for g in range(n_g):
        u = int(rng.integers(0, n_u))
        dwell[u, g] = rng.uniform(min_dwell, 1.0)
    for u in range(n_u):
        load = dwell[u].sum()
        if load > 1:
            dwell[u] *= 0.95 / load
    dist = rng.uniform(300.0, 800.0, size=(n_g, n_u))
    gains = (4 * np.pi * dist / WAVELENGTH) ** -2.5
    return RaInstance(
        dwell=DwellMatrix(entries=dwell), gains=gains,
        packet_bits=packet_bits, rb_bandwidth=15e3, total_rbs=total,
        noise_psd=1e-20, beta=BETA, pmax=1.0,
    )


def single_link_instance(total_rbs=6, dwell=1.0, altitude=500.0):
    gain = channel.path_gain(altitude, WAVELENGTH, 2.5)
    return RaInstance(
        dwell=DwellMatrix(entries=np.array([[dwell]])),
        gains=np.array([[gain]]),
        packet_bits=100.0, rb_bandwidth=15e3, total_rbs=total_rbs,
        noise_psd=1e-20, beta=BETA, pmax=1.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def default_radio():
    return RadioParams()
