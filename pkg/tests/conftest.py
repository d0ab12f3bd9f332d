"""Shared fixtures: the reference design is expensive, so build it once."""

import pytest

import uwbpulse as up
from uwbpulse import defaults
from uwbpulse.pipeline import band_spectrum


@pytest.fixture(scope="session")
def mask():
    return up.fcc_indoor_mask()


@pytest.fixture(scope="session")
def monocycle():
    return up.gaussian_monocycle(
        defaults.CENTER_FREQ, defaults.MONOCYCLE_CLOCKS * defaults.CLOCK_T0
    )


@pytest.fixture(scope="session")
def design25():
    return up.design_pulse(order=25)


@pytest.fixture(scope="session")
def design5():
    return up.design_pulse(order=5)


@pytest.fixture(scope="session")
def design1():
    return up.design_pulse(order=1)


@pytest.fixture(scope="session")
def pulse25(design25):
    return design25.pulse


@pytest.fixture(scope="session")
def family_k2(pulse25):
    """Orthonormal family at T = Tp/2, M = 2K (9 members)."""
    shift = pulse25.duration() / 2
    return up.lowdin_family(pulse25, shift, 4)


@pytest.fixture(scope="session")
def limit_k2(pulse25):
    shift = pulse25.duration() / 2
    return up.orthonormal_generator(pulse25, shift)


@pytest.fixture(scope="session")
def spec25(pulse25, mask):
    return band_spectrum(pulse25, mask)

