import pytest

from ncsync import FrameSpec, SubcarrierMap

# Occupied set used by the shipped presets: a wide band with a notch around
# the interferer parking spot and no DC.
MAIN_OCCUPIED = tuple(range(-100, 0)) + (1, 2, 3) + tuple(range(46, 101))


@pytest.fixture(scope="session")
def main_spec() -> FrameSpec:
    """Frame geometry of the shipped scenario presets."""
    smap = SubcarrierMap(n_fft=256, occupied=MAIN_OCCUPIED)
    return FrameSpec(smap=smap, n_cp=32, n_symbols=11, n_empty_prefix=3,
                     sc_spacing_hz=15e3)
