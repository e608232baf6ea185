import numpy as np
import pytest

from riswpt.channel import Aperture, LinkGains, Scene
from riswpt.geometry import PlanarArraySpec, Pose, VisibilityError, partition_ris, wavelength

LAM = wavelength(5.8e9)

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


def make_scene(tx=(1, 1), rx=(1, 1), ris=(2, 2), tile=(2, 2), tx_pos=(-0.5, 0.0, 2.0),
               rx_pos=(0.6, 0.3, 1.8), gains=None, **kw) -> Scene:
    half = LAM / 2
    ris_pose = Pose(np.zeros(3))
    return Scene(
        tx=Aperture(PlanarArraySpec(*tx, half, half), Pose.facing(tx_pos, ris_pose.origin)),
        rx=Aperture(PlanarArraySpec(*rx, half, half), Pose.facing(rx_pos, ris_pose.origin)),
        ris_pose=ris_pose,
        partition=partition_ris(PlanarArraySpec(*ris, half, half), *tile),
        wavelength=LAM,
        gains=gains or LinkGains(),
        **kw,
    )


def random_scene(rng: np.random.Generator, direct: bool = True) -> Scene:
    """1-4 tiles of at most 4x4 cells, Tx up to 4x4, Rx up to 2x2, random frontal poses."""
    while True:
        tr, tc = rng.integers(1, 5, size=2)
        a, b = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (1, 4), (4, 1)][rng.integers(8)]
        tx = tuple(int(v) for v in rng.integers(1, 5, size=2))
        rx = tuple(int(v) for v in rng.integers(1, 3, size=2))

        def frontal():
            return np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.8, 3.0)])

        p_tx, p_rx = frontal(), frontal()
        if np.linalg.norm(p_tx - p_rx) < 0.3:
            continue
        try:
            scene = make_scene(tx, rx, (int(tr * a), int(tc * b)), (int(tr), int(tc)), p_tx, p_rx,
                               direct_blocked=not direct)
            scene.tx_tile_links()
            scene.tile_rx_links()
        except VisibilityError:
            continue
        return scene


@pytest.fixture
def lam():
    return LAM
