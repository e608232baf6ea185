"""RIS-aided wireless power transfer simulator and power-only beam scanning."""

from .channel import AntennaPattern, Aperture, LinkGains, Scene, build_channel
from .geometry import PlanarArraySpec, Pose, UvDirection, partition_ris
from .measurement import MeasurementOracle, RectifierModel
from .ris_control import PhaseResolution, TileControl
from .scanning import ScanGrid, mtbs, recover_optimal_phase
from .scenario import ScenarioConfig, load_scenario, run_mtbs

__all__ = [
    "AntennaPattern", "Aperture", "LinkGains", "Scene", "build_channel",
    "PlanarArraySpec", "Pose", "UvDirection", "partition_ris",
    "MeasurementOracle", "RectifierModel", "PhaseResolution", "TileControl",
    "ScanGrid", "mtbs", "recover_optimal_phase",
    "ScenarioConfig", "load_scenario", "run_mtbs",
]
