"""Power-only discipline: the optimizer never touches field-level values."""

import ast
import inspect
from pathlib import Path

import numpy as np

import riswpt.scanning as scanning
from riswpt.geometry import UvDirection
from riswpt.measurement import MeasurementOracle
from riswpt.ris_control import PhaseResolution, TileControl

from .conftest import make_scene

ALLOWED = {"__future__", "csv", "math", "dataclasses", "typing", "numpy", "geometry", "ris_control"}
FIELD_MODULES = {"channel", "beam_steering", "measurement", "transmitter", "hardware"}


def _imports(path: Path) -> set[str]:
    mods = set()
    for node in ast.walk(ast.parse(path.read_text())):
        if isinstance(node, ast.Import):
            mods |= {a.name.split(".")[0] for a in node.names}
        elif isinstance(node, ast.ImportFrom):
            mods.add((node.module or "").split(".")[0])
    return mods


def test_scanning_imports_no_field_modules():
    mods = _imports(Path(scanning.__file__))
    assert not mods & FIELD_MODULES
    assert mods <= ALLOWED


def test_oracle_public_surface_is_real_valued():
    scene = make_scene(tx=(2, 2), rx=(2, 2), ris=(4, 4), tile=(2, 2))
    o = MeasurementOracle(scene, PhaseResolution(2))
    o.set_directional(UvDirection(0.1, 0.1), 1.0)
    o.set_tile(0, TileControl(UvDirection(0.2, 0.0), 1.0))
    public = [n for n, _ in inspect.getmembers(type(o)) if not n.startswith("_")]
    for name in public:
        attr = getattr(o, name)
        if callable(attr):
            params = [p for p in inspect.signature(attr).parameters.values()
                      if p.default is inspect.Parameter.empty]
            if params:
                continue
            value = attr()
        else:
            value = attr
        if value is None:
            continue
        arr = np.asarray(value, dtype=object) if isinstance(value, tuple) else np.asarray(value)
        assert not np.iscomplexobj(arr), name
        if arr.dtype == object:
            assert not any(isinstance(v, complex) for v in arr.ravel()), name
    for name in vars(o):
        if not name.startswith("_"):
            assert not np.iscomplexobj(np.asarray(getattr(o, name), dtype=object)), name
