"""Command line: ``riswpt simulate | sweep | baseline``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .geometry import VisibilityError
from .measurement import watts_to_dbm
from .scanning import ScanAbort
from .scenario import (ConfigError, baseline_powers, build_scene, distance_sweep, export,
                       load_scenario, parse_scenario, run_mtbs, write_sweep)


def _tile_size(text: str) -> list[int]:
    try:
        r, c = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"tile size must look like 4x4, got {text!r}") from None
    return [r, c]


def _load(args):
    cfg = load_scenario(args.scenario)
    updates = {}
    if getattr(args, "tile_size", None):
        updates["tile"] = args.tile_size
    if getattr(args, "iterations", None) is not None:
        updates["iterations"] = args.iterations
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "block_direct", False):
        updates["block_direct"] = True
    if updates:
        # re-validate so overrides get the same field checks as the file
        data = cfg.with_updates(**updates).to_dict()
        cfg = parse_scenario(data)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    res = run_mtbs(cfg)
    for c in res.checkpoints:
        print(f"iteration {c.iteration} {c.stage:5s}  sensor {watts_to_dbm(c.sensor_w):8.2f} dBm"
              f"  total {watts_to_dbm(c.total_w):8.2f} dBm  gain {c.gain_db:6.2f} dB"
              f"  total gain {c.total_gain_db:6.2f} dB")
    if args.out:
        for p in export(res, args.out):
            print(f"wrote {p}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    points = distance_sweep(cfg, args.start, args.stop, args.step, args.axis)
    for p in points:
        print(f"{args.axis}={p.position:6.3f} m  d={p.distance_m:6.3f} m  "
              f"DC {watts_to_dbm(p.dc_power_w):8.2f} dBm  efficiency {p.efficiency:.4%}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep(points, out / "sweep.csv")
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_baseline(args) -> int:
    cfg = _load(args)
    scene = build_scene(cfg)
    wide = ("wide", tuple(cfg.wide_beam_element), cfg.wide_beam_power_w)
    sensor, total, dc = baseline_powers(cfg, scene, wide)
    print(f"RIS OFF, wide beam element {tuple(cfg.wide_beam_element)}: sensor "
          f"{watts_to_dbm(sensor):.2f} dBm, total {watts_to_dbm(total):.2f} dBm, "
          f"DC {watts_to_dbm(dc):.2f} dBm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="riswpt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run MTBS on a scenario")
    sim.add_argument("--scenario", required=True, help="JSON file or bundled scenario name")
    sim.add_argument("--tile-size", type=_tile_size)
    sim.add_argument("--iterations", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--block-direct", action="store_true", help="block the direct Tx-Rx path")
    sim.add_argument("--out", help="directory for trace.csv, summary.csv, phase_grid.csv")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="move the receiver and rerun MTBS at each position")
    sw.add_argument("--scenario", required=True)
    sw.add_argument("--axis", choices=("x", "y", "z"), default="x")
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--step", type=float, required=True)
    sw.add_argument("--tile-size", type=_tile_size)
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    bl = sub.add_parser("baseline", help="RIS-OFF powers under the wide-beam excitation")
    bl.add_argument("--scenario", required=True)
    bl.set_defaults(func=cmd_baseline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, VisibilityError, ScanAbort, ValueError, OSError) as exc:
        print(f"riswpt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
