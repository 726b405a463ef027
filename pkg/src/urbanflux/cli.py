"""Command-line front end: ``urbanflux run | generate-case | compare | validate``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .morphology import CASES, SceneError, check_scene, dump_scene, generate_case, load_scene, tile
from .params import Params, apply_overrides
from .simulation import (RunConfig, WeatherError, WeatherSeries, compare_cases, energy_audit,
                         load_results, run, save_results, synth_weather, write_comparison,
                         write_outputs)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_WEATHER = 0, 1, 2, 3
RESULTS_FILE = "results.npz"


def _err(msg: str) -> None:
    print(f"urbanflux: error: {msg}", file=sys.stderr)


def _limit_threads() -> None:
    value = os.environ.get("URBANFLUX_THREADS")
    if not value:
        return
    import numba

    try:
        n = int(value)
    except ValueError:
        raise SystemExit(f"URBANFLUX_THREADS must be an integer, got {value!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # threading-layer probing is noisy and harmless
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def _parse_tiling(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxN, got {text!r}")
    return nx, ny


def _flatten(prefix: str, d: dict) -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}.{k}" if prefix else k
        if isinstance(v, dict):
            out.extend(_flatten(key, v))
        else:
            out.append((key, v))
    return out


def _load_params(args) -> Params:
    params = Params()
    if args.params:
        params = Params.from_dict(json.loads(Path(args.params).read_text()))
    return apply_overrides(params, args.set or [])


def _summary(path: Path, args, scene, params: Params, config: RunConfig, results) -> None:
    audit = energy_audit(results)
    demand = (results.energy["heating"] + results.energy["cooling"]) / 3600.0 / results.floor_area
    lines = [f"# urbanflux {__version__}",
             f"# case = {args.case or ''}",
             f"# scene = {args.scene or ''}",
             f"# weather = {args.weather or 'synthetic-winter'}",
             f"# weather_signature = {results.meta['weather']}",
             f"# tiling = {scene.tiling[0]}x{scene.tiling[1]}"]
    lines += [f"# config.{k} = {v}" for k, v in results.meta["config"].items()]
    lines += [f"# set {k}={v}" for k, v in _flatten("", {s: params.to_dict()[s]
                                                          for s in ("bem", "canopy", "radiation")})]
    for name, items in params.to_dict()["zones"].items():
        lines += [f"# zones.{name}.{k} = {v}" for k, v in items.items()]
    lines += [
        "",
        f"heat_demand_Wh = {results.heat_demand:.6f}",
        f"heating_Wh = {np.sum(results.energy['heating']) / 3600.0:.6f}",
        f"cooling_Wh = {np.sum(results.energy['cooling']) / 3600.0:.6f}",
        f"solar_Wh = {np.sum(results.energy['solar']) / 3600.0:.6f}",
        f"dissipation_Wh = {np.sum(results.energy['dissipation']) / 3600.0:.6f}",
        f"energy_imbalance_relative = {audit['relative']:.3e}",
        "layers_by_heat_demand = " + " > ".join(str(k + 1) for k in np.argsort(-demand, kind="stable")),
    ]
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    try:
        if bool(args.case) == bool(args.scene):
            _err("give exactly one of --case or --scene")
            return EXIT_INPUT
        scene = generate_case(args.case) if args.case else load_scene(args.scene)
        if args.tiling:
            scene = tile(scene, *args.tiling)
        if args.paper_constraints:
            failed = [c for c in check_scene(scene, True) if not c.passed]
            if failed:
                for c in failed:
                    _err(f"constraint failed: {c.rule} ({c.detail})")
                return EXIT_INPUT
        params = _load_params(args)
    except SceneError as exc:
        _err(f"malformed scene: {exc}")
        return EXIT_INPUT
    except (ValueError, KeyError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT

    try:
        if args.synthetic_winter == bool(args.weather):
            _err("give exactly one of --weather or --synthetic-winter")
            return EXIT_INPUT
        weather = synth_weather() if args.synthetic_winter else WeatherSeries.from_csv(
            args.weather, periodic=args.periodic_weather)
        cfg = dict(dump_facets=args.dump_facets)
        if args.dt:
            cfg["dt_couple"] = args.dt
        if args.spinup_days is not None:
            cfg["spinup_days"] = args.spinup_days
        config = RunConfig(**cfg)
        results = run(scene, weather, params, config, name=args.case or Path(args.scene).stem)
    except WeatherError as exc:
        _err(f"weather: {exc}")
        return EXIT_WEATHER
    except OSError as exc:
        _err(str(exc))
        return EXIT_WEATHER
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT

    out = Path(args.out)
    write_outputs(results, out)
    save_results(results, out / RESULTS_FILE)
    _summary(out / "summary.txt", args, scene, params, config, results)
    print(f"heat demand {results.heat_demand / 1000.0:.3f} kWh; outputs in {out}")
    return EXIT_OK


def cmd_generate_case(args) -> int:
    if args.name not in CASES:
        _err(f"unknown case {args.name!r}; expected one of {', '.join(CASES)}")
        return EXIT_INPUT
    dump_scene(generate_case(args.name), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        runs = [load_results(Path(d) / RESULTS_FILE if Path(d).is_dir() else Path(d))
                for d in args.runs]
        rows = compare_cases(runs, hours=args.hours)
    except (OSError, KeyError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_comparison(rows, out / "compare.csv")
    base = runs[0].heat_demand
    ranked = sorted(runs, key=lambda r: -r.heat_demand)
    print("heat demand ordering: " + " > ".join(r.meta.get("name", "?") for r in ranked))
    for r in runs:
        rel = (base - r.heat_demand) / base if base else 0.0
        print(f"  {r.meta.get('name', '?'):20s} {r.heat_demand / 1000.0:12.3f} kWh  "
              f"reduction vs {runs[0].meta.get('name', '?')}: {100 * rel:6.2f} %")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        scene = load_scene(args.scene)
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except SceneError as exc:
        print(f"FAIL scene structure: {exc}")
        return EXIT_FAIL
    checks = check_scene(scene, args.paper_constraints)
    for c in checks:
        detail = f" ({c.detail})" if c.detail else ""
        print(f"{'PASS' if c.passed else 'FAIL'} {c.rule}{detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="urbanflux", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scene over one day")
    r.add_argument("--case", help=f"built-in case: {', '.join(CASES)}")
    r.add_argument("--scene", help="scene JSON file")
    r.add_argument("--weather", help="weather CSV (time, t_atm_K, dni_W_m2, dhi_W_m2)")
    r.add_argument("--periodic-weather", action="store_true",
                   help="treat the weather file as one repeating period")
    r.add_argument("--synthetic-winter", action="store_true", help="clear winter day at 47.56 N")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--params", help="parameter JSON with bem/canopy/radiation/zones sections")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="parameter override, e.g. bem.eta=0.2 (repeatable)")
    r.add_argument("--tiling", type=_parse_tiling, metavar="NxN")
    r.add_argument("--dt", type=float, metavar="SECONDS", help="coupling step")
    r.add_argument("--spinup-days", type=int)
    r.add_argument("--dump-facets", action="store_true", help="also write facets.csv")
    r.add_argument("--paper-constraints", action="store_true",
                   help="refuse scenes violating the reference-case constraints")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("generate-case", help="write a built-in case as a scene file")
    g.add_argument("name")
    g.add_argument("out")
    g.set_defaults(func=cmd_generate_case)

    c = sub.add_parser("compare", help="compare run directories against the first one")
    c.add_argument("runs", nargs="+", help="run output directories")
    c.add_argument("--out", required=True)
    c.add_argument("--hours", type=float, nargs="+", default=[5.0, 15.0])
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("validate", help="check a scene file rule by rule")
    v.add_argument("scene")
    v.add_argument("--paper-constraints", action="store_true")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _limit_threads()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
