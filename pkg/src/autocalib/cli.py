"""Command-line pipeline driver.

One JSON config file carries every tunable (each algorithm constant is a
named key with its standard default); ``--set section.key=value``
overrides individual entries and a few common flags shadow the input
paths.  Artifacts land in the output directory under stable names:

    simulate   tracks.json matches.json truth.json
    intrinsic  intrinsics.json
    extrinsic  extrinsics.json (votes_x.png votes_y.png with save_maps)
    calibrate  intrinsics.json + extrinsics.json
    evaluate   report.json (also printed)
    topview    topview_grid.json (topview.png when an image is given)

Failures print one machine-readable JSON object and exit nonzero.  Set
AUTOCALIB_LOG=DEBUG (or any logging level) for progress output.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import CalibrationError, ConfigError
from .extrinsics import (
    ExtrinsicResult,
    GridConfig,
    calibrate_extrinsics,
    load_matches,
    save_vote_map,
)
from .intrinsics import FocalSearchConfig, IntrinsicResult, calibrate_intrinsics
from .simulate import SceneSpec, evaluate_recovery, generate_scene
from .topview import TopviewSpec, topview_grid, warp_image
from .tracks import load_tracks

log = logging.getLogger(__name__)

DEFAULTS: dict = {
    "out": "out",
    "height": None,  # camera height above the road, world units
    "inputs": {
        "tracks": None,
        "matches": None,
        "intrinsics": None,
        "extrinsics": None,
        "truth": None,
        "image": None,
    },
    "filter": {"coverage_min": 0.8, "tortuosity_max": 1.2, "top_tracks": 10},
    "focal": {"f_min": 10.0, "f_max": None, "step": 1.0, "refine": True},
    "voting": {
        "min_length": 2.0,
        "bin_width": 1.0,
        "min_separation": 30.0,
        "half_width": 5.0,
        "top_fraction": 0.2,
        "k_sigma": 2.0,
        "grid_scale": 3.0,
        "grid_cell": 1.0,
        "save_maps": False,
    },
    "simulate": {
        "f": 800.0,
        "width": 1280,
        "height": 720,
        "pitch_deg": 35.0,
        "yaw_deg": 45.0,
        "roll_deg": 0.0,
        "camera_height": 9.0,
        "vehicles_per_direction": 8,
        "keypoints_per_vehicle": 10,
        "speed_min": 0.20,
        "speed_max": 0.32,
        "lane_half_span": 5.0,
        "frame_count": 150,
        "stride": 6,
        "noise_sigma": 0.0,
        "seed": 0,
    },
    "topview": {
        "x_min": -10.0,
        "x_max": 10.0,
        "y_min": -10.0,
        "y_max": 10.0,
        "resolution": 20.0,
        "mode": "bilinear",
    },
}


def _merge(base: dict, override: dict, path: str = "") -> None:
    """Recursive in-place merge; keys absent from the defaults are rejected."""
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be a section object")
            _merge(base[key], value, where)
        else:
            base[key] = value


def _apply_set(config: dict, assignment: str) -> None:
    key, sep, raw = assignment.partition("=")
    if not sep:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings are convenient for paths
    node: dict = {}
    leaf = node
    parts = key.split(".")
    for part in parts[:-1]:
        leaf[part] = {}
        leaf = leaf[part]
    leaf[parts[-1]] = value
    _merge(config, node)


def load_config(
    config_path: str | None, sets: list[str], flag_inputs: dict, out: str | None, height: float | None
) -> dict:
    config = copy.deepcopy(DEFAULTS)
    if config_path:
        raw = jsonio.load(Path(config_path))
        if not isinstance(raw, dict):
            raise ConfigError(f"{config_path}: config must be a JSON object")
        _merge(config, raw)
    for assignment in sets:
        _apply_set(config, assignment)
    for key, value in flag_inputs.items():
        if value is not None:
            config["inputs"][key] = value
    if out is not None:
        config["out"] = out
    if height is not None:
        config["height"] = height
    return config


def _require_input(config: dict, name: str) -> Path:
    value = config["inputs"].get(name)
    if not value:
        raise ConfigError(f"missing required input {name!r} (flag --{name} or inputs.{name})")
    return Path(value)


def _scene_spec(config: dict) -> SceneSpec:
    sim = config["simulate"]
    try:
        return SceneSpec(
            f=float(sim["f"]),
            width=int(sim["width"]),
            height=int(sim["height"]),
            pitch_deg=float(sim["pitch_deg"]),
            yaw_deg=float(sim["yaw_deg"]),
            roll_deg=float(sim["roll_deg"]),
            camera_height=float(sim["camera_height"]),
            vehicles_per_direction=int(sim["vehicles_per_direction"]),
            keypoints_per_vehicle=int(sim["keypoints_per_vehicle"]),
            speed_range=(float(sim["speed_min"]), float(sim["speed_max"])),
            lane_half_span=float(sim["lane_half_span"]),
            frame_count=int(sim["frame_count"]),
            stride=int(sim["stride"]),
            noise_sigma=float(sim["noise_sigma"]),
            seed=int(sim["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(f"simulate section: {exc}") from exc


def _run_intrinsic(config: dict, out: Path) -> IntrinsicResult:
    meta, tracks = load_tracks(_require_input(config, "tracks"))
    flt, focal = config["filter"], config["focal"]
    result = calibrate_intrinsics(
        tracks,
        meta,
        coverage_min=float(flt["coverage_min"]),
        tortuosity_max=float(flt["tortuosity_max"]),
        top_n=int(flt["top_tracks"]),
        search=FocalSearchConfig(
            f_min=float(focal["f_min"]),
            f_max=None if focal["f_max"] is None else float(focal["f_max"]),
            step=float(focal["step"]),
            refine=bool(focal["refine"]),
        ),
    )
    jsonio.dump(result.to_json_dict(), out / "intrinsics.json")
    return result


def _run_extrinsic(config: dict, out: Path, intrinsic_result: IntrinsicResult | None) -> ExtrinsicResult:
    if config["height"] is None:
        raise ConfigError("camera height is required for the extrinsic stage (--height)")
    if intrinsic_result is None:
        intrinsic_result = IntrinsicResult.from_json_dict(
            jsonio.load(_require_input(config, "intrinsics"))
        )
    _, matches = load_matches(_require_input(config, "matches"))
    voting = config["voting"]
    intr = intrinsic_result.intrinsics
    result = calibrate_extrinsics(
        matches,
        intr,
        intrinsic_result.coefficients,
        height=float(config["height"]),
        grid=GridConfig.for_image(
            intr.width, intr.height,
            scale=float(voting["grid_scale"]), cell=float(voting["grid_cell"]),
        ),
        min_length=float(voting["min_length"]),
        bin_width=float(voting["bin_width"]),
        min_separation=float(voting["min_separation"]),
        half_width=float(voting["half_width"]),
        top_fraction=float(voting["top_fraction"]),
        k_sigma=float(voting["k_sigma"]),
        keep_grids=bool(voting["save_maps"]),
    )
    if voting["save_maps"]:
        for grid, name in zip(result.diagnostics["grids"], ("votes_x.png", "votes_y.png")):
            save_vote_map(grid, out / name)
    jsonio.dump(result.to_json_dict(), out / "extrinsics.json")
    return result


def _run_evaluate(config: dict, out: Path) -> dict:
    truth = jsonio.load(_require_input(config, "truth"))
    intrinsic_result = extrinsic_result = None
    if config["inputs"]["intrinsics"]:
        intrinsic_result = IntrinsicResult.from_json_dict(
            jsonio.load(Path(config["inputs"]["intrinsics"]))
        )
    if config["inputs"]["extrinsics"]:
        extrinsic_result = ExtrinsicResult.from_json_dict(
            jsonio.load(Path(config["inputs"]["extrinsics"]))
        )
    if intrinsic_result is None and extrinsic_result is None:
        raise ConfigError("evaluate needs at least one of --intrinsics / --extrinsics")
    report = evaluate_recovery(truth, intrinsic_result, extrinsic_result).to_json_dict()
    jsonio.dump(report, out / "report.json")
    return report


def _run_topview(config: dict, out: Path) -> None:
    intrinsic_result = IntrinsicResult.from_json_dict(
        jsonio.load(_require_input(config, "intrinsics"))
    )
    extrinsic_result = ExtrinsicResult.from_json_dict(
        jsonio.load(_require_input(config, "extrinsics"))
    )
    tv = config["topview"]
    spec = TopviewSpec(
        x_min=float(tv["x_min"]),
        x_max=float(tv["x_max"]),
        y_min=float(tv["y_min"]),
        y_max=float(tv["y_max"]),
        resolution=float(tv["resolution"]),
    )
    grid = topview_grid(
        intrinsic_result.intrinsics,
        intrinsic_result.coefficients,
        extrinsic_result.pose,
        spec,
    )
    jsonio.dump(grid.to_json_dict(), out / "topview_grid.json")
    if config["inputs"]["image"]:
        from PIL import Image

        source = np.asarray(Image.open(config["inputs"]["image"]).convert("RGB"), dtype=float)
        warped = warp_image(source, grid, mode=str(tv["mode"]))
        Image.fromarray(np.clip(warped, 0, 255).astype(np.uint8)).save(out / "topview.png")


def run(command: str, config: dict) -> int:
    """Execute one subcommand; returns the process exit status."""
    try:
        out = Path(config["out"])
        out.mkdir(parents=True, exist_ok=True)
        if command == "simulate":
            tracks_doc, matches_doc, truth = generate_scene(_scene_spec(config))
            jsonio.dump(tracks_doc, out / "tracks.json")
            jsonio.dump(matches_doc, out / "matches.json")
            jsonio.dump(truth, out / "truth.json")
            print(f"wrote tracks.json matches.json truth.json -> {out}")
        elif command == "intrinsic":
            result = _run_intrinsic(config, out)
            print(f"f = {result.intrinsics.f:.3f} px -> {out / 'intrinsics.json'}")
        elif command == "extrinsic":
            result = _run_extrinsic(config, out, None)
            print(f"f_new = {result.f_new:.3f} px -> {out / 'extrinsics.json'}")
        elif command == "calibrate":
            intrinsic_result = _run_intrinsic(config, out)
            result = _run_extrinsic(config, out, intrinsic_result)
            print(
                f"f = {intrinsic_result.intrinsics.f:.3f} px, f_new = {result.f_new:.3f} px -> {out}"
            )
        elif command == "evaluate":
            report = _run_evaluate(config, out)
            print(jsonio.dumps(report))
        elif command == "topview":
            _run_topview(config, out)
            print(f"wrote topview grid -> {out / 'topview_grid.json'}")
        else:
            raise ConfigError(f"unknown command {command!r}")
    except (CalibrationError, ValueError, OSError) as exc:
        print(
            json.dumps(
                {"error": {"type": type(exc).__name__, "stage": command, "message": str(exc)}}
            )
        )
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocalib",
        description="Traffic-camera self-calibration from vehicle motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "generate a synthetic scene with known calibration"),
        ("intrinsic", "estimate focal length and distortion from tracks"),
        ("extrinsic", "estimate pose from matched segments and intrinsics"),
        ("calibrate", "run both stages"),
        ("evaluate", "score results against a ground-truth record"),
        ("topview", "emit the ground-plane rectification grid"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument(
            "--set",
            dest="sets",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config entry, e.g. --set voting.k_sigma=3",
        )
        p.add_argument("--out", help="output directory")
        p.add_argument("--height", type=float, help="camera height above the road")
        for flag in ("tracks", "matches", "intrinsics", "extrinsics", "truth", "image"):
            p.add_argument(f"--{flag}", help=f"path to the {flag} file")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("AUTOCALIB_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = load_config(
            args.config,
            args.sets,
            {
                key: getattr(args, key)
                for key in ("tracks", "matches", "intrinsics", "extrinsics", "truth", "image")
            },
            args.out,
            args.height,
        )
    except (CalibrationError, ValueError, OSError) as exc:
        print(
            json.dumps(
                {"error": {"type": type(exc).__name__, "stage": "config", "message": str(exc)}}
            )
        )
        return 1
    return run(args.command, config)


if __name__ == "__main__":
    sys.exit(main())
