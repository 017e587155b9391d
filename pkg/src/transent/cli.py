"""Command-line entry point: ``transent run|predict|design-frft``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
failure, 4 file-system error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .config import OpticsSettings, load_config, parse_angle, parse_length
from .exceptions import ConfigurationError, FitError, InvalidParameterError, TransentError
from .optics import arm_transform, classify_rotation, frft_chain
from .scenarios import predict, report_to_csv, run_scenario

OUT_DIR_ENV = "TRANSENT_OUT_DIR"
DEFAULT_OUT_DIR = "transent-out"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transent", description="Transverse-entanglement simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario config file (INI format)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--events", type=int, help="override the number of detected pairs per curve")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    run = sub.add_parser("run", parents=[common], help="simulate a scenario and write report, CSVs and plots")
    run.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    sub.add_parser("predict", parents=[common], help="print the analytic report without sampling")

    design = sub.add_parser("design-frft", help="print lens placements realizing an FRFT of order alpha")
    design.add_argument("--alpha", required=True, help="order in radians, e.g. 0.5 or 3pi/4")
    design.add_argument("--f", required=True, help="lens focal length, e.g. 25cm")
    design.add_argument("--wavelength", default="810nm")
    design.add_argument("--stages", type=int, help="number of equal single-lens stages")
    design.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def _load(args):
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.events is not None:
        changes["events"] = args.events
    return config.replace(**changes) if changes else config


def _design(args) -> str:
    alpha = parse_angle(args.alpha)
    f = parse_length(args.f)
    wavelength = parse_length(args.wavelength)
    if alpha < 0:
        raise InvalidParameterError("alpha must be >= 0")
    if f <= 0 or wavelength <= 0:
        raise InvalidParameterError("focal length and wavelength must be positive")
    stages = args.stages or max(1, math.ceil(alpha / math.pi - 1e-12))
    part = alpha / stages
    if part == 0 or math.isclose(part, math.pi):
        f_prime, imaging = f, f
    else:
        f_prime, imaging = f * math.sin(part), None
    k = OpticsSettings(wavelength=wavelength).k
    system = frft_chain(alpha, f_prime, k=k, stages=stages, imaging_focal=imaging)
    realized = classify_rotation(arm_transform(system))
    position = 0.0
    placements = []
    for element in system.elements:
        if element.kind == "free":
            position += element.length
        else:
            placements.append({"position": position, "focal_length": element.length})
    result = {
        "alpha": alpha,
        "stages": stages,
        "f_prime": f_prime,
        "total_length": position,
        "lenses": placements,
        "realized_rotation": realized,
    }
    if args.format == "json":
        return json.dumps(result, indent=2, sort_keys=True)
    lines = [f"alpha = {alpha:.10g} rad in {stages} stage(s), f' = {f_prime:.10g} m"]
    for n, lens in enumerate(placements, 1):
        lines.append(f"lens {n}: z = {lens['position']:.10g} m, f = {lens['focal_length']:.10g} m")
    lines.append(f"detector plane: z = {position:.10g} m")
    if realized is None:
        lines.append("note: the ray matrix is not a pure rotation (2f-2f imaging leaves a quadratic phase)")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "design-frft":
            print(_design(args))
        elif args.command == "predict":
            report = predict(_load(args))
            if args.format == "json":
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                sys.stdout.write(report_to_csv(report))
        else:
            config = _load(args)
            out_dir = args.out_dir or config.output_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR
            report = run_scenario(config, out_dir, args.format)
            print(os.path.join(out_dir, report["files"][-1]))
    except (ConfigurationError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, TransentError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
