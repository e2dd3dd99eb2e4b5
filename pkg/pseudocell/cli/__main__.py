#!/usr/bin/env python3
# -*- coding:UTF-8 -*-
#
# Copyright (C) 2026 Junbo Zheng. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""CLI entry point for the pseudo-colorize masked cells toolkit."""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, NoReturn, Optional

import questionary

from pseudocell import __version__
from pseudocell.cli.pipeline import (
    cmd_colormap_export,
    cmd_colormap_preview,
    cmd_context_forward,
    cmd_decode,
    cmd_encode,
    cmd_eval,
    cmd_eval_maps,
    cmd_mask_preview,
    cmd_pretrain_gen,
    cmd_synth,
)
from pseudocell.config import NO_COLORMAP, PipelineConfig, build_config
from pseudocell.constants import (
    COLORMAP_NAMES,
    HEATMAP_THRESHOLD,
    MASKING_SCHEMES,
    REFERENCE_SIDE,
    TARGET_KINDS,
)
from pseudocell.dataset import default_workers
from pseudocell.errors import InputError, PseudocellError
from pseudocell.log import Highlight, setup_logging
from pseudocell.synth import SynthSpec

logger = logging.getLogger(__name__)


def select_interactive(items: List[str], message: str = "Select:") -> int:
    """Arrow-key selector backed by questionary. Returns chosen index."""
    answer = questionary.select(message, choices=items).ask()
    if answer is None:
        raise InputError("selection cancelled")
    return items.index(answer)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors raise InputError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise InputError(f"{self.prog}: {message}")


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "colormap": getattr(args, "colormap", None),
        "masking": getattr(args, "masking", None),
        "patch": getattr(args, "patch", None),
        "padding": getattr(args, "padding", None),
        "mask_prob": getattr(args, "mask_prob", None),
        "fill_value": getattr(args, "fill_value", None),
        "mae_grid": getattr(args, "mae_grid", None),
        "mae_ratio": getattr(args, "mae_ratio", None),
        "target": getattr(args, "target", None),
        "seed": getattr(args, "seed", None),
        "input_dir": getattr(args, "input", None),
        "output_dir": getattr(args, "output", None),
        "workers": getattr(args, "workers", None),
    }
    return build_config(getattr(args, "config", None), overrides)


def run_pretrain_gen(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_pretrain_gen(_pipeline_config(args))


def run_targets_encode(args: argparse.Namespace) -> Dict[str, Any]:
    config = build_config(
        args.config, {"reference_side": args.reference_side, "workers": args.workers}
    )
    return cmd_encode(args.annotations, args.output, config.reference_side, config.workers)


def run_targets_decode(args: argparse.Namespace) -> Dict[str, Any]:
    image_size = None
    if args.image_size:
        image_size = (args.image_size[0], args.image_size[1])
    config = build_config(
        args.config, {"threshold": args.threshold, "reference_side": args.reference_side}
    )
    return cmd_decode(args.maps, args.output, config.threshold, image_size, config.reference_side)


def run_eval(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_eval(args.detections, args.annotations, args.csv, args.report)


def run_eval_maps(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_eval_maps(args.pred, args.truth, args.heatmap, args.threshold)


def run_synth(args: argparse.Namespace) -> Dict[str, Any]:
    spec = SynthSpec.from_json(args.spec) if args.spec else SynthSpec()
    if args.seed is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    return cmd_synth(spec, args.output, args.count, args.workers)


def run_colormap_preview(args: argparse.Namespace) -> Dict[str, Any]:
    name = args.name
    if name is None:
        if not sys.stdin.isatty():
            raise InputError("colormap name required when not running interactively")
        names = list(COLORMAP_NAMES)
        name = names[select_interactive(names, "Select a colormap:")]
    return cmd_colormap_preview(name, args.output, args.height)


def run_colormap_export(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_colormap_export(args.output)


def run_mask_preview(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_mask_preview(
        _pipeline_config(args), args.output, args.height, args.width, args.image
    )


def run_context_forward(args: argparse.Namespace) -> Dict[str, Any]:
    return cmd_context_forward(args.volume, args.weights, args.output, args.workers)


def _add_mask_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON pipeline config")
    parser.add_argument(
        "--masking",
        choices=MASKING_SCHEMES,
        help="Masking scheme (default: padded)",
    )
    parser.add_argument("--patch", type=int, help="Masked patch side in pixels (default: 12)")
    parser.add_argument("--padding", type=int, help="Unmasked band around each patch (default: 3)")
    parser.add_argument("--mask-prob", type=float, help="Per-cell mask probability (default: 0.5)")
    parser.add_argument("--fill-value", type=float, help="Value of masked pixels (default: 0)")
    parser.add_argument("--mae-grid", type=int, help="MAE grid cells per side (default: 14)")
    parser.add_argument("--mae-ratio", type=float, help="MAE masked cell ratio (default: 0.75)")
    parser.add_argument("--seed", type=int, help="Global seed (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="pseudocell",
        description="Pseudo-colorize masked cells: pre-training pairs, "
        "centroid heatmap targets and evaluation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:

  %(prog)s synth -o ./synth -n 10 --seed 7
  %(prog)s pretrain-gen -i ./synth -o ./pairs --colormap nipy_spectral
  %(prog)s targets encode -a ./synth/annotations.json -o ./maps
  %(prog)s targets decode -m ./maps -o ./detections.json
  %(prog)s eval -d ./detections.json -a ./synth/annotations.json --report eval.md
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    workers = default_workers()

    p = sub.add_parser("pretrain-gen", help="Generate masked input / pseudo-color target pairs")
    p.add_argument("-i", "--input", help="Directory of grayscale images")
    p.add_argument("-o", "--output", help="Output directory")
    p.add_argument(
        "-c",
        "--colormap",
        help=f"One of {', '.join(COLORMAP_NAMES)}, '{NO_COLORMAP}' or a LUT CSV path",
    )
    p.add_argument("--target", choices=TARGET_KINDS, help="Target kind (default: colormap)")
    p.add_argument("-j", "--workers", type=int, help=f"Worker threads (default: {workers})")
    _add_mask_arguments(p)
    p.set_defaults(func=run_pretrain_gen)

    targets = sub.add_parser("targets", help="Encode or decode centroid heatmap targets")
    targets_sub = targets.add_subparsers(dest="action", required=True)

    p = targets_sub.add_parser("encode", help="Annotations to target map PFMs")
    p.add_argument("-a", "--annotations", required=True, help="Annotations JSON")
    p.add_argument("-o", "--output", required=True, help="Output directory")
    p.add_argument("--config", metavar="FILE", help="JSON pipeline config")
    p.add_argument(
        "--reference-side", type=int, help=f"Size normalization side (default: {REFERENCE_SIDE})"
    )
    p.add_argument("-j", "--workers", type=int, help=f"Worker threads (default: {workers})")
    p.set_defaults(func=run_targets_encode)

    p = targets_sub.add_parser("decode", help="Target map PFMs to detections JSON")
    p.add_argument("-m", "--maps", required=True, help="Maps PFM or directory of them")
    p.add_argument("-o", "--output", required=True, help="Detections JSON")
    p.add_argument("--config", metavar="FILE", help="JSON pipeline config")
    p.add_argument(
        "-t", "--threshold", type=float, help=f"Heatmap threshold (default: {HEATMAP_THRESHOLD})"
    )
    p.add_argument(
        "--reference-side",
        type=int,
        help="Reference side for maps without a sidecar value "
        f"(default: {REFERENCE_SIDE})",
    )
    p.add_argument(
        "--image-size",
        type=int,
        nargs=2,
        metavar=("HEIGHT", "WIDTH"),
        help="Scale sizes by this image size (default: the maps' reference side)",
    )
    p.set_defaults(func=run_targets_decode)

    p = sub.add_parser("eval", help="COCO box AP of detections against annotations")
    p.add_argument("-d", "--detections", required=True)
    p.add_argument("-a", "--annotations", required=True)
    p.add_argument("--csv", metavar="FILE", help="Per-image TP/FP/FN CSV")
    p.add_argument("--report", metavar="FILE", help="Markdown report")
    p.set_defaults(func=run_eval)

    p = sub.add_parser("eval-maps", help="SSIM, MSE and mIoU of two PFM rasters")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--heatmap", action="store_true", help="Also report heatmap mIoU")
    p.add_argument("-t", "--threshold", type=float, default=HEATMAP_THRESHOLD)
    p.set_defaults(func=run_eval_maps)

    p = sub.add_parser("synth", help="Synthetic cell images with annotations")
    p.add_argument("--spec", metavar="FILE", help="Synth spec JSON")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-n", "--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("-j", "--workers", type=int, default=workers)
    p.set_defaults(func=run_synth)

    colormap = sub.add_parser("colormap", help="Colormap previews and LUT export")
    colormap_sub = colormap.add_subparsers(dest="action", required=True)

    p = colormap_sub.add_parser("preview", help="Gradient strip PNG and brightness CSV")
    p.add_argument("name", nargs="?", help="Colormap (prompted when omitted)")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--height", type=int, default=32)
    p.set_defaults(func=run_colormap_preview)

    p = colormap_sub.add_parser("export", help="Write the built-in LUTs as CSV")
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=run_colormap_export)

    mask = sub.add_parser("mask", help="Mask previews")
    mask_sub = mask.add_subparsers(dest="action", required=True)
    p = mask_sub.add_parser("preview", help="Mask PNG, white = masked")
    p.add_argument("-o", "--output", required=True, help="Output PNG")
    p.add_argument("--image", help="Also write this image with the mask applied")
    p.add_argument("--height", type=int, default=REFERENCE_SIDE)
    p.add_argument("--width", type=int, default=REFERENCE_SIDE)
    _add_mask_arguments(p)
    p.set_defaults(func=run_mask_preview)

    context = sub.add_parser("context", help="ContextBlock forward pass")
    context_sub = context.add_subparsers(dest="action", required=True)
    p = context_sub.add_parser("forward", help="Stack to per-slice 3-channel PFMs")
    p.add_argument("volume", help="Multi-page TIFF or directory of slices")
    p.add_argument("-w", "--weights", required=True, help="Weights JSON")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-j", "--workers", type=int, default=workers)
    p.set_defaults(func=run_context_forward)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        # a bad PSEUDOCELL_WORKERS value is caught while building defaults
        parser = build_parser()
        args = parser.parse_args(argv)
    except PseudocellError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    setup_logging(args.verbose)

    try:
        summary = args.func(args)
    except PseudocellError as e:
        logger.error(Highlight.Convert(str(e), Highlight.RED))
        return e.exit_code
    except OSError as e:
        logger.error(Highlight.Convert(f"{e.filename or ''}: {e.strerror or e}", Highlight.RED))
        return 1
    except Exception:
        logger.exception(Highlight.Convert("internal error", Highlight.RED))
        return 2

    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
