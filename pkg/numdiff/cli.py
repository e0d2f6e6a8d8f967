# ./numdiff/cli.py

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Callable, Dict, List, Optional

from ansible.utils.display import Display

from numdiff.module_utils.common.command import CommandExit, RC_CONFIG
from numdiff.modules.experiment import compare, eta_sweep
from numdiff.modules.signal import differentiate, generate

display = Display()

COMMANDS: Dict[str, Callable[[Dict[str, Any]], None]] = {
    "generate": generate.run_module,
    "compare": compare.run_module,
    "eta-sweep": eta_sweep.run_module,
    "differentiate": differentiate.run_module,
}


def _add_experiment_flags(parser: argparse.ArgumentParser, parallel: bool) -> None:
    parser.add_argument("--config", required=True, help="Experiment descriptor (YAML)")
    if parallel:
        parser.add_argument("--jobs", type=int, default=1,
                            help="Runs computed in parallel (default: 1)")
    parser.add_argument("--seed", type=int, help="Use this single noise seed")
    parser.add_argument("--output", help="Override output_dir of the descriptor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numdiff",
        description="Real-time numerical differentiation of sampled signals: "
                    "backward difference, Savitzky-Golay, high-gain observers and "
                    "adaptive input estimation.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="More output, repeat up to -vvvv")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_experiment_flags(sub.add_parser("generate", help="Write clean and noisy signal CSVs"),
                          parallel=False)
    _add_experiment_flags(sub.add_parser("compare", help="Relative RMSE of every algorithm"),
                          parallel=True)
    _add_experiment_flags(sub.add_parser("eta-sweep", help="AIE/NSE accuracy versus V1 = eta I"),
                          parallel=True)

    diff = sub.add_parser("differentiate", help="Differentiate one CSV signal")
    diff.add_argument("--input", required=True, help="Signal CSV with header t,y")
    diff.add_argument("--algorithm", required=True,
                      choices=["bd", "sg", "hgo1", "hgo2", "nse", "sse", "ase"])
    diff.add_argument("--derivative-order", type=int, choices=[1, 2], default=1)
    diff.add_argument("--aie-preset", help="AIE parameter set")
    diff.add_argument("--v2", type=float, help="Sensor noise covariance for nse/sse")
    diff.add_argument("--output", help="Output CSV")
    return parser


def _json_default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and print its result as JSON

    Returns:
        int: 0 on success, 2 when some runs failed, 1 on configuration errors
    """
    args = build_parser().parse_args(argv)
    display.verbosity = args.verbose
    params = {key: value for key, value in vars(args).items() if key not in ("command", "verbose")}

    try:
        COMMANDS[args.command](params)
        result = {"changed": False, "failed": True, "msg": f"{args.command} returned no result", "rc": RC_CONFIG}
    except CommandExit as e:
        result = e.result
    except Exception as e:
        result = {"changed": False, "failed": True, "msg": f"{args.command} failed: {e}", "rc": RC_CONFIG}

    if result.get("failed") and result.get("rc") == RC_CONFIG:
        display.error(result["msg"])
    print(json.dumps(_finite(result), indent=2, default=_json_default))
    return int(result.get("rc", 0))


if __name__ == "__main__":
    sys.exit(main())
