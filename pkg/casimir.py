"""
Sphere-sphere Casimir calculator - command-line entry point
Force and force gradient beyond the proximity force approximation
"""

import argparse
import asyncio
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from assembly import sweep_async, write_csv, write_json
from config import (CLASSICAL_MODES, BOUNDARIES, PRESCRIPTIONS, config_from_dict,
                    default_output_path, read_config_dict)
from de_tables import DEFAULT_CSV, export_tables_csv
from errors import CasimirError
from service import MODE_FILTERS, casimir_service

load_dotenv()

logger = logging.getLogger(__name__)


def _configure_logging(verbose: int):
    level = logging.DEBUG if verbose else os.getenv("CASIMIR_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run configuration; flags override its keys")
    p.add_argument("--R1", type=float, help="Radius of sphere 1 [um]")
    p.add_argument("--R2", help="Radius of sphere 2 [um], 'inf' for a plate")
    p.add_argument("--temperature", type=float, help="Temperature [K]")
    p.add_argument("--prescription", choices=PRESCRIPTIONS)
    p.add_argument("--boundary", choices=BOUNDARIES, help="grounded or isolated spheres")
    p.add_argument("--omega-p", type=float, nargs="+", help="Plasma frequency [eV], one or two values")
    p.add_argument("--gamma", type=float, help="Drude relaxation [eV]")
    p.add_argument("--classical-mode", choices=CLASSICAL_MODES)
    p.add_argument("--decimation", help="'auto', 'off' or P1,P2")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="Casimir force between two metallic spheres beyond PFA")
    p.add_argument("-v", "--verbose", action="count", default=0, help="Debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("pp", help="Slab-slab free energy, pressure and G")
    pp.add_argument("--gap", type=float, required=True, help="Separation [um]")
    pp.add_argument("--modes", choices=sorted(MODE_FILTERS), default="all")
    pp.add_argument("--temperature", type=float)
    pp.add_argument("--prescription", choices=PRESCRIPTIONS, default="drude")
    pp.add_argument("--omega-p", type=float, nargs="+")
    pp.add_argument("--gamma", type=float)

    for name, text in (("classical", "Zero-frequency force and gradient"),
                       ("weights", "Zero-frequency weights w and w_tilde at one separation"),
                       ("deviation", "Force, gradient and deviation from PFA at one separation")):
        cmd = sub.add_parser(name, help=text)
        _add_model_flags(cmd)
        cmd.add_argument("--gap", type=float, help="Separation [um]")

    sw = sub.add_parser("sweep", help="Deviation from PFA over a range of separations")
    _add_model_flags(sw)
    sw.add_argument("--start", type=float, help="Smallest separation [um]")
    sw.add_argument("--stop", type=float, help="Largest separation [um]")
    sw.add_argument("--points", type=int)
    sw.add_argument("--linear", action="store_true", help="Linear instead of logarithmic spacing")
    sw.add_argument("--output", help="Output file")
    sw.add_argument("--format", choices=("csv", "json"))

    tb = sub.add_parser("tables", help="Export the derivative-expansion tables to CSV")
    tb.add_argument("--output", default=str(DEFAULT_CSV))
    return p


def _omega(values: Optional[List[float]]):
    if values is None:
        return None
    return values[0] if len(values) == 1 else values[:2]


def merged_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Config file mapping with command-line flags applied on top"""
    data = read_config_dict(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "R1_um": args.R1, "R2_um": args.R2, "temperature_K": args.temperature,
        "prescription": args.prescription, "boundary": args.boundary,
        "omega_p_eV": _omega(args.omega_p), "gamma_eV": args.gamma,
        "classical_mode": args.classical_mode, "workers": args.workers,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})

    if args.decimation is not None:
        text = args.decimation.strip().lower()
        if "," in text:
            p1, p2 = text.split(",", 1)
            data["decimation"] = {"p1": int(p1), "p2": int(p2)}
        else:
            data["decimation"] = text

    if getattr(args, "gap", None) is not None:
        data.pop("sweep", None)
        data["gap_um"] = args.gap

    if args.command == "sweep":
        spec = dict(data.get("sweep", {}))
        for key, value in (("start_um", args.start), ("stop_um", args.stop),
                           ("points", args.points)):
            if value is not None:
                spec[key] = value
        if args.linear:
            spec["log"] = False
        if spec:
            data["sweep"] = spec
            data.pop("gap_um", None)
        output = dict(data.get("output", {}))
        if args.output:
            output["path"] = args.output
        if args.format:
            output["format"] = args.format
        if output:
            data["output"] = output
    return data


def _print(payload: Dict[str, Any]):
    print(json.dumps(payload, ensure_ascii=False, indent=2, default=str))


async def run_sweep(data: Dict[str, Any]) -> int:
    config = config_from_dict(data)
    rows = await sweep_async(config)
    path = default_output_path(config)
    if config.output_format == "json":
        write_json(rows, path, config)
    else:
        write_csv(rows, path)
    failed = [row for row in rows if not row.ok]
    print(f"✅ {len(rows) - len(failed)}/{len(rows)} separations written to {path}")
    for row in failed:
        print(f"❌ a={row.a:.4g} um: {row.error}")
    return 0 if not failed else 1


async def run_command(args: argparse.Namespace) -> int:
    if args.command == "tables":
        path = export_tables_csv(args.output)
        print(f"✅ Tables written to {path}")
        return 0

    if args.command == "pp":
        params = {"a_um": args.gap, "modes": args.modes, "prescription": args.prescription}
        for key, value in (("temperature_K", args.temperature), ("gamma_eV", args.gamma),
                           ("omega_p_eV", _omega(args.omega_p))):
            if value is not None:
                params[key] = value
        result = await casimir_service.planar(params)
    elif args.command == "sweep":
        return await run_sweep(merged_config(args))
    elif args.command == "classical":
        result = await casimir_service.classical(merged_config(args))
    elif args.command == "weights":
        result = await casimir_service.weights(merged_config(args))
    else:
        result = await casimir_service.deviation(merged_config(args))

    _print(result)
    return 0 if result.get("success") else 1


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return asyncio.run(run_command(args))
    except CasimirError as e:
        logger.error(str(e))
        print(f"❌ {e}")
        return 2
    except ValueError as e:
        print(f"❌ Invalid argument: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
