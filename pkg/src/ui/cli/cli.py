# src/ui/cli/cli.py

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from config import load_settings
from src.core.errors import (
    AlphaportError,
    CharacteristicError,
    ConvergenceError,
    FitError,
)
from src.core.models.canonical import CANONICAL_NAMES, build_canonical
from src.core.models.characteristic import Characteristic
from src.core.models.circuit import Circuit, branch_label, validate
from src.core.services.alpha_analysis import alpha_solve, d_sweep, hardlimiter_limit
from src.core.services.ladder_analytics import ladder_result, summary_rows
from src.core.services.mesh_analysis import mesh_solve, phi_b6_closed_form, phi_meshes_from_nodes
from src.core.services.nodal_solver import solve_dc
from src.core.services.superposition import report
from src.core.services.sweep_service import sweep_alpha, sweep_v
from src.data.netlist_reader.characteristic_reader import parse_characteristic
from src.data.netlist_reader.netlist_loader import load_netlist
from src.data.report_writer.report_writer import write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for solver failures."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_circuit_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    source = p.add_mutually_exclusive_group(required=required)
    source.add_argument("--canonical", choices=CANONICAL_NAMES, help="built-in circuit")
    source.add_argument("--netlist", help="netlist file")
    p.add_argument("--sections", type=int, help="ladder sections N (with --canonical ladder)")
    p.add_argument("--central", action="store_true", help="add the a-b conductor to the ladder")


def _add_output_args(p: argparse.ArgumentParser, default: str = "json") -> None:
    p.add_argument("--format", choices=("json", "csv", "text"), default=default)
    p.add_argument("--meta", action="store_true", help="add a separate meta object (timestamp, version) to JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alphaport", description="Superposition analysis of nonlinear resistive one-ports.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="exact DC solution of an f-circuit")
    _add_circuit_args(p)
    p.add_argument("--f", help="characteristic D:alpha[,D:alpha...] (default: the netlist's .f)")
    p.add_argument("--vin", type=float, default=1.0)
    _add_output_args(p)

    p = sub.add_parser("alpha-test", help="phi(alpha) and d_k(alpha) of the alpha-circuit")
    _add_circuit_args(p)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--alpha", type=float)
    grid.add_argument("--alphas", type=_float_list, help="ascending grid: monotonicity sweep")
    p.add_argument("--hardlimiter", action="store_true", help="also report the alpha -> infinity limit")
    p.add_argument("--extrapolate", action="store_true", help="Richardson refinement of the hardlimiter limit")
    _add_output_args(p)

    p = sub.add_parser("superpose", help="F against the analytical superposition G")
    _add_circuit_args(p)
    p.add_argument("--f", help="characteristic D:alpha[,D:alpha...] (default: the netlist's .f)")
    p.add_argument("--vin", type=float, default=1.0)
    _add_output_args(p)

    p = sub.add_parser("ladder", help="closed-form infinite ladder: lambda and phi")
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--alpha", type=float)
    grid.add_argument("--alphas", type=_float_list)
    p.add_argument("--central", action="store_true")
    _add_output_args(p, default="csv")

    p = sub.add_parser("mesh", help="mesh-current (resistive) solve with a current source")
    _add_circuit_args(p)
    law = p.add_mutually_exclusive_group(required=True)
    law.add_argument("--alpha", type=float, help="resistive element v = i^alpha")
    law.add_argument("--f", help="resistive characteristic v = f(i) as D:alpha[,...]")
    p.add_argument("--iin", type=float, default=1.0)
    _add_output_args(p)

    p = sub.add_parser("sweep", help="grid of reports as a CSV table")
    _add_circuit_args(p, required=False)
    p.add_argument("--f", help="characteristic for --vgrid")
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--vgrid", type=_float_list)
    grid.add_argument("--alphas", type=_float_list)
    grid.add_argument("--summary", action="store_true", help="the reproducible rows of the summary table")
    _add_output_args(p, default="csv")
    return parser


def _load_circuit(args: argparse.Namespace) -> Circuit:
    if args.netlist:
        return load_netlist(args.netlist)
    params: Dict[str, Any] = {"central": args.central}
    if args.sections is not None:
        params["sections"] = args.sections
    return build_canonical(args.canonical, params)


def _characteristic(args: argparse.Namespace, circuit: Circuit) -> Characteristic:
    if args.f:
        return parse_characteristic(args.f)
    if circuit.characteristic is not None:
        return circuit.characteristic
    raise CharacteristicError("no characteristic: pass --f or add .f to the netlist")


def _log_validation(circuit: Circuit) -> List[str]:
    checked = validate(circuit)
    for message in checked.warnings():
        logger.warning("%s", message)
    return checked.warnings()


def _cmd_analyze(args: argparse.Namespace, workers: int) -> str:
    circuit = _load_circuit(args)
    f = _characteristic(args, circuit)
    warnings = _log_validation(circuit)
    solution = solve_dc(circuit, f, args.vin)
    branches = [
        {
            "branch": branch_label(solution.circuit, s),
            "weight": br.weight,
            "voltage": solution.branch_voltages[s],
            "current": solution.branch_currents[s],
        }
        for s, br in enumerate(solution.circuit.branches)
    ]
    payload = {
        "v_in": solution.v_in,
        "F": solution.input_current,
        "potentials": solution.potentials,
        "d": solution.d(),
        "branches": branches,
        "input_power": solution.input_power,
        "dissipated_power": solution.dissipated_power,
        "iterations": solution.iterations,
        "flipped": list(solution.flipped),
        "warnings": warnings,
    }
    return write_report(payload, "solution", args.format, args.meta, rows=branches)


def _cmd_alpha_test(args: argparse.Namespace, workers: int) -> str:
    circuit = _load_circuit(args)
    _log_validation(circuit)
    limit = hardlimiter_limit(circuit, args.extrapolate) if args.hardlimiter else None

    if args.alpha is not None:
        profile = alpha_solve(circuit, args.alpha)
        payload: Dict[str, Any] = {"alpha": profile.alpha, "phi": profile.phi, "d": profile.d}
        if limit is not None:
            payload["hardlimiter"] = limit
        return write_report(payload, "alpha_profile", args.format, args.meta)

    if not args.alphas:
        raise UsageError("alpha grid is empty")
    swept = d_sweep(circuit, args.alphas, workers)
    payload = {
        "alphas": swept.alphas,
        "sequences": swept.sequences,
        "verdicts": swept.verdicts,
        "violations": swept.violations,
    }
    if limit is not None:
        payload["hardlimiter"] = limit
    rows = sweep_alpha(circuit, args.alphas, workers)
    return write_report(payload, "d_sweep", args.format, args.meta, rows=rows)


def _cmd_superpose(args: argparse.Namespace, workers: int) -> str:
    circuit = _load_circuit(args)
    f = _characteristic(args, circuit)
    _log_validation(circuit)
    r = report(circuit, f, args.vin, workers)
    payload = {
        "v_in": r.v_in,
        "F": r.F,
        "G": r.G,
        "eta": r.eta,
        "eta_nonlinear": r.eta_nonlinear,
        "nonlinearity_degree": r.nonlinearity_degree,
        "bound": r.bound,
        "per_term": [{"alpha": t.alpha, "D": t.D, "phi": t.phi, "G_term": t.G_term} for t in r.per_term],
    }
    if r.bound_normalized:
        payload["bound_normalized"] = True
    return write_report(payload, "report", args.format, args.meta, rows=[r.as_row()])


def _cmd_ladder(args: argparse.Namespace, workers: int) -> str:
    alphas = [args.alpha] if args.alpha is not None else args.alphas
    if not alphas:
        raise UsageError("alpha grid is empty")
    rows = [ladder_result(a, args.central).as_row() for a in alphas]
    return write_report({"rows": rows}, "table", args.format, args.meta)


def _cmd_mesh(args: argparse.Namespace, workers: int) -> str:
    circuit = _load_circuit(args)
    f = Characteristic.power_law(args.alpha) if args.alpha is not None else parse_characteristic(args.f)
    solution = mesh_solve(circuit, f, args.iin)
    payload: Dict[str, Any] = {
        "i_in": solution.input_current,
        "v_in": solution.input_voltage,
        "mesh_currents": solution.mesh_currents,
        "phi_meshes": solution.phi_meshes,
    }
    if solution.phi_meshes is not None:
        alpha = f.exponents[0]
        payload["phi_from_nodes"] = phi_meshes_from_nodes(lambda a: alpha_solve(circuit, a).phi, alpha)
        if args.canonical == "fig_b1":
            payload["phi_closed_form"] = phi_b6_closed_form(alpha)
    return write_report(payload, "mesh", args.format, args.meta)


def _cmd_sweep(args: argparse.Namespace, workers: int) -> str:
    if args.summary:
        rows = summary_rows()
    else:
        if not (args.canonical or args.netlist):
            raise UsageError("sweep needs --canonical or --netlist")
        circuit = _load_circuit(args)
        _log_validation(circuit)
        if args.vgrid is not None:
            if not args.vgrid:
                raise UsageError("v_in grid is empty")
            rows = sweep_v(circuit, _characteristic(args, circuit), args.vgrid, workers)
        else:
            if not args.alphas:
                raise UsageError("alpha grid is empty")
            rows = sweep_alpha(circuit, args.alphas, workers)
    return write_report({"rows": rows}, "table", args.format, args.meta)


COMMANDS = {
    "analyze": _cmd_analyze,
    "alpha-test": _cmd_alpha_test,
    "superpose": _cmd_superpose,
    "ladder": _cmd_ladder,
    "mesh": _cmd_mesh,
    "sweep": _cmd_sweep,
}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """
    1) Parse arguments and settings.
    2) Dispatch to the subcommand, which returns the rendered report.
    3) Map failures to exit status: 1 for input problems, 2 for solver failures.
    """
    out = out if out is not None else sys.stdout
    try:
        settings = load_settings()
        logging.basicConfig(
            level=settings.log_level,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args, settings.workers)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, FitError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except (AlphaportError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    out.write(text)
    return EXIT_OK


def main() -> None:
    load_dotenv()
    sys.exit(run())


if __name__ == '__main__':
    main()
