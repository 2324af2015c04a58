"""Defines the command-line surface: the argument parser and the output writers.

Every subcommand shares the rule, seed, output and logging flags; the remaining
flags belong to one subcommand each. Results are written to standard output as
JSON, or as CSV where a table is natural.
"""

import argparse
import csv
import io
import json
import math
from typing import Any, Dict, Optional

from app.analysis.scan import STAIRCASE_FIELDS
from app.exceptions import NumericalError
from app.schemas import RunConfig, load_json_argument


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run options")
    group.add_argument("--n", type=int, help="Half-dimension n; inferred from the body when omitted.")
    group.add_argument("--radial", type=int, help="Gauss-Legendre points per radial Hopf coordinate.")
    group.add_argument("--angular", type=int, help="Trapezoid points per Hopf angle (even).")
    group.add_argument("--mc-samples", type=int, help="Use a Monte-Carlo rule with this many nodes.")
    group.add_argument("--seed", type=int, help="Seed of every random generator.")
    group.add_argument("--output", choices=("json", "csv"), help="Output format (default json).")
    group.add_argument("--threads", type=int, help="Worker cap for parallel sections.")
    group.add_argument("--tol", type=float, help="Override of the command's primary tolerance.")
    group.add_argument("--log-level", help="Logging level on standard error (default WARNING).")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Builds the parser with one subparser per command."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="meanwidth",
        description="Mean widths of convex bodies in R^2n and their symplectic positions.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    def body_command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--body", required=True, help="Body spec as inline JSON or a path to a JSON file.")
        return sub

    body_command("mean-width", "Mean width of a body.")
    body_command("msp", "Williamson invariants and minimal mean width of an ellipsoid.")

    optimize = body_command("optimize", "Multi-start descent over symmetric symplectic positions.")
    optimize.add_argument("--starts", type=int, help="Number of random starts.")

    variation = body_command("variation", "Finite-difference variations of M along a Hamiltonian flow.")
    variation.add_argument("--ham", required=True, help="Hamiltonian spec as inline JSON or a path.")
    variation.add_argument("--h-step", type=float, help="Step of the first central difference.")
    variation.add_argument("--h2-step", type=float, help="Step of the second central difference.")
    variation.add_argument("--boundary-samples", type=int, help="Boundary samples per radial coordinate.")
    variation.add_argument("--angular-refine", type=int, help="Odd refinement of the rule's angle grid.")

    staircase = commands.add_parser("staircase", parents=[common], help="Staircase comparison for E(1, sqrt(a)).")
    staircase.add_argument("--from", dest="a_from", type=float, help="First value of a (default 1).")
    staircase.add_argument("--to", dest="a_to", type=float, help="Last value of a (default 6.5).")
    staircase.add_argument("--steps", type=int, help="Number of equispaced values (default 101).")
    staircase.add_argument("--optimize", action="store_true", default=None, help="Bound M_Sp by descent.")
    staircase.add_argument("--starts", type=int, help="Random starts per row with --optimize.")

    ramos = commands.add_parser("ramos", parents=[common], help="Mean-width chain of the Ramos domains.")
    ramos.add_argument("--samples", type=int, help="Samples of the boundary curve of Omega_0.")

    body_command("criteria", "Criticality diagnostics of a body.")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Turns parsed arguments into a RunConfig; unset flags take the settings defaults.

    Raises:
        SpecError: If a JSON argument or a flag value is invalid.
    """
    values: Dict[str, Any] = {}
    for key, value in vars(args).items():
        if value is None:
            continue
        if key in ("body", "ham"):
            value = load_json_argument(value, key)
        values[key] = value
    # The staircase is a table; it defaults to CSV.
    if values.get("command") == "staircase":
        values.setdefault("output", "csv")
    return RunConfig.build(**values)


def _csv_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NumericalError(f"Result holds the non-finite value {value}")
        return f"{value:.12g}"
    if isinstance(value, (int, str)):
        return str(value)
    return render_json(value, indent=None)


def render_json(result: Any, indent: Optional[int] = 2) -> str:
    """JSON text of a result.

    Raises:
        NumericalError: If the result holds NaN or an infinity, which JSON cannot carry.
    """
    try:
        return json.dumps(result, indent=indent, separators=None if indent else (",", ":"), allow_nan=False)
    except ValueError as e:
        raise NumericalError(f"Result holds a non-finite value: {e}") from e


def render_csv(result: Dict[str, Any]) -> str:
    """CSV text: staircase rows under their header, other results as key,value pairs.

    The resolved config leads as a `# config` comment line.
    """
    buffer = io.StringIO()
    buffer.write("# config " + render_json(result["config"], indent=None) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    rows: Optional[list] = result.get("rows")
    if rows is not None:
        writer.writerow(STAIRCASE_FIELDS)
        writer.writerows([_csv_value(row[name]) for name in STAIRCASE_FIELDS] for row in rows)
    else:
        writer.writerow(("key", "value"))
        writer.writerows((key, _csv_value(value)) for key, value in result.items() if key != "config")
    return buffer.getvalue()


def render(result: Dict[str, Any], output: str) -> str:
    return render_csv(result) if output == "csv" else render_json(result)
