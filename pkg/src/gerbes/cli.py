"""Command-line front end.

    gerbes <command> SCENARIO.json [--json] [--tolerance T] [--seed S] [--partition hat|flat]

Exit codes: 0 success, 2 invalid input or failed validation, 3 mathematical
obstruction (for example a non-trivial class), 4 unreadable file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .cech import SOLVER_TOL, CxValue, check_cocycle, is_class_trivial
from .connection import build_connection, check_deligne, curvature_three_form
from .errors import GerbeError, ObstructionError, ValidationError
from .fibered import FiberedCochain, closedness, delta, patch_primitive
from .gerbe import brute_force_lift, dd_cocycle, lift_exists, trivialize
from .holonomy import HOLONOMY_TOL, ball_boundary_check, surface_holonomy, wzw
from .io import (
    Scenario,
    cochain_from_json,
    covering_from_json,
    cxcochain_to_json,
    dumps,
    fibered_from_json,
    fibered_to_json,
    key_of,
    load_scenario,
    rounded,
)
from .pathgroupoid import GROUPOID_TOL, PathGroupoid

EXIT_OK, EXIT_INVALID, EXIT_OBSTRUCTION, EXIT_IO = 0, 2, 3, 4


class CheckFailed(ValidationError):
    """A verification report came back failing."""


def _phase_report(log_value: complex) -> dict:
    turns = math.remainder(log_value.imag, 2 * math.pi) / (2 * math.pi)
    guess = Fraction(turns).limit_denominator(64)
    return {
        "log_modulus": rounded(log_value.real),
        "angle": rounded(turns * 2 * math.pi),
        "turns": rounded(turns),
        "turns_fraction": f"{guess.numerator}/{guess.denominator}",
    }


def _deligne(scn: Scenario, args):
    d = scn.deligne()
    if d is None:
        d = build_connection(scn.gerbe().g, partition=args.partition or scn.partition)
    return d


def cmd_check(scn: Scenario, args) -> dict:
    tol = args.tolerance or SOLVER_TOL
    gp = scn.gerbe()
    residual = check_cocycle(gp.g, tol)
    report = check_deligne(_deligne(scn, args), tol)
    out = {"cocycle_residual": rounded(residual), "deligne": report.as_dict(), "passed": report.passed}
    if not report.passed:
        raise CheckFailed(str(report), out)
    return out


def cmd_dd_class(scn: Scenario, args) -> dict:
    cls = dd_cocycle(scn.gerbe())
    trivial, _ = is_class_trivial(cls)
    return {
        "class_vector": list(cls.class_vector),
        "cocycle": {key_of(s): n for s, n in cls.as_dict().items()},
        "trivial": trivial,
    }


def cmd_trivialize(scn: Scenario, args) -> dict:
    clutching = trivialize(scn.gerbe())
    return {"residual": rounded(clutching.residual), "rho": cxcochain_to_json(clutching.rho)}


def cmd_lift(scn: Scenario, args) -> dict:
    ext = scn.extension()
    pb = scn.bundle(ext)
    result = lift_exists(ext, pb, scn.lift_choice())
    trivial, _ = is_class_trivial(result.dd_class)
    out = {
        "exists": result.exists,
        "class_vector": list(result.dd_class.class_vector),
        "class_trivial": trivial,
    }
    if result.exists:
        out["cocycle_residual"] = rounded(result.residual)
    if scn.options.get("oracle"):
        out["oracle_exists"] = brute_force_lift(ext, pb) is not None
    return out


def cmd_delta_primitive(scn: Scenario, args) -> dict:
    doc = scn.doc.get("fibered")
    if doc is None:
        raise ValidationError("scenario has no 'fibered' payload")
    covering = covering_from_json(scn.cover, doc)
    if "random_closed" in doc:
        spec = doc["random_closed"]
        rng = np.random.default_rng(scn.seed if args.seed is None else args.seed)
        u = FiberedCochain.random(covering, int(spec["arity"]) - 1, int(spec.get("degree", 0)), rng)
        w = delta(u)
    else:
        w = fibered_from_json(covering, doc["cochain"])
    tol = args.tolerance or SOLVER_TOL
    rho = patch_primitive(w, partition=args.partition or scn.partition, tol=tol)
    return {
        "arity": w.p,
        "degree": w.q,
        "closedness": rounded(closedness(w)),
        "residual": rounded((delta(rho) - w).norm()),
        "primitive": fibered_to_json(rho),
    }


def cmd_holonomy(scn: Scenario, args) -> dict:
    d = _deligne(scn, args)
    sigma = scn.surface()
    out = {"holonomy": _phase_report(surface_holonomy(d, sigma).log)}
    ball = scn.ball()
    if ball is not None:
        check = ball_boundary_check(d, ball)
        out["exp_integral"] = _phase_report(check.volume.log)
        out["ball_error"] = rounded(check.error)
        out["ball_passed"] = check.passed(args.tolerance or HOLONOMY_TOL)
    return out


def cmd_wzw(scn: Scenario, args) -> dict:
    omega = curvature_three_form(_deligne(scn, args))
    sigma = scn.surface()
    value = wzw(sigma, omega, args.tolerance or HOLONOMY_TOL)
    return {"wzw": _phase_report(value.log)}


def cmd_groupoid(scn: Scenario, args) -> dict:
    doc = scn.doc.get("groupoid")
    if doc is None:
        raise ValidationError("scenario has no 'groupoid' payload")
    f = cochain_from_json(scn.complex, doc["f"])
    G = PathGroupoid(scn.complex, f, args.tolerance or GROUPOID_TOL)

    def element(e):
        z = e.get("z", [0.0, 0.0])
        return G.element(e["path"], CxValue(float(z[0]), float(z[1])))

    a = element(doc["a"])
    out = {"a_canonical": _element_report(G.canonical(a))}
    if "b" in doc:
        b = element(doc["b"])
        ratio = G.ratio(a, b)
        out["equal"] = G.equal(a, b)
        out["ratio"] = [rounded(ratio.log_modulus), rounded(ratio.angle)]
    if "basepoint" in doc:
        triv = G.trivialize_at(doc["basepoint"])
        y, z, lam = triv.decompose(a)
        out["trivialization"] = {
            "source": y,
            "target": z,
            "scalar": [rounded(lam.log_modulus), rounded(lam.angle)],
            "round_trip": G.equal(triv.compose(y, z, lam), a),
        }
    return out


def _element_report(e) -> dict:
    return {"path": list(e.path.vertices), "z": [rounded(e.z.log_modulus), rounded(e.z.angle)]}


COMMANDS: dict[str, Callable[[Scenario, argparse.Namespace], dict]] = {
    "check": cmd_check,
    "dd-class": cmd_dd_class,
    "trivialize": cmd_trivialize,
    "lift": cmd_lift,
    "delta-primitive": cmd_delta_primitive,
    "holonomy": cmd_holonomy,
    "wzw": cmd_wzw,
    "groupoid": cmd_groupoid,
}


def _render_text(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, (dict, list)) and len(json.dumps(value)) > 200:
            value = f"<{type(value).__name__} with {len(value)} entries; use --json>"
        elif isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, ensure_ascii=False)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gerbes", description="Bundle gerbes on simplicial complexes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("scenario", help="scenario JSON file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--partition", choices=["hat", "flat"], default=None)
    return parser


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    status, error = EXIT_OK, None
    report: dict = {}
    try:
        scn = load_scenario(args.scenario)
        if args.seed is not None:
            scn.options["seed"] = args.seed
        report = COMMANDS[args.command](scn, args)
    except OSError as err:
        status, error = EXIT_IO, err
    except ObstructionError as err:
        status, error = EXIT_OBSTRUCTION, err
    except CheckFailed as err:
        status, error = EXIT_INVALID, err
        report = err.args[1]
    except (GerbeError, KeyError, TypeError, ValueError, IndexError, NotImplementedError) as err:
        status, error = EXIT_INVALID, err
    if error is not None:
        report = {**report, "error": type(error).__name__, "message": str(error.args[0] if error.args else error)}
    payload = {"command": args.command, "status": status, **report}
    if args.json:
        print(dumps(payload), file=out)
    else:
        print(_render_text(report), file=out)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
