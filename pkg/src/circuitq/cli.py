"""Batch front-end: mode reports, sweeps, Hamiltonians, mode phasors,
and the node-scaling benchmark.

Exit codes: 0 success, 1 analysis error, 2 usage error (including unbound
parameters).  With ``--format json`` errors are emitted as machine-parsable
objects on stdout; warnings always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from math import pi

import numpy as np

from . import __version__
from .analysis import CircuitAnalysis, sweep_csv
from .errors import BindingError, CircuitQError, NetlistSyntaxError
from .hamiltonian import eigenenergies
from .netlist import parse_netlist
from .quantize import Quantity
from .spectrum import SolverConfig, topology_of

USAGE_ERROR = 2
ANALYSIS_ERROR = 1


def _parse_set(pairs: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise _UsageError(f"--set expects NAME=VALUE, got {pair!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise _UsageError(f"--set {name}: {value!r} is not a number") from None
    return out


def _parse_sweep(spec: str) -> tuple[str, np.ndarray]:
    name, sep, rng = spec.partition("=")
    if not sep or not name:
        raise _UsageError(f"--sweep expects NAME=START:STOP:COUNT, got {spec!r}")
    parts = rng.split(":")
    if len(parts) != 3:
        raise _UsageError(f"--sweep {name}: expected START:STOP:COUNT, got {rng!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise _UsageError(f"--sweep {name}: bad numbers in {rng!r}") from None
    if count < 2:
        raise _UsageError("--sweep needs at least 2 points")
    return name, np.linspace(start, stop, count)


class _UsageError(Exception):
    pass


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        root_relative_tolerance=args.root_tol,
        root_max_iterations=args.root_max_iter,
        q_min=args.q_min,
    )


def _load(args) -> CircuitAnalysis:
    with open(args.netlist, "r", encoding="utf-8") as fh:
        text = fh.read()
    return CircuitAnalysis(parse_netlist(text), _solver_config(args))


def _print_warnings(diagnostics) -> None:
    for d in diagnostics:
        if d.unexpected:
            print(f"warning: {d.stage}: {d.message}", file=sys.stderr)


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated integers") from None


def cmd_modes(args) -> int:
    analysis = _load(args)
    bindings = _parse_set(args.set)
    if args.format == "table":
        sys.stdout.write(analysis.f_k_A_chi(bindings, pretty=True))
        _print_warnings(analysis.quantized(bindings).diagnostics)
        return 0
    report = analysis.report_dict(bindings)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "json":
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:  # csv: single point, one row
        f, k, a, chi = analysis.f_k_A_chi(bindings)
        m = len(f)
        header = (
            [f"f{i}" for i in range(m)]
            + [f"k{i}" for i in range(m)]
            + [f"A{i}" for i in range(m)]
            + [f"chi{i}{j}" for i in range(m) for j in range(i + 1, m)]
        )
        row = (
            [repr(float(x)) for x in f]
            + [repr(float(x)) for x in k]
            + [repr(float(x)) for x in a]
            + [repr(float(chi[i][j])) for i in range(m) for j in range(i + 1, m)]
        )
        sys.stdout.write(",".join(header) + "\n" + ",".join(row) + "\n")
    return 0


def cmd_sweep(args) -> int:
    analysis = _load(args)
    bindings = _parse_set(args.set)
    name, values = _parse_sweep(args.sweep)
    bindings[name] = values
    f, k, a, chi = analysis.f_k_A_chi(bindings)
    if args.format == "json":
        out = {
            "sweep": {"name": name, "values": [float(v) for v in values]},
            "f_Hz": f.tolist(),
            "k_Hz": k.tolist(),
            "A_Hz": a.tolist(),
            "chi_Hz": chi.tolist(),
        }
        json.dump(out, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(sweep_csv(name, values, f, k, a, chi))
    return 0


def cmd_hamiltonian(args) -> int:
    analysis = _load(args)
    bindings = _parse_set(args.set)
    modes = _int_list(args.modes, "--modes")
    excitations = _int_list(args.excitations, "--excitations")
    if len(modes) != len(excitations):
        raise _UsageError("--modes and --excitations must have the same length")
    op = analysis.hamiltonian(
        bindings, modes=modes, excitations=excitations, taylor=args.taylor
    )
    energies = eigenenergies(op)
    if args.n_eigenenergies:
        energies = energies[: args.n_eigenenergies]
    if args.format == "json":
        json.dump({"eigenenergies_Hz": energies.tolist()}, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for e in energies:
            sys.stdout.write(f"{e!r}\n")
    return 0


def cmd_normal_mode(args) -> int:
    analysis = _load(args)
    bindings = _parse_set(args.set)
    quantity = Quantity(args.quantity)
    phasors = analysis.normal_mode_phasors(bindings, mode=args.mode, quantity=quantity)
    rows = []
    for p in phasors:
        e = analysis.rc.elements[p.element_id]
        rows.append(
            {
                "component_id": p.element_id,
                "kind": e.kind.value,
                "label": e.label,
                "node_minus": e.node_minus,
                "node_plus": e.node_plus,
                "re": p.value.real,
                "im": p.value.imag,
            }
        )
    if args.format == "json":
        json.dump(
            {"mode": args.mode, "quantity": quantity.value, "phasors": rows},
            sys.stdout,
            indent=2,
        )
        sys.stdout.write("\n")
    else:
        sys.stdout.write("component_id,kind,label,re,im\n")
        for r in rows:
            sys.stdout.write(
                f"{r['component_id']},{r['kind']},{r['label'] or ''},"
                f"{r['re']!r},{r['im']!r}\n"
            )
    return 0


def ladder_netlist(nodes: int, resistive: bool) -> str:
    """Transmon + coupling capacitor + LC ladder with the given node count.

    The ladder follows the multimode-resonator lumped equivalent used for
    scaling measurements; ``nodes`` counts circuit nodes after reduction.
    """
    if nodes < 4:
        raise _UsageError("the ladder needs at least 4 nodes")
    n_modes = nodes - 2
    f0 = 4.603e9
    w0 = f0 * 2.0 * pi
    z0 = 50.0
    c0 = pi / 4.0 / w0 / z0
    l0 = 4.0 * z0 / pi / w0
    lines = ["J 0 1 18.15e9 E", "C 0 1 5.13e-15", "C 1 2 40.3e-15"]
    for m in range(n_modes):
        lines.append(f"L {2 + m} {3 + m} {l0 / (2 * m + 1) ** 2!r}")
        lines.append(f"C {2 + m} {3 + m} {c0!r}")
        if resistive:
            lines.append(f"R {2 + m} {3 + m} 1e6")
    lines.append(f"W {2 + n_modes} 0")
    lines.append("G 0")
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    variants = {"no": (False,), "yes": (True,), "both": (False, True)}[args.resistive]
    sys.stdout.write("nodes,resistive,init_seconds\n")
    for nodes in range(args.min_nodes, args.max_nodes + 1):
        for resistive in variants:
            analysis = CircuitAnalysis(
                parse_netlist(ladder_netlist(nodes, resistive))
            )
            start = time.perf_counter()
            analysis.warm_up()
            elapsed = time.perf_counter() - start
            sys.stdout.write(f"{nodes},{int(resistive)},{elapsed:.6f}\n")
            sys.stdout.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circuitq",
        description="Analyze lumped-element superconducting circuits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, netlist=True):
        if netlist:
            p.add_argument("netlist", help="path to a netlist file")
        p.add_argument(
            "--set", action="append", default=[], metavar="NAME=VALUE",
            help="bind a free parameter (repeatable)",
        )
        p.add_argument("--q-min", type=float, default=1.0)
        p.add_argument("--root-tol", type=float, default=1e-11)
        p.add_argument("--root-max-iter", type=int, default=100)

    p = sub.add_parser("modes", help="mode frequencies, losses, Kerr report")
    common(p)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(fn=cmd_modes)

    p = sub.add_parser("sweep", help="sweep one parameter")
    common(p)
    p.add_argument("--sweep", required=True, metavar="NAME=START:STOP:COUNT")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("hamiltonian", help="eigenenergies of the truncated Hamiltonian")
    common(p)
    p.add_argument("--modes", default="0", help="comma-separated mode indices")
    p.add_argument(
        "--excitations", default="6", help="comma-separated Fock dimensions"
    )
    p.add_argument("--taylor", type=int, default=4)
    p.add_argument("--n-eigenenergies", type=int, default=0)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(fn=cmd_hamiltonian)

    p = sub.add_parser("normal-mode", help="per-component phasors of one mode")
    common(p)
    p.add_argument("--mode", type=int, default=0)
    p.add_argument(
        "--quantity",
        choices=tuple(q.value for q in Quantity),
        default="voltage",
    )
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_normal_mode)

    p = sub.add_parser("bench", help="topology-init time vs node count")
    p.add_argument("--min-nodes", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=14)
    p.add_argument("--resistive", choices=("no", "yes", "both"), default="both")
    p.set_defaults(fn=cmd_bench)

    return parser


def _emit_error(args, code: str, message: str) -> None:
    if getattr(args, "format", "") == "json":
        json.dump({"error": {"code": code, "message": message}}, sys.stdout)
        sys.stdout.write("\n")
    print(f"error: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as err:
        _emit_error(args, "file-not-found", str(err))
        return USAGE_ERROR
    except (_UsageError, BindingError) as err:
        _emit_error(args, "usage", str(err))
        return USAGE_ERROR
    except NetlistSyntaxError as err:
        _emit_error(args, "netlist-syntax", str(err))
        return ANALYSIS_ERROR
    except CircuitQError as err:
        _emit_error(args, "analysis", str(err))
        return ANALYSIS_ERROR


if __name__ == "__main__":
    sys.exit(main())
