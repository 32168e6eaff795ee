"""High-level circuit analysis facade shared by the CLI and the server.

Owns the one-time symbolic preparation for a circuit and exposes the
user-facing quantities.  Sweep points are independent; set CIRCUITQ_THREADS
to evaluate them on a thread pool (output order stays deterministic).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from math import pi
from typing import Mapping, Sequence

import numpy as np

from .hamiltonian import HermitianOperator, build_hamiltonian, eigenenergies
from .netlist import (
    Circuit,
    ReducedCircuit,
    binding_points,
    normalize_bindings,
    parse_netlist,
    reduce_nodes,
)
from .quantize import (
    ComponentPhasor,
    Quantity,
    QuantizedModes,
    component_zpf,
    f_k_A_chi,
    format_f_k_a_chi_table,
    frequency_gradient,
    quantize,
)
from .spectrum import DEFAULT_CONFIG, ModeSet, SolverConfig, find_modes, topology_of


def _thread_count() -> int:
    raw = os.environ.get("CIRCUITQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_points(fn, points: Sequence[Mapping[str, float]]) -> list:
    """Apply ``fn`` to each binding point, optionally on a thread pool."""
    workers = _thread_count()
    if workers == 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))


class CircuitAnalysis:
    """A circuit plus cached symbolic preparation and solver settings."""

    def __init__(self, circuit: Circuit, cfg: SolverConfig = DEFAULT_CONFIG):
        circuit.validate()
        self.circuit = circuit
        self.cfg = cfg
        self.rc: ReducedCircuit = reduce_nodes(circuit)

    @classmethod
    def from_netlist(
        cls, text: str, cfg: SolverConfig = DEFAULT_CONFIG
    ) -> "CircuitAnalysis":
        return cls(parse_netlist(text), cfg)

    def warm_up(self) -> None:
        topology_of(self.rc).warm_up()

    # -- linear quantities ---------------------------------------------
    def modes(self, bindings: Mapping[str, object] | None = None):
        return find_modes(self.rc, bindings, self.cfg)

    def eigenfrequencies(self, bindings=None) -> np.ndarray:
        result = self.modes(bindings)
        if isinstance(result, ModeSet):
            return result.eigenfrequencies_hz
        return _stack([m.eigenfrequencies_hz for m in result])

    def loss_rates(self, bindings=None) -> np.ndarray:
        result = self.modes(bindings)
        if isinstance(result, ModeSet):
            return result.loss_rates_hz
        return _stack([m.loss_rates_hz for m in result])

    # -- quantum quantities --------------------------------------------
    def quantized(self, bindings=None) -> QuantizedModes:
        return quantize(self.rc, bindings, self.cfg)

    def anharmonicities(self, bindings=None) -> np.ndarray:
        return self.f_k_A_chi(bindings)[2]

    def kerr(self, bindings=None) -> np.ndarray:
        return self.f_k_A_chi(bindings)[3]

    def f_k_A_chi(self, bindings=None, pretty: bool = False):
        normalized, sweep_len = normalize_bindings(
            self.rc.free_parameters(), bindings or {}
        )
        if sweep_len is None or _thread_count() == 1:
            return f_k_A_chi(self.rc, bindings, pretty, self.cfg)
        if pretty:
            raise ValueError("pretty printing needs scalar bindings")
        topology_of(self.rc).warm_up()
        points = binding_points(normalized, sweep_len)
        results = map_points(lambda p: quantize(self.rc, p, self.cfg), points)
        counts = {r.mode_count for r in results}
        if len(counts) != 1:
            from .errors import AnalysisError

            raise AnalysisError(
                f"mode count changes across the sweep ({sorted(counts)})"
            )
        m = counts.pop()
        n = len(results)
        f = np.empty((m, n))
        k = np.empty((m, n))
        a = np.empty((m, n))
        chi = np.empty((m, m, n))
        for i, r in enumerate(results):
            f[:, i] = [z.real for z in r.zetas]
            k[:, i] = [2 * z.imag for z in r.zetas]
            a[:, i] = r.a_total
            chi[:, :, i] = r.chi
        return f / (2 * pi), k / (2 * pi), a, chi

    def pretty_report(self, bindings=None) -> str:
        return self.f_k_A_chi(bindings, pretty=True)

    def hamiltonian(
        self,
        bindings=None,
        modes: Sequence[int] = (0,),
        excitations: Sequence[int] = (6,),
        taylor: int = 4,
    ) -> HermitianOperator:
        return build_hamiltonian(
            self.rc, bindings, modes=modes, excitations=excitations,
            taylor=taylor, cfg=self.cfg,
        )

    def eigenenergies(self, bindings=None, **kwargs) -> np.ndarray:
        return eigenenergies(self.hamiltonian(bindings, **kwargs))

    def normal_mode_phasors(
        self, bindings=None, mode: int = 0, quantity: Quantity | str = "voltage"
    ) -> list[ComponentPhasor]:
        q = self.quantized(bindings)
        return [
            component_zpf(
                self.rc, mode, i, quantity, bindings, self.cfg, quantized=q
            )
            for i in range(len(self.rc.elements))
        ]

    def frequency_gradient(self, bindings, param: str, delta=None) -> np.ndarray:
        return frequency_gradient(self.rc, bindings, param, delta, self.cfg)

    # -- reporting -------------------------------------------------------
    def report_dict(self, bindings=None) -> dict:
        """Scalar-binding report matching the JSON export schema."""
        q = self.quantized(bindings)
        f = [z.real / (2 * pi) for z in q.zetas]
        k = [2 * z.imag / (2 * pi) for z in q.zetas]
        return {
            "modes": [
                {"f_Hz": f[m], "k_Hz": k[m], "A_Hz": float(q.a_total[m])}
                for m in range(q.mode_count)
            ],
            "chi_Hz": [[float(x) for x in row] for row in q.chi],
            "warnings": [d.message for d in q.diagnostics if d.unexpected],
        }


def _stack(rows: list[np.ndarray]) -> np.ndarray:
    counts = {len(r) for r in rows}
    if len(counts) != 1:
        from .errors import AnalysisError

        raise AnalysisError(
            f"mode count changes across the sweep ({sorted(counts)})"
        )
    return np.stack(rows, axis=1)


def sweep_csv(
    param: str,
    values: np.ndarray,
    f: np.ndarray,
    k: np.ndarray,
    a: np.ndarray,
    chi: np.ndarray,
) -> str:
    """One row per sweep point: param, f_m, k_m, A_m, then chi_mn (m<n)."""
    m = f.shape[0]
    header = (
        [param]
        + [f"f{i}" for i in range(m)]
        + [f"k{i}" for i in range(m)]
        + [f"A{i}" for i in range(m)]
        + [f"chi{i}{j}" for i in range(m) for j in range(i + 1, m)]
    )
    lines = [",".join(header)]
    for p in range(f.shape[1]):
        row = [repr(float(values[p]))]
        row += [repr(float(f[i, p])) for i in range(m)]
        row += [repr(float(k[i, p])) for i in range(m)]
        row += [repr(float(a[i, p])) for i in range(m)]
        row += [
            repr(float(chi[i, j, p])) for i in range(m) for j in range(i + 1, m)
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
