"""Quantum parameters of the normal modes.

Turns the linear mode set into per-mode zero-point phase fluctuations,
per-junction anharmonicity contributions, the Kerr matrix, per-component
phasors for mode visualization, and the combined frequency/dissipation/
anharmonicity/Kerr report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from math import pi, sqrt
from typing import Mapping, Sequence

import numpy as np

from .errors import AnalysisError, BindingError
from .netlist import (
    ComponentKind,
    Element,
    ReducedCircuit,
    binding_points,
    normalize_bindings,
)
from .spectrum import (
    DEFAULT_CONFIG,
    Diagnostic,
    ModeSet,
    SolverConfig,
    find_modes,
    topology_of,
)
from .symbolic import expr as ex
from .symbolic.poly import derivative_at_root_arrays


class Quantity(Enum):
    VOLTAGE = "voltage"
    CURRENT = "current"
    CHARGE = "charge"
    FLUX = "flux"


@dataclass(frozen=True)
class ComponentPhasor:
    """Single-photon coherent-state amplitude across one component.

    The magnitude is the mode's zero-point fluctuation of the quantity;
    the direction convention runs from node_minus to node_plus.
    """

    element_id: int
    quantity: Quantity
    value: complex
    mode: int


@dataclass(eq=False)
class QuantizedModes:
    """Per-mode quantization data for one scalar binding point."""

    zetas: tuple[complex, ...]
    ref_elements: tuple[int, ...]
    phi_zpf: tuple[Mapping[int, complex], ...]
    a_mj: tuple[Mapping[int, float], ...]
    a_total: tuple[float, ...]
    chi: np.ndarray
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def mode_count(self) -> int:
        return len(self.zetas)


def _element_value(element: Element, point: Mapping[str, float]) -> float:
    v = element.value
    if v.is_symbolic:
        return float(point[v.symbol])
    return float(v.numeric)


def element_inductance_value(
    element: Element, point: Mapping[str, float], constants
) -> float:
    """Bound inductance in henries, converting energy-mode junctions."""
    raw = _element_value(element, point)
    if element.kind is ComponentKind.JUNCTION and element.value.energy_mode:
        return constants.phi0**2 / (raw * constants.h)
    return raw


def junction_ej_hz(element: Element, point: Mapping[str, float], constants) -> float:
    """Josephson energy in hertz: E_j = phi0^2 / (L_j * h)."""
    if element.kind is not ComponentKind.JUNCTION:
        raise ValueError("Josephson energy is defined for junctions only")
    if element.value.energy_mode:
        return _element_value(element, point)
    return constants.phi0**2 / (_element_value(element, point) * constants.h)


def _scalar_point(rc: ReducedCircuit, bindings: Mapping[str, object] | None) -> dict:
    normalized, sweep_len = normalize_bindings(rc.free_parameters(), bindings or {})
    if sweep_len is not None:
        raise BindingError("this operation takes scalar bindings, not sweeps")
    return binding_points(normalized, None)[0]


def phase_zpf(
    rc: ReducedCircuit,
    mode_zeta: complex,
    element: int,
    bindings: Mapping[str, object] | None = None,
) -> float:
    """Zero-point phase fluctuation of a mode across an inductive element.

    Uses the effective mode capacitance C = |Im[Y']|/2 from the admittance
    slope at the mode root, then (1/phi0)*sqrt(hbar/(2*Re[zeta]*C)).
    Degenerate slope evaluations propagate so callers can fall back to a
    different element.
    """
    e = rc.elements[element]
    if not e.is_inductive:
        raise ValueError("phase fluctuations are computed at inductive elements")
    point = _scalar_point(rc, bindings)
    return _phase_zpf_at_point(rc, mode_zeta, element, point)


def _phase_zpf_at_point(
    rc: ReducedCircuit, mode_zeta: complex, element: int, point: Mapping[str, float]
) -> float:
    topo = topology_of(rc)
    p_arr, q_arr = topo.element_rational(element).bind(point)
    dy = derivative_at_root_arrays(p_arr, q_arr, mode_zeta)
    c_mode = abs(dy.imag) / 2.0
    if c_mode <= 0:
        raise AnalysisError(
            f"element {element}: admittance slope gives no capacitance scale"
        )
    constants = rc.constants
    omega_m = mode_zeta.real
    return sqrt(constants.hbar / (2.0 * omega_m * c_mode)) / constants.phi0


def choose_reference(
    rc: ReducedCircuit,
    mode_zeta: complex,
    bindings: Mapping[str, object] | None = None,
) -> int:
    """Inductive element with the largest phase fluctuations for this mode.

    Ties break to the lowest element index; per-mode, so different modes
    may pick different references.
    """
    point = _scalar_point(rc, bindings)
    ref, _, _ = _choose_reference_at_point(rc, mode_zeta, point)
    return ref


def _choose_reference_at_point(
    rc: ReducedCircuit, mode_zeta: complex, point: Mapping[str, float]
) -> tuple[int, float, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    best: int | None = None
    best_phi = -math.inf
    for element in rc.inductive_elements:
        try:
            phi = _phase_zpf_at_point(rc, mode_zeta, element, point)
        except AnalysisError as err:
            diags.append(
                Diagnostic(
                    "reference-skip",
                    f"element {element}: {err}",
                    False,
                    mode_zeta,
                )
            )
            continue
        if phi > best_phi:
            best, best_phi = element, phi
    if best is None:
        raise AnalysisError(
            "no inductive element supports a phase-fluctuation evaluation "
            f"for mode at {mode_zeta:.6e}"
        )
    return best, best_phi, diags


def quantize(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
    modeset: ModeSet | None = None,
) -> QuantizedModes:
    """Full quantization at one binding point.

    For every retained mode: pick the reference element, propagate its
    phase fluctuations to all inductive elements through voltage transfer
    functions, and accumulate junction anharmonicity contributions into
    the Kerr matrix.
    """
    point = _scalar_point(rc, bindings)
    modes = modeset if modeset is not None else find_modes(rc, bindings, cfg)
    topo = topology_of(rc)
    constants = rc.constants
    junctions = rc.junctions

    zetas = modes.zetas
    diags: list[Diagnostic] = list(modes.diagnostics)
    refs: list[int] = []
    phi_maps: list[dict[int, complex]] = []
    a_maps: list[dict[int, float]] = []
    a_tot: list[float] = []

    for zeta in zetas:
        ref, phi_r, ref_diags = _choose_reference_at_point(rc, zeta, point)
        diags.extend(ref_diags)
        refs.append(ref)
        ref_e = rc.elements[ref]
        ref_port = (ref_e.node_minus, ref_e.node_plus)
        omega_m = zeta.real
        eval_point = dict(point)
        eval_point[ex.OMEGA_NAME] = omega_m

        phis: dict[int, complex] = {}
        for j in rc.inductive_elements:
            if j == ref:
                phis[j] = complex(phi_r)
                continue
            e = rc.elements[j]
            t = topo.transfer(ref_port, (e.node_minus, e.node_plus))
            phis[j] = phi_r * complex(t(eval_point))
        phi_maps.append(phis)

        amj: dict[int, float] = {}
        total = 0.0
        for j in junctions:
            ej = junction_ej_hz(rc.elements[j], point, constants)
            contrib = 0.5 * ej * abs(phis[j]) ** 4
            amj[j] = contrib
            total += contrib
        a_maps.append(amj)
        a_tot.append(total)

    m = len(zetas)
    chi = np.zeros((m, m))
    for i in range(m):
        chi[i, i] = a_tot[i]
        for k in range(i + 1, m):
            coupling = 2.0 * sum(
                sqrt(a_maps[i][j] * a_maps[k][j]) for j in junctions
            )
            chi[i, k] = coupling
            chi[k, i] = coupling

    return QuantizedModes(
        zetas=zetas,
        ref_elements=tuple(refs),
        phi_zpf=tuple(phi_maps),
        a_mj=tuple(a_maps),
        a_total=tuple(a_tot),
        chi=chi,
        diagnostics=tuple(diags),
    )


def junction_phases(
    rc: ReducedCircuit,
    mode: int,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> dict[int, complex]:
    """Complex phase fluctuations of one mode across every junction."""
    q = quantize(rc, bindings, cfg)
    if not 0 <= mode < q.mode_count:
        raise AnalysisError(f"mode {mode} is not a retained mode")
    return {j: q.phi_zpf[mode][j] for j in rc.junctions}


def anharmonicities(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Per-mode anharmonicity in hertz (sum of junction contributions)."""
    return np.asarray(quantize(rc, bindings, cfg).a_total)


def kerr(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Symmetric Kerr matrix in hertz; the diagonal is the anharmonicity."""
    return quantize(rc, bindings, cfg).chi


def f_k_A_chi(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    pretty: bool = False,
    cfg: SolverConfig = DEFAULT_CONFIG,
):
    """Frequencies, loss rates, anharmonicities and Kerr matrix.

    Scalar bindings give arrays indexed [mode] (chi is [mode][mode]);
    array bindings give arrays indexed [mode][sweep_point] with chi
    indexed [mode][mode][sweep_point].  With ``pretty`` (scalar bindings
    only) the formatted two-block table is returned instead.
    """
    normalized, sweep_len = normalize_bindings(rc.free_parameters(), bindings or {})
    if sweep_len is None:
        q = quantize(rc, bindings, cfg)
        f = np.array([z.real for z in q.zetas]) / (2 * pi)
        k = np.array([2 * z.imag for z in q.zetas]) / (2 * pi)
        a = np.asarray(q.a_total)
        if pretty:
            return format_f_k_a_chi_table(f, k, a, q.chi)
        return f, k, a, q.chi

    if pretty:
        raise BindingError("pretty printing needs scalar bindings")
    points = binding_points(normalized, sweep_len)
    results = [quantize(rc, p, cfg) for p in points]
    counts = {r.mode_count for r in results}
    if len(counts) != 1:
        raise AnalysisError(
            f"mode count changes across the sweep ({sorted(counts)}); "
            "narrow the range or adjust the solver thresholds"
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
    f /= 2 * pi
    k /= 2 * pi
    return f, k, a, chi


def component_zpf(
    rc: ReducedCircuit,
    mode: int,
    element: int,
    quantity: Quantity | str,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
    quantized: QuantizedModes | None = None,
) -> ComponentPhasor:
    """Phasor of a quantity across one component for a populated mode.

    Reference voltage is phi_zpf * phi0 * omega (real positive); other
    components pick up the complex transfer factor, and the four
    quantities are linked by V = i*omega*Phi, I = Y*V, q = I/(i*omega).
    """
    quantity = Quantity(quantity)
    q = quantized if quantized is not None else quantize(rc, bindings, cfg)
    if not 0 <= mode < q.mode_count:
        raise AnalysisError(f"mode {mode} is not a retained mode")
    point = _scalar_point(rc, bindings)
    topo = topology_of(rc)
    constants = rc.constants

    zeta = q.zetas[mode]
    omega_m = zeta.real
    ref = q.ref_elements[mode]
    ref_e = rc.elements[ref]
    phi_r = q.phi_zpf[mode][ref].real

    v_ref = phi_r * constants.phi0 * omega_m
    e = rc.elements[element]
    eval_point = dict(point)
    eval_point[ex.OMEGA_NAME] = omega_m
    if element == ref:
        t = 1.0 + 0j
    else:
        t = complex(
            topo.transfer(
                (ref_e.node_minus, ref_e.node_plus), (e.node_minus, e.node_plus)
            )(eval_point)
        )
    v = v_ref * t
    if quantity is Quantity.VOLTAGE:
        value = v
    elif quantity is Quantity.FLUX:
        value = v / (1j * omega_m)
    else:
        from .reduction import element_admittance

        y = complex(ex.evaluate(element_admittance(e, constants=constants), eval_point))
        current = y * v
        if quantity is Quantity.CURRENT:
            value = current
        else:
            value = current / (1j * omega_m)
    return ComponentPhasor(element_id=element, quantity=quantity, value=value, mode=mode)


def frequency_gradient(
    rc: ReducedCircuit,
    bindings: Mapping[str, object],
    param: str,
    delta: float | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Central finite difference of the eigenfrequencies in Hz per unit.

    ``delta`` defaults to 1e-6 of the parameter value.  A mode-count
    change inside the stencil reports a crossing instead of returning
    garbage.
    """
    point = _scalar_point(rc, bindings)
    if param not in point:
        raise BindingError(f"{param!r} is not a parameter of this circuit")
    x = point[param]
    h = delta if delta is not None else 1e-6 * x
    if h <= 0 or h >= x:
        raise BindingError("delta must be positive and smaller than the value")
    lo = dict(point)
    hi = dict(point)
    lo[param] = x - h
    hi[param] = x + h
    modes_lo = find_modes(rc, lo, cfg)
    modes_hi = find_modes(rc, hi, cfg)
    if len(modes_lo) != len(modes_hi):
        raise AnalysisError(
            "mode count changes inside the finite-difference stencil "
            f"({len(modes_lo)} vs {len(modes_hi)}); a mode crossing sits "
            "within +/- delta"
        )
    f_lo = modes_lo.eigenfrequencies_hz
    f_hi = modes_hi.eigenfrequencies_hz
    return (f_hi - f_lo) / (2.0 * h)


_SI_PREFIXES = {
    -24: "y", -21: "z", -18: "a", -15: "f", -12: "p", -9: "n", -6: "u",
    -3: "m", 0: "", 3: "k", 6: "M", 9: "G", 12: "T", 15: "P", 18: "E",
    21: "Z", 24: "Y",
}


def format_si_hz(x: float) -> str:
    """Three-significant-digit value with an SI-prefixed hertz unit."""
    if x == 0:
        return "0 Hz"
    sign = "-" if x < 0 else ""
    mag = abs(x)
    exp3 = int(math.floor(math.log10(mag) / 3.0)) * 3
    exp3 = min(max(exp3, -24), 24)
    mantissa = mag / 10.0**exp3
    text = _three_digits(mantissa)
    if float(text) >= 1000.0 and exp3 < 24:
        exp3 += 3
        text = _three_digits(mag / 10.0**exp3)
    return f"{sign}{text} {_SI_PREFIXES[exp3]}Hz"


def _three_digits(m: float) -> str:
    if m < 10.0:
        return f"{m:.2f}"
    if m < 100.0:
        return f"{m:.1f}"
    return f"{m:.0f}"


def format_f_k_a_chi_table(
    f: Sequence[float], k: Sequence[float], a: Sequence[float], chi: np.ndarray
) -> str:
    """Two-block report: mode table, then the lower Kerr triangle."""

    def row(label: str, cells: Sequence[str]) -> str:
        return f"{label:>4} |" + "".join(f" {c:>8} |" for c in cells)

    lines = [row("mode", ["freq. ", "diss. ", "anha. "])]
    for m in range(len(f)):
        lines.append(
            row(str(m), [format_si_hz(f[m]), format_si_hz(k[m]), format_si_hz(a[m])])
        )
    lines.append("")
    lines.append("Kerr coefficients")
    lines.append("diagonal = Kerr")
    lines.append("off-diagonal = cross-Kerr")
    lines.append(row("mode", [f"{m}   " for m in range(len(f))]))
    for m in range(len(f)):
        cells = [
            format_si_hz(chi[m][n]) if n <= m else "" for n in range(len(f))
        ]
        lines.append(row(str(m), cells))
    return "\n".join(lines) + "\n"
