"""Normal-mode extraction from the determinant of the admittance matrix.

The symbolic work (matrix assembly, division-free determinant, admittance
rational functions) happens once per circuit topology and is cached; each
parameter binding only re-evaluates coefficients and re-roots, which is what
makes parameter sweeps cheap.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass, field
from math import pi
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    AnalysisError,
    BindingError,
    DegenerateDerivativeError,
    RootConditionError,
)
from .netlist import (
    ComponentKind,
    ReducedCircuit,
    binding_points,
    normalize_bindings,
)
from .reduction import group_parallel
from .symbolic import expr as ex
from .symbolic.determinant import berkowitz_poly_determinant
from .symbolic.expr import Expr
from .symbolic.poly import (
    Polynomial,
    RationalFunction,
    derivative_at_root_arrays,
    rescale_to_unit_disk,
)
from .symbolic.roots import halley_refine, polynomial_roots

#: Roots smaller than this, relative to the largest candidate, count as
#: zero-frequency solutions.  Structural omega factors are already divided
#: out of the characteristic polynomial, so this only catches numerical
#: leftovers of near-cancelling constant terms.
ZERO_FREQUENCY_RTOL = 1e-9

#: A candidate root is kept only if a Newton step on the LU determinant of
#: the numerically stamped matrix stays below this fraction of |zeta|.
#: True modes sit within coefficient-noise distance of a zero of the true
#: determinant; roots manufactured by that same coefficient noise do not
#: have one anywhere nearby.
SPURIOUS_NEWTON_RTOL = 1e-3


@dataclass(frozen=True)
class SolverConfig:
    root_relative_tolerance: float = 1e-11
    root_max_iterations: int = 100
    q_min: float = 1.0

    def __post_init__(self):
        if not (0 < self.root_relative_tolerance < 1e-3):
            raise ValueError("root_relative_tolerance must be in (0, 1e-3)")
        if self.root_max_iterations <= 0:
            raise ValueError("root_max_iterations must be positive")
        if self.q_min <= 0:
            raise ValueError("q_min must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class Diagnostic:
    """One discarded root candidate or evaluation fallback."""

    stage: str
    message: str
    unexpected: bool = False
    zeta: complex | None = None


@dataclass(frozen=True)
class ModeSet:
    """Retained complex mode frequencies, ascending by real part.

    ``zeta = omega + i*kappa/2``; reported frequencies and loss rates are
    in hertz, not angular frequency.
    """

    zetas: tuple[complex, ...]
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def eigenfrequencies_hz(self) -> np.ndarray:
        return np.array([z.real for z in self.zetas]) / (2.0 * pi)

    @property
    def loss_rates_hz(self) -> np.ndarray:
        return np.array([2.0 * z.imag for z in self.zetas]) / (2.0 * pi)

    def __len__(self) -> int:
        return len(self.zetas)


@dataclass(frozen=True)
class AdmittanceMatrix:
    """Grounded nodal admittance matrix with entries multiplied by omega,
    making every entry a polynomial in omega."""

    entries: tuple[tuple[Polynomial, ...], ...]
    ground_node: int
    node_order: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)


def _omega_scaled_admittance(element, constants) -> Polynomial:
    """omega * Y for one element: iCw^2, w/R, or 1/(iL)."""
    kind = element.kind
    if element.value.is_symbolic:
        v: object = ex.sym(element.value.symbol)
    else:
        v = element.value.numeric
    if kind is ComponentKind.CAPACITOR:
        if isinstance(v, Expr):
            c2 = ex.mul(ex.const(1j), v)
        else:
            c2 = 1j * v
        return Polynomial([0j, 0j, c2])
    if kind is ComponentKind.RESISTOR:
        if isinstance(v, Expr):
            c1 = ex.div(ex.const(1), v)
        else:
            c1 = 1.0 / v
        return Polynomial([0j, c1])
    if kind.is_inductive:
        from .reduction import inductance_expr

        if element.value.is_symbolic or (
            element.kind is ComponentKind.JUNCTION and element.value.energy_mode
        ):
            c0 = ex.div(ex.const(-1j), inductance_expr(element, constants))
        else:
            c0 = -1j / element.value.numeric
        return Polynomial([c0])
    raise ValueError(f"{kind} has no admittance stamp")


def _full_omega_matrix(rc: ReducedCircuit) -> list[list[Polynomial]]:
    """Ungrounded nodal matrix, every entry multiplied by omega."""
    n = rc.node_count
    zero = Polynomial.zero()
    full = [[zero for _ in range(n)] for _ in range(n)]
    for e in rc.elements:
        stamp = _omega_scaled_admittance(e, rc.constants)
        a, b = e.node_minus, e.node_plus
        full[a][b] = full[a][b] - stamp
        full[b][a] = full[b][a] - stamp
        full[a][a] = full[a][a] + stamp
        full[b][b] = full[b][b] + stamp
    return full


def build_admittance_matrix(rc: ReducedCircuit) -> AdmittanceMatrix:
    """Assemble the grounded nodal matrix of the linearized circuit.

    The ground is the node incident to the most components (ties to the
    lowest index); its row and column are removed.
    """
    n = rc.node_count
    if n < 2:
        raise AnalysisError("admittance matrix needs at least two nodes")

    ground = _ground_node(rc)
    full = _full_omega_matrix(rc)
    keep = [i for i in range(n) if i != ground]
    entries = tuple(
        tuple(full[i][j] for j in keep) for i in keep
    )
    return AdmittanceMatrix(entries=entries, ground_node=ground, node_order=tuple(keep))


def characteristic_polynomial(am: AdmittanceMatrix) -> Polynomial:
    """Determinant of the grounded matrix, collected as a polynomial with
    structural omega factors divided out."""
    det = berkowitz_poly_determinant([list(row) for row in am.entries])
    if det.is_zero:
        raise AnalysisError(
            "the admittance determinant is identically zero; the circuit "
            "contains a pathological short"
        )
    reduced, _ = det.strip_omega_factor()
    return reduced


class _CoeffTable:
    """Per-coefficient compiled evaluators for a polynomial."""

    def __init__(self, poly: Polynomial):
        self._fns = []
        for c in poly.coeffs:
            if isinstance(c, Expr):
                self._fns.append(ex.compile_expr(c))
            else:
                self._fns.append(lambda b, v=complex(c): v)

    def bind(self, bindings: Mapping[str, object]) -> np.ndarray:
        """Coefficients for scalar bindings, ascending."""
        return np.array([f(bindings) for f in self._fns], dtype=complex)

    def bind_sweep(self, bindings: Mapping[str, object], n: int) -> np.ndarray:
        """(n_points, n_coeffs) coefficient matrix for array bindings."""
        out = np.empty((n, len(self._fns)), dtype=complex)
        for k, f in enumerate(self._fns):
            out[:, k] = np.broadcast_to(np.asarray(f(bindings)), (n,))
        return out


def _ground_node(rc: ReducedCircuit) -> int:
    incidence = [0] * rc.node_count
    for e in rc.elements:
        incidence[e.node_minus] += 1
        incidence[e.node_plus] += 1
    return max(range(rc.node_count), key=lambda i: (incidence[i], -i))


def _coeff_scale(c, factor: float):
    if isinstance(c, Expr):
        return ex.mul(ex.const(factor), c)
    return c * factor


class _Equilibrated:
    """Frequency-substituted, symmetrically-balanced nodal matrix.

    The raw nodal matrix mixes coefficients spanning tens of decades, and
    the Berkowitz recursion loses most of its digits to absorption when run
    on it directly.  Substituting omega = w0*x and scaling row/column i by
    d_i makes every entry order one; determinants are computed there and
    mapped back to exact omega-space coefficients afterwards (the scale
    factors enter each coefficient as one exact multiplication).
    """

    def __init__(self, rc: ReducedCircuit):
        self.rc = rc
        full = _full_omega_matrix(rc)
        n = rc.node_count
        self.w0 = self._frequency_scale(rc)
        subbed = [
            [
                Polynomial(
                    [_coeff_scale(c, self.w0**k) for k, c in enumerate(p.coeffs)]
                )
                for p in row
            ]
            for row in full
        ]
        self.d = []
        for i in range(n):
            peak = max(
                (abs(c) for c in subbed[i][i].coeffs if not isinstance(c, Expr)),
                default=0.0,
            )
            self.d.append(peak**-0.5 if peak > 0 else 1.0)
        self.matrix = [
            [
                Polynomial(
                    [_coeff_scale(c, self.d[i] * self.d[j]) for c in subbed[i][j].coeffs]
                )
                for j in range(n)
            ]
            for i in range(n)
        ]

    @staticmethod
    def _frequency_scale(rc: ReducedCircuit) -> float:
        from .quantize import element_inductance_value

        logs_l, logs_c = [], []
        for e in rc.elements:
            if e.value.is_symbolic:
                continue
            if e.kind is ComponentKind.CAPACITOR:
                logs_c.append(np.log10(e.value.numeric))
            elif e.kind.is_inductive:
                logs_l.append(np.log10(element_inductance_value(e, {}, rc.constants)))
        if logs_l and logs_c:
            return float(10.0 ** (-(np.mean(logs_l) + np.mean(logs_c)) / 2.0))
        return 1e10

    def true_determinant(self, drop: tuple[int, ...]) -> Polynomial:
        """det of the omega-space nodal matrix with rows/cols removed.

        Computed on the balanced matrix and converted back, compensating
        the row scales exactly.
        """
        n = self.rc.node_count
        keep = [i for i in range(n) if i not in drop]
        if not keep:
            return Polynomial.one()
        sub = [[self.matrix[i][j] for j in keep] for i in keep]
        det_x = berkowitz_poly_determinant(sub)
        log_comp = -2.0 * sum(np.log10(self.d[i]) for i in keep)
        log_w0 = np.log10(self.w0)
        out = []
        for k, c in enumerate(det_x.coeffs):
            factor = 10.0 ** (log_comp - k * log_w0)
            if not np.isfinite(factor):
                raise AnalysisError(
                    "determinant coefficients exceed double range; "
                    "the circuit is too large for this representation"
                )
            out.append(_coeff_scale(c, factor))
        return Polynomial(out)


class _CompiledRational:
    """Rational function with compiled coefficient tables, normalized per
    binding by the largest denominator coefficient magnitude."""

    def __init__(self, rf: RationalFunction):
        self.rf = rf
        self._p = _CoeffTable(rf.num)
        self._q = _CoeffTable(rf.den)

    def bind(self, bindings: Mapping[str, object]) -> tuple[np.ndarray, np.ndarray]:
        p = self._p.bind(bindings)
        q = self._q.bind(bindings)
        qmax = np.max(np.abs(q))
        if qmax == 0:
            raise AnalysisError("admittance denominator vanished for these bindings")
        return p / qmax, q / qmax


class Topology:
    """Per-reduced-circuit cache of all one-time symbolic artifacts.

    Thread-safe for concurrent readers; lazily built under a lock.
    Compiled evaluators are pure functions and may be shared freely.
    """

    def __init__(self, rc: ReducedCircuit):
        self.rc = rc
        self._lock = threading.RLock()
        self._matrix: AdmittanceMatrix | None = None
        self._equilibrated: _Equilibrated | None = None
        self._char_det: Polynomial | None = None
        self._char_poly: Polynomial | None = None
        self._char_coeffs: _CoeffTable | None = None
        self._graph = None
        self._element_rationals: dict[int, _CompiledRational] = {}
        self._transfers: dict[tuple[tuple[int, int], tuple[int, int]], object] = {}

    @property
    def admittance_matrix(self) -> AdmittanceMatrix:
        with self._lock:
            if self._matrix is None:
                self._matrix = build_admittance_matrix(self.rc)
            return self._matrix

    @property
    def equilibrated(self) -> _Equilibrated:
        with self._lock:
            if self._equilibrated is None:
                if self.rc.node_count < 2:
                    raise AnalysisError(
                        "admittance matrix needs at least two nodes"
                    )
                self._equilibrated = _Equilibrated(self.rc)
            return self._equilibrated

    @property
    def char_determinant(self) -> Polynomial:
        """det of the grounded nodal matrix, omega factors kept.

        Every single-node cofactor of the zero-row-sum nodal matrix is the
        same polynomial, so this one determinant also serves as the
        numerator of the admittance at any element's nodes.
        """
        with self._lock:
            if self._char_det is None:
                ground = _ground_node(self.rc)
                self._char_det = self.equilibrated.true_determinant((ground,))
            return self._char_det

    @property
    def char_poly(self) -> Polynomial:
        with self._lock:
            if self._char_poly is None:
                det = self.char_determinant
                if det.is_zero:
                    raise AnalysisError(
                        "the admittance determinant is identically zero; the "
                        "circuit contains a pathological short"
                    )
                self._char_poly = det.strip_omega_factor()[0]
            return self._char_poly

    @property
    def char_coeffs(self) -> _CoeffTable:
        with self._lock:
            if self._char_coeffs is None:
                self._char_coeffs = _CoeffTable(self.char_poly)
            return self._char_coeffs

    @property
    def graph(self):
        with self._lock:
            if self._graph is None:
                self._graph = group_parallel(self.rc)
            return self._graph

    def element_rational(self, element_id: int) -> _CompiledRational:
        """Admittance at one element's nodes as a low-degree rational.

        Y = det(M minus one port node) / (omega * det(M minus both)),
        with determinants from the balanced nodal matrix.  The numerator
        is the shared grounded determinant, so mode roots satisfy the
        numerator root condition exactly.  Expanding the star-mesh
        expression instead piles up uncancelled factors and loses the
        numerator roots in rounding noise.
        """
        with self._lock:
            cached = self._element_rationals.get(element_id)
            if cached is None:
                e = self.rc.elements[element_id]
                num = self.char_determinant
                den = self.equilibrated.true_determinant(
                    (e.node_minus, e.node_plus)
                )
                den = den * Polynomial.omega_power(1)
                cached = _CompiledRational(RationalFunction(num, den))
                self._element_rationals[element_id] = cached
            return cached

    def transfer(self, ref_port: tuple[int, int], target_port: tuple[int, int]):
        """Compiled voltage transfer function between two ports."""
        from .reduction import graph_transfer

        key = (ref_port, target_port)
        with self._lock:
            fn = self._transfers.get(key)
            if fn is None:
                t = graph_transfer(self.graph, ref_port, target_port)
                fn = ex.compile_expr(t)
                self._transfers[key] = fn
            return fn

    def warm_up(self) -> None:
        """Force all sweep-critical symbolic work (used by benchmarks)."""
        self.char_coeffs
        for l in self.rc.inductive_elements:
            self.element_rational(l)


_TOPOLOGIES: "weakref.WeakKeyDictionary[ReducedCircuit, Topology]" = (
    weakref.WeakKeyDictionary()
)
_TOPOLOGY_LOCK = threading.Lock()


def topology_of(rc: ReducedCircuit) -> Topology:
    with _TOPOLOGY_LOCK:
        topo = _TOPOLOGIES.get(rc)
        if topo is None:
            topo = Topology(rc)
            _TOPOLOGIES[rc] = topo
        return topo


def _dense_grounded_matrix(
    rc: ReducedCircuit, w: complex, point: Mapping[str, float]
) -> np.ndarray:
    """Numerically stamped grounded omega-scaled matrix at one frequency.

    Built directly from element values (no polynomial coefficients), so it
    is an arithmetic path independent of the symbolic determinant.
    """
    from .quantize import element_inductance_value

    n = rc.node_count
    m = np.zeros((n, n), dtype=complex)
    for e in rc.elements:
        if e.kind is ComponentKind.CAPACITOR:
            v = e.value.numeric if not e.value.is_symbolic else point[e.value.symbol]
            stamp = 1j * v * w * w
        elif e.kind is ComponentKind.RESISTOR:
            v = e.value.numeric if not e.value.is_symbolic else point[e.value.symbol]
            stamp = w / v
        else:
            stamp = -1j / element_inductance_value(e, point, rc.constants)
        a, b = e.node_minus, e.node_plus
        m[a, b] -= stamp
        m[b, a] -= stamp
        m[a, a] += stamp
        m[b, b] += stamp
    ground = _ground_node(rc)
    keep = [i for i in range(n) if i != ground]
    return m[np.ix_(keep, keep)]


def _lu_det(m: np.ndarray) -> complex:
    sign, logdet = np.linalg.slogdet(m)
    if sign == 0:
        return 0j
    with np.errstate(over="ignore"):
        return complex(sign * np.exp(logdet))


def _near_true_root(
    rc: ReducedCircuit, zeta: complex, point: Mapping[str, float]
) -> bool:
    """Newton-step test against LU determinants of the stamped matrix."""
    h = 1e-6 * abs(zeta)
    v0 = _lu_det(_dense_grounded_matrix(rc, zeta, point))
    if v0 == 0:
        return True
    v_plus = _lu_det(_dense_grounded_matrix(rc, zeta + h, point))
    v_minus = _lu_det(_dense_grounded_matrix(rc, zeta - h, point))
    slope = (v_plus - v_minus) / (2.0 * h)
    if slope == 0 or not np.isfinite(abs(slope)) or not np.isfinite(abs(v0)):
        # Fall back to comparing against the neighborhood magnitude.
        scale = max(abs(v_plus), abs(v_minus))
        return bool(scale > 0 and abs(v0) <= 1e-3 * scale)
    step = abs(v0 / slope)
    return step <= SPURIOUS_NEWTON_RTOL * abs(zeta)


def _filter_roots(
    raw: Sequence[complex],
    topo: Topology,
    point: Mapping[str, float],
    cfg: SolverConfig,
) -> ModeSet:
    diags: list[Diagnostic] = []
    tol = cfg.root_relative_tolerance

    candidates = sorted(raw, key=lambda z: (z.real, z.imag))

    unique: list[complex] = []
    for z in candidates:
        dup = any(
            abs(z - u) <= tol * max(abs(z), abs(u)) for u in unique
        )
        if dup:
            diags.append(Diagnostic("duplicate", f"duplicate root {z:.6e}", False, z))
        else:
            unique.append(z)

    signed: list[complex] = []
    for z in unique:
        if z.real < 0:
            diags.append(
                Diagnostic("negative-real", f"mirror root {z:.6e}", False, z)
            )
        elif z.imag < 0:
            diags.append(
                Diagnostic("negative-imag", f"root {z:.6e} has negative loss", True, z)
            )
        else:
            signed.append(z)

    scale = max((abs(z) for z in unique), default=0.0)
    nonzero: list[complex] = []
    for z in signed:
        if z == 0 or abs(z) <= ZERO_FREQUENCY_RTOL * scale:
            diags.append(
                Diagnostic("zero-frequency", f"zero-frequency root {z:.6e}", False, z)
            )
        else:
            nonzero.append(z)

    genuine: list[complex] = []
    for z in nonzero:
        if _near_true_root(topo.rc, z, point):
            genuine.append(z)
        else:
            diags.append(
                Diagnostic(
                    "spurious-root",
                    f"root {z:.6e} has no nearby zero of the stamped "
                    "determinant (coefficient rounding artifact)",
                    False,
                    z,
                )
            )
    nonzero = genuine

    inductive = topo.rc.inductive_elements
    bound = {}
    for l in inductive:
        try:
            bound[l] = topo.element_rational(l).bind(point)
        except AnalysisError:
            continue

    slope_ok: list[complex] = []
    for z in nonzero:
        positive = False
        evaluated = 0
        for l, (p_arr, q_arr) in bound.items():
            try:
                dy = derivative_at_root_arrays(p_arr, q_arr, z)
            except (RootConditionError, DegenerateDerivativeError):
                continue
            evaluated += 1
            if dy.imag > 0:
                positive = True
                break
        if positive:
            slope_ok.append(z)
        elif evaluated == 0:
            diags.append(
                Diagnostic(
                    "slope-degenerate",
                    f"root {z:.6e}: admittance slope unavailable at every "
                    "inductive element",
                    True,
                    z,
                )
            )
        else:
            diags.append(
                Diagnostic(
                    "slope-negative",
                    f"root {z:.6e}: Im[Y'] <= 0 at every inductive element",
                    True,
                    z,
                )
            )

    kept: list[complex] = []
    for z in slope_ok:
        if z.imag > 0:
            q = z.real / (2.0 * z.imag)
            if q < cfg.q_min:
                diags.append(
                    Diagnostic(
                        "sub-q_min", f"root {z:.6e} has Q = {q:.3g} < q_min", True, z
                    )
                )
                continue
        kept.append(z)

    kept.sort(key=lambda z: (z.real, z.imag))
    if not kept:
        raise AnalysisError(
            "no normal modes survive root filtering; diagnostics: "
            + "; ".join(d.message for d in diags[-6:])
        )
    return ModeSet(zetas=tuple(kept), diagnostics=tuple(diags))


def _modes_at_point(
    topo: Topology, coeffs: np.ndarray, point: Mapping[str, float], cfg: SolverConfig
) -> ModeSet:
    raw = polynomial_roots(coeffs)
    refined = [
        halley_refine(
            coeffs, z, rel_tol=cfg.root_relative_tolerance,
            max_iter=cfg.root_max_iterations,
        )
        for z in raw
    ]
    return _filter_roots(refined, topo, point, cfg)


def find_modes(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    cfg: SolverConfig = DEFAULT_CONFIG,
):
    """Normal modes of the linearized circuit.

    Scalar bindings return a single :class:`ModeSet`; array bindings return
    one ModeSet per sweep point, identical to pointwise scalar calls.
    """
    normalized, sweep_len = normalize_bindings(
        rc.free_parameters(), bindings or {}
    )
    topo = topology_of(rc)
    table = topo.char_coeffs
    points = binding_points(normalized, sweep_len)
    if sweep_len is None:
        coeffs = table.bind(points[0])
        return _modes_at_point(topo, coeffs, points[0], cfg)
    matrix = table.bind_sweep(normalized, sweep_len)
    return [
        _modes_at_point(topo, matrix[i], points[i], cfg)
        for i in range(sweep_len)
    ]
