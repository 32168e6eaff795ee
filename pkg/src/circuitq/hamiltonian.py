"""Truncated Fock-basis Hamiltonians and the charge-basis oracle.

Operators are dense complex matrices on a tensor product of per-mode Fock
spaces, in units of hertz (H/h).  The junction cosine potentials enter
through an even-order Taylor expansion of the phase operator built from the
complex per-mode junction phases, split into both quadratures so the result
is Hermitian by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import AnalysisError
from .netlist import ReducedCircuit
from .quantize import QuantizedModes, junction_ej_hz, quantize
from .spectrum import DEFAULT_CONFIG, SolverConfig

#: Largest tensor-product dimension built by default.
DEFAULT_DIMENSION_CAP = 2**14

#: Relative Hermiticity tolerance (max-norm).
HERMITICITY_RTOL = 1e-9


@dataclass(frozen=True)
class FockSpace:
    """Ordered mode indices with per-mode truncation dimensions."""

    modes: tuple[int, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.modes) != len(self.dims):
            raise ValueError("modes and dims must have the same length")
        if any(d < 2 for d in self.dims):
            raise ValueError("each mode needs at least two Fock levels")

    @property
    def dimension(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix on a Fock space, in hertz."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def hermiticity_defect(self) -> float:
        m = self.matrix
        scale = np.max(np.abs(m))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(m - m.conj().T)) / scale)

    def check_hermitian(self) -> None:
        defect = self.hermiticity_defect()
        if defect > HERMITICITY_RTOL:
            raise AnalysisError(
                f"operator is not Hermitian (relative defect {defect:.3e})"
            )

    def to_json_dict(self) -> dict:
        """Row-major complex entries as [re, im] pairs."""
        flat = self.matrix.reshape(-1)
        return {
            "dims": list(self.dims),
            "entries": [[float(v.real), float(v.imag)] for v in flat],
        }


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator on a single truncated Fock space."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def embed(op: np.ndarray, dims: Sequence[int], index: int) -> np.ndarray:
    """Tensor-embed a single-mode operator at a position in mode order."""
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        factor = op if i == index else np.eye(d, dtype=complex)
        out = np.kron(out, factor)
    return out


def build_hamiltonian(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    modes: Sequence[int] = (0,),
    excitations: Sequence[int] = (6,),
    taylor: int = 4,
    cfg: SolverConfig = DEFAULT_CONFIG,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
    quantized: QuantizedModes | None = None,
) -> HermitianOperator:
    """H/h for the selected modes, junction cosines Taylor-expanded.

    ``excitations[i]`` is the Fock-space dimension of ``modes[i]`` (levels
    0..N-1).  ``taylor`` is the even expansion order of the cosine, at
    least 4.  Modes left out contribute neither a harmonic term nor phase
    fluctuations.
    """
    if taylor % 2 != 0 or taylor < 4:
        raise ValueError("taylor must be an even integer >= 4")
    modes = tuple(int(m) for m in modes)
    dims = tuple(int(n) for n in excitations)
    space = FockSpace(modes=modes, dims=dims)
    if space.dimension > dimension_cap:
        raise AnalysisError(
            f"Hilbert space of dimension {space.dimension} exceeds the cap "
            f"{dimension_cap}; lower excitations or raise dimension_cap"
        )

    q = quantized if quantized is not None else quantize(rc, bindings, cfg)
    if any(not 0 <= m < q.mode_count for m in modes):
        raise AnalysisError(
            f"modes {modes} not all retained (circuit has {q.mode_count})"
        )

    total = space.dimension
    h = np.zeros((total, total), dtype=complex)
    lowering = []
    for i, (m, d) in enumerate(zip(modes, dims)):
        a = embed(destroy(d), dims, i)
        lowering.append(a)
        f_m = q.zetas[m].real / (2.0 * np.pi)
        h += f_m * (a.conj().T @ a)

    point = _junction_point(rc, bindings)
    for j in rc.junctions:
        phi = np.zeros((total, total), dtype=complex)
        for i, m in enumerate(modes):
            zpf = q.phi_zpf[m][j]
            a = lowering[i]
            ad = a.conj().T
            # Both quadratures: Re keeps (a + a+), Im rides on -i(a - a+).
            phi += zpf.real * (a + ad) + (-1j * zpf.imag) * (a - ad)
        ej = junction_ej_hz(rc.elements[j], point, rc.constants)
        phi2 = phi @ phi
        term = -(phi2 @ phi2) / 24.0
        n = 2
        while 2 * n <= taylor:
            h += ej * term
            term = term @ phi2 * (-1.0 / ((2 * n + 1) * (2 * n + 2)))
            n += 1

    op = HermitianOperator(matrix=h, dims=dims)
    op.check_hermitian()
    # Symmetrize away rounding noise so downstream eigensolves are exact.
    return HermitianOperator(
        matrix=0.5 * (h + h.conj().T), dims=dims
    )


def _junction_point(rc: ReducedCircuit, bindings) -> dict:
    from .quantize import _scalar_point

    return _scalar_point(rc, bindings)


def eigenenergies(op: HermitianOperator) -> np.ndarray:
    """Full spectrum in hertz, ascending, no ground-state offset."""
    op.check_hermitian()
    return np.linalg.eigvalsh(0.5 * (op.matrix + op.matrix.conj().T))


def cpb_hamiltonian(
    e_c_hz: float, e_j_hz: float, n_g: float = 0.0, basis: int = 41
) -> HermitianOperator:
    """Charge-basis junction+capacitor Hamiltonian, in hertz.

    Diagonal 4*E_C*(N - N_g)^2 over charge states N = -(basis-1)/2 ..
    +(basis-1)/2; hopping -E_j/2 between adjacent charge states, i.e. the
    matrix elements of -E_j*cos(phase).  This charge-basis convention keeps
    the linearized resonance at sqrt(8*E_C*E_j)/h and reproduces the known
    charge-dispersion scale at E_j/E_C ~ 35.
    """
    if basis % 2 == 0:
        raise ValueError("basis size must be odd")
    half = (basis - 1) // 2
    charges = np.arange(-half, half + 1, dtype=float)
    m = np.diag(4.0 * e_c_hz * (charges - n_g) ** 2).astype(complex)
    hop = -0.5 * e_j_hz * np.ones(basis - 1)
    m += np.diag(hop, 1) + np.diag(hop, -1)
    return HermitianOperator(matrix=m, dims=(basis,))


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    taylor: int | None = None
    dim: int | None = None


def convergence_scan(
    rc: ReducedCircuit,
    bindings: Mapping[str, object] | None = None,
    mode: int = 0,
    taylor_max: int = 40,
    dim_max: int = 60,
    rel_change: float = 1e-3,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> ConvergenceResult:
    """Smallest (taylor, dim) whose increments barely move the first two
    transitions.

    Scans Taylor order then dimension; at each cell the first transition
    and the following one must both change by less than ``rel_change``
    relative when either knob is incremented.  Caps exceeded is a result,
    not an exception.

    Truncating the phase operator before taking its powers produces, at
    large dimensions, spurious edge states whose energies drift slowly,
    so a plateau alone is not proof of convergence.  A cell is therefore
    only accepted while the reported transitions stay within a broad
    window around the linear mode frequency, which rejects the collapsed
    branches without touching the weak-anharmonicity regime this basis is
    built for.
    """
    q = quantize(rc, bindings, cfg)
    if len(rc.junctions) > 1:
        raise AnalysisError("the convergence scan expects at most one junction")
    point = _junction_point(rc, bindings)
    f_m = q.zetas[mode].real / (2.0 * np.pi)
    if rc.junctions:
        j = rc.junctions[0]
        zpf = q.phi_zpf[mode][j]
        ej = junction_ej_hz(rc.elements[j], point, rc.constants)
    else:
        zpf, ej = 0.0, 0.0

    taylors = list(range(4, taylor_max + 3, 2))
    dims = list(range(3, dim_max + 2))
    table: dict[tuple[int, int], tuple[float, float]] = {}

    for d in dims:
        a = destroy(d)
        ad = a.conj().T
        number = ad @ a
        zr = complex(zpf)
        phi = zr.real * (a + ad) + (-1j * zr.imag) * (a - ad)
        phi2 = phi @ phi
        h = f_m * number.astype(complex)
        term = -(phi2 @ phi2) / 24.0
        n = 2
        for t in taylors:
            while 2 * n <= t:
                h = h + ej * term
                term = term @ phi2 * (-1.0 / ((2 * n + 1) * (2 * n + 2)))
                n += 1
            energies = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
            table[(t, d)] = (energies[1] - energies[0], energies[2] - energies[1])

    def close(a: tuple[float, float], b: tuple[float, float]) -> bool:
        for x, y in zip(a, b):
            scale = max(abs(x), abs(y))
            if scale > 0 and abs(x - y) / scale >= rel_change:
                return False
        return True

    def physical(a: tuple[float, float]) -> bool:
        return all(0.2 * f_m <= x <= 3.0 * f_m for x in a)

    for t in range(4, taylor_max + 1, 2):
        for d in range(3, dim_max + 1):
            base = table[(t, d)]
            if not physical(base):
                continue
            if close(base, table[(t, d + 1)]) and close(base, table[(t + 2, d)]):
                return ConvergenceResult(converged=True, taylor=t, dim=d)
    return ConvergenceResult(converged=False)
