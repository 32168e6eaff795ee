"""Lumped-element superconducting circuit analyzer.

Parses netlists, finds the complex normal modes of the linearized circuit
by symbolic nodal analysis, extracts zero-point fluctuations,
anharmonicities and Kerr couplings, and builds truncated Fock-basis
Hamiltonians.  Exposed as a library, a CLI (``circuitq``) and a local HTTP
service (``circuitq-server``).
"""

__version__ = "0.1.0"

from .analysis import CircuitAnalysis, sweep_csv
from .constants import CONSTANTS, PhysicalConstants
from .errors import (
    AnalysisError,
    BindingError,
    BridgeSingularityError,
    CircuitQError,
    CircuitTopologyError,
    DegenerateDerivativeError,
    NetlistSyntaxError,
    RootConditionError,
)
from .hamiltonian import (
    ConvergenceResult,
    FockSpace,
    HermitianOperator,
    build_hamiltonian,
    convergence_scan,
    cpb_hamiltonian,
    destroy,
    eigenenergies,
    embed,
)
from .netlist import (
    Circuit,
    Component,
    ComponentKind,
    Element,
    ReducedCircuit,
    ValueSpec,
    parse_netlist,
    reduce_nodes,
    serialize_netlist,
)
from .quantize import (
    ComponentPhasor,
    Quantity,
    QuantizedModes,
    anharmonicities,
    choose_reference,
    component_zpf,
    f_k_A_chi,
    format_f_k_a_chi_table,
    format_si_hz,
    frequency_gradient,
    junction_phases,
    kerr,
    phase_zpf,
    quantize,
)
from .reduction import (
    AdmittanceGraph,
    TwoPort,
    admittance_between,
    element_admittance,
    group_parallel,
    star_mesh_eliminate,
    transfer_function,
    two_port,
)
from .spectrum import (
    AdmittanceMatrix,
    Diagnostic,
    ModeSet,
    SolverConfig,
    Topology,
    build_admittance_matrix,
    characteristic_polynomial,
    find_modes,
    topology_of,
)

__all__ = [
    "AnalysisError",
    "AdmittanceGraph",
    "AdmittanceMatrix",
    "BindingError",
    "BridgeSingularityError",
    "CONSTANTS",
    "Circuit",
    "CircuitAnalysis",
    "CircuitQError",
    "CircuitTopologyError",
    "Component",
    "ComponentKind",
    "ComponentPhasor",
    "ConvergenceResult",
    "DegenerateDerivativeError",
    "Diagnostic",
    "Element",
    "FockSpace",
    "HermitianOperator",
    "ModeSet",
    "NetlistSyntaxError",
    "PhysicalConstants",
    "Quantity",
    "QuantizedModes",
    "ReducedCircuit",
    "RootConditionError",
    "SolverConfig",
    "Topology",
    "TwoPort",
    "ValueSpec",
    "admittance_between",
    "anharmonicities",
    "build_admittance_matrix",
    "build_hamiltonian",
    "characteristic_polynomial",
    "choose_reference",
    "component_zpf",
    "convergence_scan",
    "cpb_hamiltonian",
    "destroy",
    "eigenenergies",
    "element_admittance",
    "embed",
    "f_k_A_chi",
    "find_modes",
    "format_f_k_a_chi_table",
    "format_si_hz",
    "frequency_gradient",
    "group_parallel",
    "junction_phases",
    "kerr",
    "parse_netlist",
    "phase_zpf",
    "quantize",
    "reduce_nodes",
    "serialize_netlist",
    "star_mesh_eliminate",
    "sweep_csv",
    "topology_of",
    "transfer_function",
    "two_port",
]
