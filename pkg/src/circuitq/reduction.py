"""Network reduction: star-mesh elimination and two-port transfer functions.

All reductions are symbolic in the frequency variable; numeric component
values fold into plain complex coefficients, symbolic ones survive as free
parameters.  The results are expressions meant to be converted once to
rational functions and then evaluated many times during sweeps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .constants import CONSTANTS
from .errors import AnalysisError, BridgeSingularityError, CircuitTopologyError
from .netlist import ComponentKind, Element, ReducedCircuit, ValueSpec
from .symbolic import expr as ex
from .symbolic.expr import Expr

_OMEGA = ex.omega()


def _value_expr(value: ValueSpec) -> Expr:
    if value.is_symbolic:
        return ex.sym(value.symbol)
    return ex.const(value.numeric)


def inductance_expr(element: Element, constants=CONSTANTS) -> Expr:
    """Inductance of an inductive element, converting energy-mode junctions
    via L = phi0^2 / (E * h) with E in hertz."""
    if not element.is_inductive:
        raise ValueError("inductance is defined for inductors and junctions only")
    v = _value_expr(element.value)
    if element.kind is ComponentKind.JUNCTION and element.value.energy_mode:
        return ex.div(ex.const(constants.phi0**2 / constants.h), v)
    return v


def element_admittance(
    element: Element, *, linearize_junctions: bool = True, constants=CONSTANTS
) -> Expr:
    """Admittance of a single element: 1/(iLw), iCw or 1/R.

    Junctions contribute through their Josephson inductance when
    ``linearize_junctions`` is set; requesting the admittance of a
    non-linearized junction is an error.
    """
    kind = element.kind
    if kind is ComponentKind.CAPACITOR:
        return ex.mul(ex.const(1j), _value_expr(element.value), _OMEGA)
    if kind is ComponentKind.RESISTOR:
        return ex.div(ex.const(1), _value_expr(element.value))
    if kind.is_inductive:
        if kind is ComponentKind.JUNCTION and not linearize_junctions:
            raise AnalysisError("junction admittance requires linearization")
        return ex.div(
            ex.const(1), ex.mul(ex.const(1j), inductance_expr(element, constants), _OMEGA)
        )
    raise ValueError(f"{kind} carries no admittance")


class AdmittanceGraph:
    """Undirected multigraph collapsed to one admittance edge per node pair.

    ``provenance`` records which element indices were merged into each edge,
    for mode-visualization overlays.
    """

    __slots__ = ("adjacency", "provenance")

    def __init__(self):
        self.adjacency: dict[int, dict[int, Expr]] = {}
        self.provenance: dict[frozenset, tuple[int, ...]] = {}

    @property
    def nodes(self) -> list[int]:
        return sorted(self.adjacency)

    def edges(self) -> dict[frozenset, Expr]:
        out = {}
        for a, neighbors in self.adjacency.items():
            for b, y in neighbors.items():
                if a < b:
                    out[frozenset((a, b))] = y
        return out

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def copy(self) -> "AdmittanceGraph":
        g = AdmittanceGraph()
        g.adjacency = {n: dict(nbrs) for n, nbrs in self.adjacency.items()}
        g.provenance = dict(self.provenance)
        return g

    def ensure_node(self, node: int) -> None:
        self.adjacency.setdefault(node, {})

    def connect(self, a: int, b: int, admittance: Expr, sources=()) -> None:
        """Add an admittance between two nodes, merging parallels by sum."""
        self.ensure_node(a)
        self.ensure_node(b)
        existing = self.adjacency[a].get(b)
        merged = admittance if existing is None else ex.add(existing, admittance)
        self.adjacency[a][b] = merged
        self.adjacency[b][a] = merged
        key = frozenset((a, b))
        self.provenance[key] = self.provenance.get(key, ()) + tuple(sources)

    def edge(self, a: int, b: int) -> Expr | None:
        return self.adjacency.get(a, {}).get(b)

    def branch_admittance(self, a: int, b: int) -> Expr:
        """Edge admittance, or the zero of an open circuit."""
        y = self.edge(a, b)
        return ex.const(0) if y is None else y


def group_parallel(
    rc: ReducedCircuit, linearize_junctions: bool = True
) -> AdmittanceGraph:
    """Admittance graph of the reduced circuit with parallels merged."""
    g = AdmittanceGraph()
    for n in range(rc.node_count):
        g.ensure_node(n)
    for i, e in enumerate(rc.elements):
        y = element_admittance(
            e, linearize_junctions=linearize_junctions, constants=rc.constants
        )
        g.connect(e.node_minus, e.node_plus, y, sources=(i,))
    return g


def star_mesh_eliminate(graph: AdmittanceGraph, node: int) -> AdmittanceGraph:
    """Remove one node, meshing its neighbors with Yx*Yy/sum(Y).

    Returns a new graph; the input is left untouched.
    """
    if node not in graph.adjacency:
        raise ValueError(f"node {node} is not in the graph")
    g = graph.copy()
    _eliminate_in_place(g, node)
    return g


def _eliminate_in_place(g: AdmittanceGraph, node: int) -> None:
    connections = sorted(g.adjacency[node].items())
    total = ex.add(*(y for _, y in connections)) if connections else ex.const(0)
    if ex.is_zero(total):
        raise AnalysisError(
            f"star at node {node} has identically zero total admittance"
        )
    for neighbor, _ in connections:
        del g.adjacency[neighbor][node]
    del g.adjacency[node]
    for i, (na, ya) in enumerate(connections):
        for nb, yb in connections[i + 1 :]:
            g.connect(na, nb, ex.div(ex.mul(ya, yb), total))


def _reduce_to(graph: AdmittanceGraph, keep: set[int]) -> AdmittanceGraph:
    """Eliminate all nodes outside ``keep``, least-connected first.

    Degrees are recomputed after every elimination; ties go to the lowest
    canonical index, which makes the reduction deterministic.
    """
    g = graph.copy()
    while True:
        candidates = [n for n in g.adjacency if n not in keep]
        if not candidates:
            return g
        node = min(candidates, key=lambda n: (g.degree(n), n))
        _eliminate_in_place(g, node)


def admittance_between(rc: ReducedCircuit, a: int, b: int) -> Expr:
    """Symbolic admittance seen between two canonical nodes."""
    if a == b:
        raise ValueError("admittance requires two distinct nodes")
    graph = group_parallel(rc)
    return graph_admittance_between(graph, a, b)


def graph_admittance_between(graph: AdmittanceGraph, a: int, b: int) -> Expr:
    if a == b:
        raise ValueError("admittance requires two distinct nodes")
    reduced = _reduce_to(graph, {a, b})
    y = reduced.edge(a, b)
    if y is None:
        raise CircuitTopologyError(f"nodes {a} and {b} are not connected")
    return y


@dataclass(frozen=True)
class TwoPort:
    """Chain (ABCD) parameters between two ports.

    For the reciprocal lumped networks produced here, A*D - B*C binds to 1.
    """

    a: Expr
    b: Expr
    c: Expr
    d: Expr


def _probe_difference_zero(lhs: Expr, rhs: Expr, rng_seed: int = 0x5EED) -> bool:
    """Randomized structural-zero test for ``lhs - rhs``.

    Three evaluations at random positive bindings; the difference must stay
    below 1e-12 relative to the part magnitudes each time to count as an
    exact symbolic zero.
    """
    rng = random.Random(rng_seed)
    f_lhs = ex.compile_expr(lhs)
    f_rhs = ex.compile_expr(rhs)
    free = (ex.free_symbols(lhs) | ex.free_symbols(rhs)) - {ex.OMEGA_NAME}
    for _ in range(3):
        b = {name: 10.0 ** rng.uniform(-12.0, -6.0) for name in free}
        b[ex.OMEGA_NAME] = 10.0 ** rng.uniform(8.0, 11.0)
        a = f_lhs(b)
        c = f_rhs(b)
        scale = abs(a) + abs(c)
        if scale == 0:
            continue
        if abs(a - c) > 1e-12 * scale:
            return False
    return True


def _ports_of(rc: ReducedCircuit, element_id: int) -> tuple[int, int]:
    e = rc.elements[element_id]
    return e.node_minus, e.node_plus


def transfer_function(rc: ReducedCircuit, ref: int, target: int) -> Expr:
    """Voltage transfer V_target/V_ref between two element ports."""
    graph = group_parallel(rc)
    return graph_transfer(graph, _ports_of(rc, ref), _ports_of(rc, target))


def graph_transfer(
    graph: AdmittanceGraph,
    ref_port: tuple[int, int],
    target_port: tuple[int, int],
) -> Expr:
    """Transfer function between ports, each given as (minus, plus)."""
    lm, lp = ref_port
    rm, rp = target_port
    if lm == lp or rm == rp:
        raise ValueError("a port needs two distinct nodes")

    if (lm, lp) == (rm, rp):
        return ex.const(1)
    if (lm, lp) == (rp, rm):
        return ex.const(-1)

    keep = {lm, lp, rm, rp}
    g = _reduce_to(graph, keep)

    shared = {lm, lp} & {rm, rp}
    if shared:
        # Three distinct nodes: a voltage divider.  The admittance across
        # the reference port never enters; orientation flips the sign.
        if lm == rm:
            p1, p2, gr, sign = lp, rp, lm, 1.0
        elif lp == rp:
            p1, p2, gr, sign = lm, rm, lp, 1.0
        elif lm == rp:
            p1, p2, gr, sign = lp, rm, lm, -1.0
        else:  # lp == rm
            p1, p2, gr, sign = lm, rp, lp, -1.0
        y_shunt = g.branch_admittance(p2, gr)
        y_series = g.edge(p1, p2)
        if y_series is None:
            # Every path between the ports runs through the shared node, so
            # no voltage builds up across the target port.
            return ex.const(0)
        a = ex.add(ex.const(1), ex.div(y_shunt, y_series))
        return ex.div(ex.const(sign), a)

    two_port = _lattice_two_port(g, ref_port, target_port)
    return ex.div(ex.const(1), two_port.a)


def two_port(rc: ReducedCircuit, ref: int, target: int) -> TwoPort:
    """Full ABCD matrix between the ports of two elements.

    Supports the general (no shared node) configuration and the shared-node
    divider; used mainly to check the reciprocity invariant.
    """
    graph = group_parallel(rc)
    lm, lp = _ports_of(rc, ref)
    rm, rp = _ports_of(rc, target)
    keep = {lm, lp, rm, rp}
    g = _reduce_to(graph, keep)
    if {lm, lp} & {rm, rp}:
        if lm == rm:
            p1, p2, gr = lp, rp, lm
        elif lp == rp:
            p1, p2, gr = lm, rm, lp
        elif lm == rp:
            p1, p2, gr = lp, rm, lm
        else:
            p1, p2, gr = lm, rp, lp
        y1 = g.branch_admittance(p1, gr)
        y2 = g.branch_admittance(p2, gr)
        y3 = g.edge(p1, p2)
        if y3 is None:
            raise AnalysisError("ports are not coupled after reduction")
        return TwoPort(
            a=ex.add(ex.const(1), ex.div(y2, y3)),
            b=ex.div(ex.const(1), y3),
            c=ex.add(y1, y2, ex.div(ex.mul(y1, y2), y3)),
            d=ex.add(ex.const(1), ex.div(y1, y3)),
        )
    return _lattice_two_port(g, (lm, lp), (rm, rp), with_shunts=True)


def _lattice_two_port(
    g: AdmittanceGraph,
    ref_port: tuple[int, int],
    target_port: tuple[int, int],
    with_shunts: bool = False,
) -> TwoPort:
    lm, lp = ref_port
    rm, rp = target_port
    ya = g.branch_admittance(lp, rp)
    yb = g.branch_admittance(lm, rp)
    yc = g.branch_admittance(lp, rm)
    yd = g.branch_admittance(lm, rm)

    prod_ad = ex.mul(ya, yd)
    prod_bc = ex.mul(yb, yc)
    denom = ex.sub(prod_ad, prod_bc)
    if ex.is_zero(denom) or _probe_difference_zero(prod_ad, prod_bc):
        raise BridgeSingularityError(
            "Ya*Yd - Yb*Yc is exactly zero between these ports: either a "
            "balanced bridge (break the symmetry by perturbing one element "
            "value) or ports with no closed path coupling them"
        )

    a_mid = ex.div(ex.mul(ex.add(ya, yb), ex.add(yc, yd)), denom)
    b_mid = ex.div(ex.add(ya, yb, yc, yd), denom)
    # Triple products of the cross admittances give C of the lattice.
    s3 = ex.add(
        ex.mul(yb, yc, yd), ex.mul(ya, yc, yd), ex.mul(ya, yb, yd), ex.mul(ya, yb, yc)
    )
    c_mid = ex.div(s3, denom)
    d_mid = ex.div(ex.mul(ex.add(ya, yc), ex.add(yb, yd)), denom)

    y_right = g.branch_admittance(rm, rp)
    a = ex.add(a_mid, ex.mul(b_mid, y_right))
    if not with_shunts:
        return TwoPort(a=a, b=b_mid, c=c_mid, d=d_mid)

    # Cascade: shunt at the reference port, lattice, shunt at the target.
    y_left = g.branch_admittance(lm, lp)
    b = b_mid
    c = ex.add(ex.mul(y_left, a_mid), c_mid, ex.mul(ex.add(ex.mul(y_left, b_mid), d_mid), y_right))
    d = ex.add(ex.mul(y_left, b_mid), d_mid)
    return TwoPort(a=a, b=b, c=c, d=d)
