"""Netlist parsing, validation, serialization and node canonicalization.

Grammar, one statement per line, ``#`` starts a comment::

    KIND node- node+ value [E] [@ x1,y1 x2,y2]     KIND in {J, L, C, R}
    W    node  node        [@ x1,y1 x2,y2]
    G    node              [@ x1,y1 x2,y2]

``value`` is either a float literal (SI units: H, F, Ohm; junctions default
to Josephson inductance in henries) or a parameter name matching
``[A-Za-z_][A-Za-z0-9_]*``.  The ``E`` flag, valid only on junction lines,
declares the value to be a Josephson energy in hertz instead of an
inductance; the conversion is L = phi0^2 / (E * h).  The ``@`` suffix
carries grid positions for schematic editors and is ignored by analysis.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .constants import CONSTANTS, PhysicalConstants
from .errors import BindingError, CircuitTopologyError, NetlistSyntaxError
from .symbolic.expr import OMEGA_NAME

_SYMBOL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_POSITION_RE = re.compile(r"^(-?\d+(?:\.\d+)?),(-?\d+(?:\.\d+)?)$")


class ComponentKind(Enum):
    JUNCTION = "J"
    INDUCTOR = "L"
    CAPACITOR = "C"
    RESISTOR = "R"
    WIRE = "W"
    GROUND = "G"

    @property
    def is_inductive(self) -> bool:
        return self in (ComponentKind.JUNCTION, ComponentKind.INDUCTOR)

    @property
    def has_value(self) -> bool:
        return self not in (ComponentKind.WIRE, ComponentKind.GROUND)


@dataclass(frozen=True)
class ValueSpec:
    """Either a positive numeric value or a named free parameter.

    ``energy_mode`` marks a junction parametrized by Josephson energy in
    hertz rather than inductance in henries.
    """

    numeric: float | None = None
    symbol: str | None = None
    energy_mode: bool = False

    def __post_init__(self):
        if (self.numeric is None) == (self.symbol is None):
            raise ValueError("exactly one of numeric/symbol must be set")

    @property
    def is_symbolic(self) -> bool:
        return self.symbol is not None

    def text(self) -> str:
        if self.symbol is not None:
            return self.symbol
        return repr(self.numeric)


@dataclass(frozen=True)
class Component:
    """One netlist statement.  Node ids are arbitrary string tokens."""

    kind: ComponentKind
    node_minus: str
    node_plus: str
    value: ValueSpec | None = None
    label: str | None = None
    position: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __post_init__(self):
        if self.kind.has_value:
            if self.value is None:
                raise ValueError(f"{self.kind.value} component requires a value")
            if self.node_minus == self.node_plus:
                raise ValueError(
                    f"{self.kind.value} component connects node "
                    f"{self.node_minus!r} to itself"
                )
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} element carries no value")


@dataclass(frozen=True)
class Circuit:
    """Parsed component list plus the set of free parameter names."""

    components: tuple[Component, ...]
    free_parameters: frozenset[str]
    constants: PhysicalConstants = CONSTANTS

    def validate(self) -> None:
        kinds = [c.kind for c in self.components]
        if not self.components:
            raise CircuitTopologyError("no components")
        if ComponentKind.CAPACITOR not in kinds:
            raise CircuitTopologyError("circuit needs at least one capacitor")
        if not any(k.is_inductive for k in kinds):
            raise CircuitTopologyError(
                "circuit needs at least one inductor or junction"
            )


@dataclass(frozen=True, eq=False)
class Element:
    """A value-carrying component with canonical integer endpoints."""

    kind: ComponentKind
    node_minus: int
    node_plus: int
    value: ValueSpec
    label: str | None
    source_index: int

    @property
    def is_inductive(self) -> bool:
        return self.kind.is_inductive


@dataclass(frozen=True, eq=False)
class ReducedCircuit:
    """Circuit with wires and grounds eliminated.

    ``node_map`` sends every original node token to its canonical index;
    indices are contiguous from 0, groups ordered by their smallest
    original token.  ``ground_candidates`` lists the original tokens merged
    by ground markers (a single canonical node, possibly absent).
    """

    elements: tuple[Element, ...]
    node_map: tuple[tuple[str, int], ...]
    node_count: int
    ground_candidates: frozenset[str]
    constants: PhysicalConstants = CONSTANTS

    @property
    def node_map_dict(self) -> dict[str, int]:
        return dict(self.node_map)

    @property
    def inductive_elements(self) -> tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.elements) if e.is_inductive)

    @property
    def junctions(self) -> tuple[int, ...]:
        return tuple(
            i for i, e in enumerate(self.elements) if e.kind is ComponentKind.JUNCTION
        )

    def free_parameters(self) -> frozenset[str]:
        return frozenset(
            e.value.symbol for e in self.elements if e.value.is_symbolic
        )


def _token_key(token: str):
    """Numeric-aware ordering: integers by value first, then strings."""
    try:
        return (0, int(token), "")
    except ValueError:
        return (1, 0, token)


def _parse_value_token(token: str, line_no: int, col: int) -> ValueSpec:
    try:
        v = float(token)
    except ValueError:
        if not _SYMBOL_RE.match(token):
            raise NetlistSyntaxError(
                f"expected a number or parameter name, got {token!r}", line_no, col
            ) from None
        if token == OMEGA_NAME:
            raise NetlistSyntaxError(
                f"{OMEGA_NAME!r} is reserved for the frequency variable", line_no, col
            )
        return ValueSpec(symbol=token)
    if not np.isfinite(v) or v <= 0:
        raise NetlistSyntaxError(
            f"component values must be positive and finite, got {token}", line_no, col
        )
    return ValueSpec(numeric=v)


def _parse_position(tokens, cols, line_no):
    if len(tokens) != 2:
        col = cols[-1] if cols else 1
        raise NetlistSyntaxError("'@' expects two x,y coordinates", line_no, col)
    points = []
    for tok, col in zip(tokens, cols):
        m = _POSITION_RE.match(tok)
        if not m:
            raise NetlistSyntaxError(f"bad coordinate {tok!r}", line_no, col)
        points.append((float(m.group(1)), float(m.group(2))))
    return (points[0], points[1])


def parse_netlist(text: str) -> Circuit:
    """Parse netlist text into a validated :class:`Circuit`."""
    components: list[Component] = []
    free: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens: list[str] = []
        cols: list[int] = []
        for m in re.finditer(r"\S+", line):
            tokens.append(m.group())
            cols.append(m.start() + 1)

        head = tokens[0]
        try:
            kind = ComponentKind(head)
        except ValueError:
            raise NetlistSyntaxError(
                f"unknown component kind {head!r}", line_no, cols[0]
            ) from None

        if "@" in tokens:
            at = tokens.index("@")
            position = _parse_position(tokens[at + 1 :], cols[at + 1 :], line_no)
            tokens, cols = tokens[:at], cols[:at]
        else:
            position = None

        if kind is ComponentKind.GROUND:
            if len(tokens) != 2:
                raise NetlistSyntaxError("G expects one node", line_no, cols[0])
            components.append(
                Component(kind, tokens[1], tokens[1], position=position)
            )
            continue
        if kind is ComponentKind.WIRE:
            if len(tokens) != 3:
                raise NetlistSyntaxError("W expects two nodes", line_no, cols[0])
            if tokens[1] == tokens[2]:
                raise NetlistSyntaxError(
                    "wire connects a node to itself", line_no, cols[1]
                )
            components.append(
                Component(kind, tokens[1], tokens[2], position=position)
            )
            continue

        if len(tokens) not in (4, 5):
            raise NetlistSyntaxError(
                f"{kind.value} expects two nodes and a value", line_no, cols[0]
            )
        energy = False
        if len(tokens) == 5:
            if tokens[4] != "E":
                raise NetlistSyntaxError(
                    f"unexpected trailing token {tokens[4]!r}", line_no, cols[4]
                )
            if kind is not ComponentKind.JUNCTION:
                raise NetlistSyntaxError(
                    "the E flag applies to junctions only", line_no, cols[4]
                )
            energy = True
        if tokens[1] == tokens[2]:
            raise NetlistSyntaxError(
                f"{kind.value} component connects node {tokens[1]!r} to itself",
                line_no,
                cols[1],
            )
        value = _parse_value_token(tokens[3], line_no, cols[3])
        if energy:
            value = ValueSpec(
                numeric=value.numeric, symbol=value.symbol, energy_mode=True
            )
        if value.is_symbolic:
            free.add(value.symbol)
        components.append(
            Component(
                kind,
                tokens[1],
                tokens[2],
                value=value,
                label=value.symbol,
                position=position,
            )
        )

    circuit = Circuit(tuple(components), frozenset(free))
    circuit.validate()
    return circuit


def serialize_netlist(circuit: Circuit) -> str:
    """Canonical text form; ``parse_netlist`` round-trips it structurally."""
    lines = []
    for comp in circuit.components:
        if comp.kind is ComponentKind.GROUND:
            parts = [comp.kind.value, comp.node_minus]
        elif comp.kind is ComponentKind.WIRE:
            parts = [comp.kind.value, comp.node_minus, comp.node_plus]
        else:
            parts = [comp.kind.value, comp.node_minus, comp.node_plus, comp.value.text()]
            if comp.value.energy_mode:
                parts.append("E")
        if comp.position is not None:
            (x1, y1), (x2, y2) = comp.position
            parts.append("@")
            parts.append(f"{_coord(x1)},{_coord(y1)}")
            parts.append(f"{_coord(x2)},{_coord(y2)}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def _coord(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


_GROUND_SENTINEL = "\x00ground"


def reduce_nodes(circuit: Circuit) -> ReducedCircuit:
    """Merge wire/ground-connected nodes and relabel to dense integers.

    Raises on components shorted by wires and on disconnected graphs.
    """
    circuit.validate()
    uf = _UnionFind()
    for comp in circuit.components:
        uf.find(comp.node_minus)
        uf.find(comp.node_plus)
        if comp.kind is ComponentKind.WIRE:
            uf.union(comp.node_minus, comp.node_plus)
        elif comp.kind is ComponentKind.GROUND:
            uf.union(comp.node_minus, _GROUND_SENTINEL)

    groups: dict[str, list[str]] = {}
    for token in uf.parent:
        groups.setdefault(uf.find(token), []).append(token)

    rep_to_index: dict[str, int] = {}
    ordered = []
    for root, members in groups.items():
        real = [t for t in members if t != _GROUND_SENTINEL]
        if not real:
            continue
        ordered.append((min(real, key=_token_key), root, real))
    ordered.sort(key=lambda item: _token_key(item[0]))
    group_members: list[list[str]] = []
    for index, (_, root, real) in enumerate(ordered):
        rep_to_index[root] = index
        group_members.append(real)

    node_map = {}
    for index, members in enumerate(group_members):
        for token in members:
            node_map[token] = index

    ground_root = uf.find(_GROUND_SENTINEL) if _GROUND_SENTINEL in uf.parent else None
    ground_tokens: frozenset[str] = frozenset()
    if ground_root is not None and ground_root in rep_to_index:
        ground_tokens = frozenset(group_members[rep_to_index[ground_root]])

    elements = []
    for i, comp in enumerate(circuit.components):
        if not comp.kind.has_value:
            continue
        a = node_map[comp.node_minus]
        b = node_map[comp.node_plus]
        if a == b:
            raise CircuitTopologyError(
                f"component {i} ({comp.kind.value} {comp.node_minus} "
                f"{comp.node_plus}) is shorted by wires"
            )
        elements.append(
            Element(comp.kind, a, b, comp.value, comp.label, source_index=i)
        )

    node_count = len(group_members)
    incidence = [0] * node_count
    adjacency: list[set[int]] = [set() for _ in range(node_count)]
    for e in elements:
        incidence[e.node_minus] += 1
        incidence[e.node_plus] += 1
        adjacency[e.node_minus].add(e.node_plus)
        adjacency[e.node_plus].add(e.node_minus)

    dangling = [n for n, count in enumerate(incidence) if count < 2]
    if dangling:
        tokens = [m for n in dangling for m in group_members[n]]
        raise CircuitTopologyError(
            f"dangling nodes after wire/ground merging: {sorted(tokens)}"
        )

    seen = {0}
    frontier = [0]
    while frontier:
        n = frontier.pop()
        for m in adjacency[n]:
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    if len(seen) != node_count:
        raise CircuitTopologyError("circuit graph is disconnected")

    return ReducedCircuit(
        elements=tuple(elements),
        node_map=tuple(sorted(node_map.items(), key=lambda kv: (_token_key(kv[0]),))),
        node_count=node_count,
        ground_candidates=ground_tokens,
        constants=circuit.constants,
    )


def normalize_bindings(
    free_parameters: Iterable[str], bindings: Mapping[str, object]
) -> tuple[dict[str, object], int | None]:
    """Validate bindings against the free parameters of a circuit.

    Returns the normalized mapping and the sweep length (None for an
    all-scalar call).  Every free parameter must be bound, extraneous
    names are rejected, values must be positive reals, and all arrays must
    share one length.
    """
    free = set(free_parameters)
    extraneous = set(bindings) - free
    if extraneous:
        raise BindingError(f"unknown parameter(s): {sorted(extraneous)}")
    missing = free - set(bindings)
    if missing:
        raise BindingError(
            f"unbound parameter(s): {sorted(missing)}; pass a value for each"
        )
    out: dict[str, object] = {}
    sweep_len: int | None = None
    for name in sorted(free):
        v = bindings[name]
        if isinstance(v, (list, tuple, np.ndarray)):
            arr = np.asarray(v, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise BindingError(f"{name}: sweep arrays must be non-empty 1-D")
            if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
                raise BindingError(f"{name}: values must be positive and finite")
            if sweep_len is None:
                sweep_len = int(arr.size)
            elif sweep_len != arr.size:
                raise BindingError("all sweep arrays must have the same length")
            out[name] = arr
        else:
            x = float(v)
            if not np.isfinite(x) or x <= 0:
                raise BindingError(f"{name}: values must be positive and finite")
            out[name] = x
    return out, sweep_len


def binding_points(
    normalized: Mapping[str, object], sweep_len: int | None
) -> list[dict[str, float]]:
    """Expand normalized bindings into per-point scalar dictionaries."""
    if sweep_len is None:
        return [{k: float(v) for k, v in normalized.items()}]
    points = []
    for i in range(sweep_len):
        point = {}
        for k, v in normalized.items():
            point[k] = float(v[i]) if isinstance(v, np.ndarray) else float(v)
        points.append(point)
    return points
