import random

import numpy as np
import pytest

from circuitq import CircuitAnalysis, parse_netlist, reduce_nodes

FIG1_NETLIST = """\
C 0 1 100e-15
J 0 1 Lj
C 0 2 100e-15
L 0 2 10e-9
C 1 2 1e-15
C 2 3 0.5e-15
R 3 0 50
"""

FILTERED_CAVITY_NETLIST = """\
R 0 1 50
L 1 2 Lf
C 2 0 Cf
L 2 3 Lf
C 3 0 Cf
L 3 0 10e-9
C 3 0 100e-15
"""


@pytest.fixture(scope="session")
def fig1_analysis():
    return CircuitAnalysis.from_netlist(FIG1_NETLIST)


@pytest.fixture(scope="session")
def fig1_rc():
    return reduce_nodes(parse_netlist(FIG1_NETLIST))


def random_circuit_text(rng: random.Random, max_nodes=5, lossy=False) -> str:
    """Random connected circuit with no dangling nodes.

    Component values stay within two decades so oracle comparisons are
    well conditioned.
    """
    n = rng.randint(3, max_nodes)
    nodes = [str(i) for i in range(n)]

    def value(kind):
        if kind == "L":
            return rng.uniform(1e-9, 50e-9)
        if kind == "C":
            return rng.uniform(20e-15, 500e-15)
        return rng.uniform(50.0, 5000.0)

    kinds = ["L", "C"] if not lossy else ["L", "C", "R"]
    edges = []
    # random spanning tree keeps the graph connected
    order = nodes[:]
    rng.shuffle(order)
    for i in range(1, n):
        a = order[i]
        b = order[rng.randrange(i)]
        edges.append((a, b, rng.choice(kinds)))
    # every node needs two component endpoints
    degree = {node: 0 for node in nodes}
    for a, b, _ in edges:
        degree[a] += 1
        degree[b] += 1
    for node in nodes:
        while degree[node] < 2:
            other = rng.choice([x for x in nodes if x != node])
            edges.append((node, other, rng.choice(kinds)))
            degree[node] += 1
            degree[other] += 1
    # a couple of extra edges for richer topologies
    for _ in range(rng.randint(0, 2)):
        a, b = rng.sample(nodes, 2)
        edges.append((a, b, rng.choice(kinds)))
    present = {kind for _, _, kind in edges}
    if "C" not in present:
        a, b = rng.sample(nodes, 2)
        edges.append((a, b, "C"))
    if "L" not in present:
        a, b = rng.sample(nodes, 2)
        edges.append((a, b, "L"))
    lines = [f"{kind} {a} {b} {value(kind)!r}" for a, b, kind in edges]
    return "\n".join(lines) + "\n"


def random_reduced(rng: random.Random, max_nodes=5, lossy=False):
    return reduce_nodes(parse_netlist(random_circuit_text(rng, max_nodes, lossy)))
