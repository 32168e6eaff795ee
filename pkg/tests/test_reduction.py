import random

import numpy as np
import pytest

from circuitq import (
    AnalysisError,
    BridgeSingularityError,
    parse_netlist,
    reduce_nodes,
    transfer_function,
    two_port,
)
from circuitq.reduction import (
    admittance_between,
    element_admittance,
    graph_transfer,
    group_parallel,
    star_mesh_eliminate,
)
from circuitq.symbolic import expr as ex

from .conftest import random_reduced
from .oracles import solve_admittance, solve_transfer


def _rc(text):
    return reduce_nodes(parse_netlist(text))


class TestGroupParallel:
    def test_parallel_capacitors_merge(self):
        rc = _rc("C 0 1 1e-13\nC 0 1 2e-13\nL 0 1 1e-9\n")
        g = group_parallel(rc)
        y = g.edge(0, 1)
        w = 3e10
        got = ex.evaluate(y, {"w": w})
        expected = 1j * 3e-13 * w + 1 / (1j * 1e-9 * w)
        assert got == pytest.approx(expected, rel=1e-12)
        assert len(g.edges()) == 1

    def test_provenance_recorded(self):
        rc = _rc("C 0 1 1e-13\nC 0 1 2e-13\nL 0 1 1e-9\n")
        g = group_parallel(rc)
        assert set(g.provenance[frozenset((0, 1))]) == {0, 1, 2}

    def test_edges_match_member_sums(self):
        rng = random.Random(5)
        for _ in range(30):
            rc = random_reduced(rng, lossy=True)
            g = group_parallel(rc)
            w = rng.uniform(1e9, 1e11)
            sums = {}
            for i, e in enumerate(rc.elements):
                key = frozenset((e.node_minus, e.node_plus))
                y = ex.evaluate(element_admittance(e), {"w": w})
                sums[key] = sums.get(key, 0) + y
            for key, y in g.edges().items():
                assert ex.evaluate(y, {"w": w}) == pytest.approx(sums[key], rel=1e-12)


class TestStarMesh:
    def test_degree_two_series_rule(self):
        rc = _rc("L 0 1 1e-9\nC 1 2 1e-13\nC 0 2 5e-14\nL 0 2 2e-9\n")
        g = group_parallel(rc)
        out = star_mesh_eliminate(g, 1)
        w = 2e10
        y1 = 1 / (1j * 1e-9 * w)
        y2 = 1j * 1e-13 * w
        series = y1 * y2 / (y1 + y2)
        direct = 1j * 5e-14 * w + 1 / (1j * 2e-9 * w)
        assert ex.evaluate(out.edge(0, 2), {"w": w}) == pytest.approx(
            series + direct, rel=1e-12
        )
        assert 1 not in out.adjacency

    def test_five_node_star_becomes_mesh(self):
        # center node 0 with four arms; the caption formula Yx*Yy/sum
        lines = [
            "L 0 1 1e-9",
            "C 0 2 1e-13",
            "L 0 3 2e-9",
            "C 0 4 2e-13",
            # keep the outer nodes valid with a ring
            "C 1 2 3e-13",
            "L 2 3 3e-9",
            "C 3 4 4e-13",
            "L 4 1 4e-9",
        ]
        rc = _rc("\n".join(lines) + "\n")
        g = group_parallel(rc)
        out = star_mesh_eliminate(g, 0)
        w = 1.7e10
        arms = {
            1: 1 / (1j * 1e-9 * w),
            2: 1j * 1e-13 * w,
            3: 1 / (1j * 2e-9 * w),
            4: 1j * 2e-13 * w,
        }
        total = sum(arms.values())
        ring = {
            frozenset((1, 2)): 1j * 3e-13 * w,
            frozenset((2, 3)): 1 / (1j * 3e-9 * w),
            frozenset((3, 4)): 1j * 4e-13 * w,
            frozenset((4, 1)): 1 / (1j * 4e-9 * w),
        }
        assert sorted(out.adjacency) == [1, 2, 3, 4]
        for a in (1, 2, 3, 4):
            for b in (1, 2, 3, 4):
                if a >= b:
                    continue
                expected = arms[a] * arms[b] / total + ring.get(frozenset((a, b)), 0)
                assert ex.evaluate(out.edge(a, b), {"w": w}) == pytest.approx(
                    expected, rel=1e-12
                )

    def test_elimination_preserves_two_terminal_admittance(self):
        rng = random.Random(11)
        checked = 0
        for _ in range(40):
            rc = random_reduced(rng, lossy=True)
            if rc.node_count < 3:
                continue
            g = group_parallel(rc)
            keep = rng.sample(range(rc.node_count), 2)
            victim = next(
                n for n in range(rc.node_count) if n not in keep
            )
            before = None
            after = star_mesh_eliminate(g, victim)
            for _ in range(5):
                w = complex(rng.uniform(1e9, 1e11), rng.uniform(-1e10, 1e10))
                oracle = solve_admittance(rc, keep[0], keep[1], w, {})
                from circuitq.reduction import graph_admittance_between

                reduced = graph_admittance_between(after, keep[0], keep[1])
                got = ex.evaluate(reduced, {"w": w})
                assert got == pytest.approx(oracle, rel=1e-9)
                checked += 1
        assert checked >= 100


class TestAdmittanceBetween:
    def test_parallel_lc(self):
        rc = _rc("C 0 1 1e-13\nL 0 1 1e-8\n")
        y = admittance_between(rc, 0, 1)
        w = 2.3e10
        assert ex.evaluate(y, {"w": w}) == pytest.approx(
            1j * 1e-13 * w + 1 / (1j * 1e-8 * w), rel=1e-12
        )

    def test_three_node_worked_reduction(self):
        # junction+capacitor on 0-1, coupling capacitor 1-2, LC on 2-0;
        # eliminating the middle node gives the series-combined edge in
        # parallel with the direct one
        rc = _rc("J 0 1 1e-8\nC 0 1 1e-13\nC 1 2 1e-15\nC 2 0 1e-13\nL 2 0 1e-8\n")
        y = admittance_between(rc, 0, 1)
        for w in (1e10, 3.2e10, 7e10):
            oracle = solve_admittance(rc, 0, 1, w, {})
            assert ex.evaluate(y, {"w": w}) == pytest.approx(oracle, rel=1e-10)

    def test_symmetry(self):
        rng = random.Random(13)
        for _ in range(10):
            rc = random_reduced(rng, lossy=True)
            a, b = 0, rc.node_count - 1
            y_ab = admittance_between(rc, a, b)
            y_ba = admittance_between(rc, b, a)
            w = rng.uniform(1e9, 1e11)
            assert ex.evaluate(y_ab, {"w": w}) == pytest.approx(
                ex.evaluate(y_ba, {"w": w}), rel=1e-10
            )

    def test_matches_kirchhoff_solve(self):
        rng = random.Random(17)
        for _ in range(25):
            rc = random_reduced(rng, max_nodes=6, lossy=True)
            a, b = rng.sample(range(rc.node_count), 2)
            y = ex.compile_expr(admittance_between(rc, a, b))
            for _ in range(10):
                w = complex(rng.uniform(1e9, 1e11), rng.uniform(-1e10, 1e10))
                assert y({"w": w}) == pytest.approx(
                    solve_admittance(rc, a, b, w, {}), rel=1e-8
                )


class TestTransfer:
    def test_identity_and_inversion(self):
        rc = _rc("C 0 1 1e-13\nJ 0 1 1e-8\nC 1 2 1e-15\nC 2 0 1e-13\nL 2 0 1e-8\n")
        t_same = transfer_function(rc, 0, 1)
        assert ex.evaluate(t_same, {"w": 1e10}) == pytest.approx(1.0)
        g = group_parallel(rc)
        t_flip = graph_transfer(g, (0, 1), (1, 0))
        assert ex.evaluate(t_flip, {"w": 1e10}) == pytest.approx(-1.0)

    def test_shared_node_voltage_divider(self):
        # ports (0,1) and (0,2) share the ground node: T = 1/(1 + Yp/Ya)
        rc = _rc("L 0 1 1e-9\nC 1 2 1e-13\nC 2 0 2e-13\nL 0 2 4e-9\nC 0 1 5e-14\n")
        t = transfer_function(rc, 0, 3)  # from inductor L(0,1) to L(0,2)
        w = 1.3e10
        y_series = 1j * 1e-13 * w
        y_shunt = 1j * 2e-13 * w + 1 / (1j * 4e-9 * w)
        expected = 1 / (1 + y_shunt / y_series)
        assert ex.evaluate(t, {"w": w}) == pytest.approx(expected, rel=1e-10)

    def test_matches_kirchhoff_solve(self):
        rng = random.Random(19)
        count = 0
        while count < 25:
            rc = random_reduced(rng, max_nodes=6, lossy=True)
            ids = rng.sample(range(len(rc.elements)), 2)
            try:
                t = ex.compile_expr(transfer_function(rc, ids[0], ids[1]))
            except (BridgeSingularityError, AnalysisError):
                continue
            count += 1
            for _ in range(10):
                w = complex(rng.uniform(1e9, 1e11), rng.uniform(-1e10, 1e10))
                assert t({"w": w}) == pytest.approx(
                    solve_transfer(rc, ids[0], ids[1], w, {}), rel=1e-8
                )

    def test_cascade_multiplicative_on_ladder(self):
        lines = [
            "L 0 1 1e-9",
            "C 1 0 1e-13",
            "L 1 2 2e-9",
            "C 2 0 2e-13",
            "L 2 3 3e-9",
            "C 3 0 3e-13",
        ]
        rc = _rc("\n".join(lines) + "\n")
        # shunt capacitors are elements 1, 3, 5 with ports (k, 0)
        t_ab = ex.compile_expr(transfer_function(rc, 1, 3))
        t_bc = ex.compile_expr(transfer_function(rc, 3, 5))
        t_ac = ex.compile_expr(transfer_function(rc, 1, 5))
        rng = np.random.default_rng(2)
        for _ in range(10):
            w = complex(rng.uniform(1e9, 5e10), rng.uniform(-1e9, 1e9))
            b = {"w": w}
            assert t_ac(b) == pytest.approx(t_ab(b) * t_bc(b), rel=1e-9)

    def test_reciprocity_determinant(self):
        rng = random.Random(23)
        checked = 0
        while checked < 15:
            rc = random_reduced(rng, max_nodes=6, lossy=True)
            ids = rng.sample(range(len(rc.elements)), 2)
            e0, e1 = rc.elements[ids[0]], rc.elements[ids[1]]
            try:
                tp = two_port(rc, ids[0], ids[1])
            except (BridgeSingularityError, AnalysisError):
                continue
            checked += 1
            det = ex.sub(ex.mul(tp.a, tp.d), ex.mul(tp.b, tp.c))
            f = ex.compile_expr(det)
            for _ in range(5):
                w = complex(rng.uniform(1e9, 1e11), rng.uniform(-1e9, 1e9))
                assert abs(f({"w": w}) - 1) < 1e-8

    def test_balanced_bridge_raises(self):
        text = (
            "J 1 2 1e-9\nJ 2 3 1e-9\nJ 3 4 1e-9\nJ 4 1 1e-9\n"
            "C 1 3 5e-14\nC 2 4 5e-14\nL 1 3 2e-8\n"
        )
        rc = _rc(text)
        with pytest.raises(BridgeSingularityError, match="balanced bridge"):
            transfer_function(rc, 4, 5)

    def test_perturbed_bridge_passes(self):
        text = (
            "J 1 2 1e-9\nJ 2 3 1.07e-9\nJ 3 4 1e-9\nJ 4 1 1e-9\n"
            "C 1 3 5e-14\nC 2 4 5e-14\nL 1 3 2e-8\n"
        )
        rc = _rc(text)
        t = ex.compile_expr(transfer_function(rc, 4, 5))
        for w in (1e10, 4e10):
            assert t({"w": w}) == pytest.approx(
                solve_transfer(rc, 4, 5, w, {}), rel=1e-8
            )
