import json
import math

import numpy as np
import pytest

from circuitq.cli import main

from .conftest import FIG1_NETLIST


@pytest.fixture()
def fig1_path(tmp_path):
    p = tmp_path / "fig1.txt"
    p.write_text(FIG1_NETLIST)
    return str(p)


GOLDEN_TABLE = (
    "mode |   freq.  |   diss.  |   anha.  |\n"
    "   0 | 4.99 GHz | 19.1 kHz | 10.5 kHz |\n"
    "   1 | 5.28 GHz |   189 Hz |  189 MHz |\n"
    "\n"
    "Kerr coefficients\n"
    "diagonal = Kerr\n"
    "off-diagonal = cross-Kerr\n"
    "mode |     0    |     1    |\n"
    "   0 | 10.5 kHz |          |\n"
    "   1 | 2.82 MHz |  189 MHz |\n"
)


class TestModes:
    def test_table_golden_bytes(self, fig1_path, capsys):
        code = main(["modes", fig1_path, "--set", "Lj=9e-9", "--format", "table"])
        assert code == 0
        assert capsys.readouterr().out == GOLDEN_TABLE

    def test_unbound_symbol_exit_2(self, fig1_path, capsys):
        code = main(["modes", fig1_path])
        assert code == 2
        assert "Lj" in capsys.readouterr().err

    def test_json_matches_library(self, fig1_path, capsys):
        code = main(["modes", fig1_path, "--set", "Lj=9e-9", "--format", "json"])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        from circuitq import CircuitAnalysis

        report = CircuitAnalysis.from_netlist(FIG1_NETLIST).report_dict({"Lj": 9e-9})
        assert body["modes"] == report["modes"]
        assert body["chi_Hz"] == report["chi_Hz"]

    def test_missing_file_exit_2(self, capsys):
        assert main(["modes", "/nonexistent/netlist.txt"]) == 2

    def test_analysis_error_exit_1(self, tmp_path, capsys):
        p = tmp_path / "overdamped.txt"
        p.write_text("L 0 1 10e-9\nC 0 1 100e-15\nR 0 1 50\n")
        assert main(["modes", str(p)]) == 1

    def test_json_error_payload(self, fig1_path, capsys):
        code = main(["modes", fig1_path, "--format", "json"])
        assert code == 2
        out = capsys.readouterr().out
        body = json.loads(out)
        assert body["error"]["code"] == "usage"
        assert "Lj" in body["error"]["message"]


class TestSweep:
    def test_csv_row_count_and_header(self, fig1_path, capsys):
        code = main(
            ["sweep", fig1_path, "--sweep", "Lj=9e-9:11e-9:101", "--format", "csv"]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "Lj,f0,f1,k0,k1,A0,A1,chi01"
        assert len(lines) == 102

    def test_csv_values_round_trip(self, fig1_path, capsys):
        main(["sweep", fig1_path, "--sweep", "Lj=9e-9:11e-9:5", "--format", "csv"])
        lines = capsys.readouterr().out.strip().splitlines()
        first = [float(x) for x in lines[1].split(",")]
        from circuitq import CircuitAnalysis

        f, k, a, chi = CircuitAnalysis.from_netlist(FIG1_NETLIST).f_k_A_chi(
            {"Lj": 9e-9}
        )
        assert first[0] == 9e-9
        assert first[1] == f[0] and first[2] == f[1]
        assert first[7] == chi[0][1]

    def test_bad_sweep_spec_exit_2(self, fig1_path):
        assert main(["sweep", fig1_path, "--sweep", "Lj=1:2"]) == 2


class TestHamiltonianCmd:
    def test_json_eigenenergies(self, fig1_path, capsys):
        code = main(
            [
                "hamiltonian",
                fig1_path,
                "--set",
                "Lj=10e-9",
                "--modes",
                "0,1",
                "--excitations",
                "6,6",
                "--taylor",
                "4",
                "--n-eigenenergies",
                "4",
                "--format",
                "json",
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["eigenenergies_Hz"]) == 4
        assert body["eigenenergies_Hz"] == sorted(body["eigenenergies_Hz"])

    def test_mismatched_lengths_exit_2(self, fig1_path):
        assert (
            main(
                [
                    "hamiltonian",
                    fig1_path,
                    "--set",
                    "Lj=10e-9",
                    "--modes",
                    "0,1",
                    "--excitations",
                    "6",
                ]
            )
            == 2
        )


class TestNormalMode:
    def test_csv_covers_all_components(self, fig1_path, capsys):
        code = main(
            ["normal-mode", fig1_path, "--set", "Lj=10e-9", "--mode", "0"]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 8  # header + 7 components

    def test_json_quantity(self, fig1_path, capsys):
        code = main(
            [
                "normal-mode",
                fig1_path,
                "--set",
                "Lj=10e-9",
                "--quantity",
                "charge",
                "--format",
                "json",
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["quantity"] == "charge"
        assert len(body["phasors"]) == 7


class TestBench:
    def test_csv_shape(self, capsys):
        code = main(
            ["bench", "--min-nodes", "4", "--max-nodes", "6", "--resistive", "both"]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "nodes,resistive,init_seconds"
        assert len(lines) == 1 + 3 * 2
        for line in lines[1:]:
            nodes, resistive, seconds = line.split(",")
            assert 4 <= int(nodes) <= 6
            assert resistive in ("0", "1")
            assert float(seconds) > 0
