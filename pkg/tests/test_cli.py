import json
from importlib import resources

import numpy as np
import pytest

from oblique_vqe.cli import main
from oblique_vqe.linalg import save_matrix

from conftest import random_negdef

DATA = resources.files("oblique_vqe.data")


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "a16.json"
    save_matrix(path, random_negdef(16, 41))
    return str(path)


class TestSolveMatrix:
    def test_writes_trace_and_csv(self, matrix_file, tmp_path, capsys):
        out = tmp_path / "trace.json"
        code = main(["solve", "--model", "qomm", "--backend", "matrix",
                     "--matrix", matrix_file, "--p", "3", "--max-iters", "20000",
                     "--out", str(out), "--csv", "--no-timestamp"])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["result"]["final_eigenvalue_rel_error"] <= 1e-8
        keys = {tuple(sorted(r)) for r in payload["records"]}
        assert len(keys) == 1  # schema-stable rows
        csv_lines = (tmp_path / "trace.json.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "iteration,objective,objective_rel_err,eig_rel_err,ortho_err,evaluations"
        assert len(csv_lines) == len(payload["records"]) + 1

    def test_rerun_byte_identical(self, matrix_file, tmp_path):
        out1, out2 = tmp_path / "t1.json", tmp_path / "t2.json"
        base = ["solve", "--model", "qtpm", "--backend", "matrix", "--matrix", matrix_file,
                "--p", "2", "--mu", "5.0", "--max-iters", "3000", "--no-timestamp"]
        assert main(base + ["--out", str(out1)]) == 0
        assert main(base + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_file_exit_two(self, tmp_path, capsys):
        code = main(["solve", "--model", "qomm", "--backend", "matrix",
                     "--matrix", str(tmp_path / "nope.json"), "--p", "2"])
        assert code == 2
        assert "nope.json" in capsys.readouterr().err

    def test_numerical_failure_exit_one(self, tmp_path, capsys):
        # overflow-scale entries drive the objective to infinity
        path = tmp_path / "huge.json"
        save_matrix(path, -1e200 * np.eye(4))
        code = main(["solve", "--model", "qomm", "--backend", "matrix",
                     "--matrix", str(path), "--p", "2", "--max-iters", "50"])
        assert code == 1

    def test_weighted_model_default_weights(self, matrix_file, tmp_path):
        out = tmp_path / "w.json"
        code = main(["solve", "--model", "wql1m", "--backend", "matrix",
                     "--matrix", matrix_file, "--p", "2", "--mu1", "200.0",
                     "--max-iters", "20000", "--out", str(out), "--no-timestamp"])
        assert code == 0

    def test_multi_start(self, matrix_file, tmp_path):
        out = tmp_path / "ms.json"
        code = main(["solve", "--model", "qomm", "--backend", "matrix",
                     "--matrix", matrix_file, "--p", "2", "--max-iters", "5000",
                     "--starts", "3", "--jobs", "2", "--out", str(out), "--no-timestamp"])
        assert code == 0
        assert json.loads(out.read_text())["config"]["starts"] == 3


class TestSolveStatevector:
    def test_bundled_experiment(self, tmp_path):
        out = tmp_path / "sv.json"
        code = main(["solve", "--model", "ql1m", "--backend", "statevector",
                     "--hamiltonian", str(DATA / "h2_4q_hamiltonian.json"),
                     "--ansatz", str(DATA / "pauli_ansatz_4q.json"),
                     "--init", str(DATA / "initial_states_4q.json"),
                     "--p", "3", "--mu1", "1.0", "--max-iters", "300",
                     "--out", str(out), "--no-timestamp"])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["result"]["final_eigenvalue_rel_error"] <= 1e-6

    def test_inline_bitstrings(self, tmp_path):
        code = main(["solve", "--model", "qomm", "--backend", "statevector",
                     "--hamiltonian", str(DATA / "h2_4q_hamiltonian.json"),
                     "--ansatz", str(DATA / "pauli_ansatz_4q.json"),
                     "--init", "1100,1010,0110", "--p", "3", "--max-iters", "150",
                     "--out", str(tmp_path / "x.json"), "--no-timestamp"])
        assert code == 0

    def test_jitter_changes_start(self, tmp_path):
        out1, out2 = tmp_path / "j0.json", tmp_path / "j1.json"
        base = ["solve", "--model", "qomm", "--backend", "statevector",
                "--hamiltonian", str(DATA / "h2_4q_hamiltonian.json"),
                "--ansatz", str(DATA / "pauli_ansatz_4q.json"),
                "--init", "1100,1010,0110", "--p", "3", "--max-iters", "120",
                "--no-timestamp"]
        assert main(base + ["--out", str(out1)]) == 0
        assert main(base + ["--jitter", "0.05", "--out", str(out2)]) == 0
        r1 = json.loads(out1.read_text())["records"][0]["objective"]
        r2 = json.loads(out2.read_text())["records"][0]["objective"]
        assert r1 != r2

    def test_p_mismatch_rejected(self, capsys):
        code = main(["solve", "--model", "qomm", "--backend", "statevector",
                     "--hamiltonian", str(DATA / "h2_4q_hamiltonian.json"),
                     "--ansatz", str(DATA / "pauli_ansatz_4q.json"),
                     "--init", "1100,1010", "--p", "3"])
        assert code == 2


class TestVerifyLandscape:
    def test_bundled_scenario_passes(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["verify-landscape", str(DATA / "landscape_scenario_7x5.json"),
                     "--out", str(out), "--no-timestamp"])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["all_pass"] is True
        assert all(c["residual"] <= 1e-8 for c in report["cases"])
        saddles = [c for c in report["cases"] if c.get("classification") == "saddle"]
        assert saddles and all(c["escape_decrease"] < 0 for c in saddles)

    def test_malformed_scenario_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["verify-landscape", str(bad)]) == 2

    def test_ql1m_exactness_scenario(self, tmp_path):
        scenario = tmp_path / "l1.json"
        scenario.write_text(json.dumps({
            "model": "ql1m",
            "matrix": {"spectrum": [-8, -7, -6, -5, -4, -3, -2, -1], "seed": 2},
            "p": 3, "starts": 3, "seed": 0,
        }))
        out = tmp_path / "l1_report.json"
        assert main(["verify-landscape", str(scenario), "--out", str(out), "--no-timestamp"]) == 0
        report = json.loads(out.read_text())
        assert report["all_pass"] and len(report["cases"]) == 3


class TestResourceCount:
    def test_formula_examples(self, capsys):
        assert main(["resource-count", "--model", "qomm", "--p", "3", "--n-terms", "5"]) == 0
        assert json.loads(capsys.readouterr().out) == {
            "model": "qomm", "hamiltonian_circuits": 45, "regularization_circuits": 6}
        assert main(["resource-count", "--model", "ql1m", "--p", "1", "--n-terms", "9"]) == 0
        assert json.loads(capsys.readouterr().out) == {
            "model": "ql1m", "hamiltonian_circuits": 9, "regularization_circuits": 0}

    def test_term_count_from_file(self, capsys):
        assert main(["resource-count", "--model", "qtpm", "--p", "3",
                     "--hamiltonian", str(DATA / "h2_4q_hamiltonian.json")]) == 0
        payload = json.loads(capsys.readouterr().out)
        n_terms = len(json.loads((DATA / "h2_4q_hamiltonian.json").read_text())["terms"])
        assert payload["hamiltonian_circuits"] == 3 * n_terms
