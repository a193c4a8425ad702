import json

import pytest

from hamlearn.cli import main
from hamlearn.pauli import coefficient_norms, parse_hamiltonian_text


def run_cli(*argv):
    return main(list(argv))


class TestGen:
    def test_writes_two_line_file(self, tmp_path):
        out = tmp_path / "h.txt"
        assert run_cli("gen", "--n", "2", "--m", "2", "--seed", "7", "--out", str(out)) == 0
        h = parse_hamiltonian_text(out.read_text())
        assert h.supp == 2
        assert h.n == 2

    def test_byte_identical_for_same_seed(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        run_cli("gen", "--n", "3", "--m", "4", "--seed", "5", "--out", str(a))
        run_cli("gen", "--n", "3", "--m", "4", "--seed", "5", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_printed_norms_match_reload(self, tmp_path, capsys):
        out = tmp_path / "h.txt"
        run_cli("gen", "--n", "2", "--m", "3", "--seed", "9", "--out", str(out))
        line = capsys.readouterr().out.strip()
        h = parse_hamiltonian_text(out.read_text())
        l1, l2, linf = coefficient_norms(h)
        assert line == f"terms={h.supp} l1={l1!r} l2={l2!r} linf={linf!r}"

    def test_invalid_range_is_usage_error(self):
        with pytest.raises(SystemExit):
            run_cli("gen", "--n", "1", "--m", "9", "--seed", "0")


class TestLearn:
    def test_success_exit_zero(self, tmp_path):
        h_file = tmp_path / "h.txt"
        run_cli("gen", "--n", "2", "--m", "2", "--seed", "7", "--out", str(h_file))
        out = tmp_path / "report.json"
        code = run_cli(
            "learn", "--in", str(h_file), "--m", "2", "--T", "1", "--epsilon", "0.03125",
            "--rho", "8", "--seed", "3", "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["schema"] == 1
        assert report["final_error"] <= 0.03125
        assert report["ledger"]["t_min"] == 1.0
        assert report["params"]["rho"] == 8.0
        assert report["params"]["literal"]["c"] != report["params"]["c"]

    def test_coarse_run_uses_only_sql(self, tmp_path, capsys):
        h_file = tmp_path / "h.txt"
        run_cli("gen", "--n", "2", "--m", "2", "--seed", "1", "--out", str(h_file))
        out = tmp_path / "report.json"
        assert run_cli(
            "learn", "--in", str(h_file), "--m", "2", "--epsilon", "0.5",
            "--seed", "2", "--out", str(out),
        ) == 0
        report = json.loads(out.read_text())
        assert [it["branch"] for it in report["iterations"]] == ["sql"]

    def test_missing_file_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit):
            run_cli("learn", "--in", str(tmp_path / "nope.txt"), "--epsilon", "0.1", "--seed", "0")

    def test_seed_required(self):
        with pytest.raises(SystemExit):
            run_cli("learn", "--n", "1", "--m", "1", "--epsilon", "0.1")

    def test_byte_identical_reports(self, tmp_path):
        h_file = tmp_path / "h.txt"
        run_cli("gen", "--n", "2", "--m", "2", "--seed", "4", "--out", str(h_file))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["learn", "--in", str(h_file), "--m", "2", "--epsilon", "0.0625", "--seed", "11"]
        run_cli(*argv, "--out", str(a))
        run_cli(*argv, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_sampled_mode_runs(self, tmp_path):
        h_file = tmp_path / "h.txt"
        run_cli("gen", "--n", "1", "--m", "1", "--seed", "8", "--out", str(h_file))
        out = tmp_path / "r.json"
        code = run_cli(
            "learn", "--in", str(h_file), "--m", "1", "--epsilon", "0.25",
            "--mode", "sampled", "--seed", "1", "--out", str(out),
        )
        report = json.loads(out.read_text())
        assert report["iterations"]
        assert code in (0, 1)  # statistical run; report must still be well-formed


class TestSweep:
    EPSILONS = "0.0625,0.03125,0.015625,0.0078125"

    def test_csv_shape_and_slope(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = run_cli(
            "sweep", "--n", "2", "--m", "2", "--T", "1", "--seed", "5",
            "--epsilons", self.EPSILONS, "--slope-label", "sql", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("epsilon,t_tot,t_min,queries,final_error")
        assert len(lines) == 5
        stdout = capsys.readouterr().out
        assert "slope=" in stdout
        slope = float(stdout.split("slope=")[1].split()[0])
        assert 1.7 <= slope <= 2.3

    def test_too_few_points_usage_error(self):
        with pytest.raises(SystemExit):
            run_cli("sweep", "--n", "2", "--m", "2", "--seed", "5", "--epsilons", "0.5")

    def test_byte_identical_csv(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = [
            "sweep", "--n", "2", "--m", "2", "--seed", "6",
            "--epsilons", self.EPSILONS,
        ]
        run_cli(*argv, "--out", str(a))
        run_cli(*argv, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestVerify:
    def test_all_pass_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "verify.json"
        code = run_cli("verify", "--trials", "25", "--seed", "1", "--out", str(out))
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["checks"]) == 11
        assert all(c["pass"] for c in payload["checks"])
        table = capsys.readouterr().out
        assert "long_time_exact" in table

    def test_tampered_slack_exit_one(self, capsys):
        assert run_cli("verify", "--checks", "duhamel", "--trials", "10", "--slack", "-1") == 1

    def test_unknown_check_usage_error(self):
        with pytest.raises(SystemExit):
            run_cli("verify", "--checks", "bogus")

    def test_subset_selection(self, capsys):
        assert run_cli("verify", "--checks", "power_growth,duhamel", "--trials", "10") == 0
        table = capsys.readouterr().out
        assert "power_growth" in table and "duhamel" in table
        assert "trotter" not in table

    def test_byte_identical_json(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli("verify", "--checks", "trotter", "--trials", "15", "--seed", "2", "--out", str(a))
        run_cli("verify", "--checks", "trotter", "--trials", "15", "--seed", "2", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
