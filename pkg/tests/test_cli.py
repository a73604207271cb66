import json
import math
import os

import pytest

from relatom import cli


@pytest.fixture(autouse=True)
def serial_workers(monkeypatch):
    # keep the sweep in-process so the cached universal solve is reused
    monkeypatch.setenv("SEMICLASSIC_THREADS", "1")


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_subcommand_is_usage_error(capsys):
    code, _, err = run(capsys, )
    assert code == 1
    assert "usage" in err.lower()


class TestTfSolve:
    def test_neutral_prints_slope(self, capsys, tmp_path):
        out_path = tmp_path / "sol.json"
        code, out, _ = run(capsys, "tf-solve", "--lambda", "1", "--Z", "1",
                           "--out", str(out_path))
        assert code == 0
        slope = float(out.split("slope0 = ")[1].splitlines()[0])
        assert abs(slope - (-1.588071)) < 1e-4
        doc = json.loads(out_path.read_text())
        assert doc["mu"] == 0.0
        assert (tmp_path / "sol.json.meta.json").exists()

    def test_ion_prints_positive_mu(self, capsys):
        code, out, _ = run(capsys, "tf-solve", "--lambda", "0.5", "--Z", "10")
        assert code == 0
        mu = float(out.split("mu = ")[1].splitlines()[0])
        assert mu > 0.0

    def test_missing_lambda_is_usage_error(self, capsys):
        code, _, err = run(capsys, "tf-solve", "--Z", "1")
        assert code == 1
        assert "usage" in err.lower()


class TestVerify:
    def test_specfun_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "specfun")
        assert code == 0
        assert "k2_second_moment" in out
        assert "PASS" in out
        assert "FAIL" not in out

    def test_identity_suite_prints_diagnostic(self, capsys):
        code, out, _ = run(capsys, "verify", "identity")
        assert code == 0
        assert "identity chain ratio" in out
        assert "2 sqrt2/3" in out

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "nonsense")
        assert code == 1

    def test_failing_check_exits_three(self, capsys, monkeypatch):
        from relatom import checks
        from relatom.checks import CheckResult

        def broken():
            return [CheckResult("forced failure", 1.0, 0.0, 1e-12, False)]

        monkeypatch.setattr(checks, "SUITES", dict(checks.SUITES, specfun=broken))
        code, out, err = run(capsys, "verify", "specfun")
        assert code == 3
        assert "forced failure" in err


class TestBudget:
    def test_csv_contract_and_determinism(self, capsys, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        code1, out, _ = run(capsys, "budget", "--alpha", "1e-3", "--csv", str(p1))
        code2, _, _ = run(capsys, "budget", "--alpha", "1e-3", "--csv", str(p2))
        assert code1 == code2 == 0
        assert p1.read_bytes() == p2.read_bytes()
        header = p1.read_text().splitlines()[0]
        assert header == "name,reference,alpha,value,exponent"
        assert "binding term" in out

    def test_violation_exit_code_with_file(self, capsys, tmp_path):
        path = tmp_path / "v.csv"
        code, _, err = run(capsys, "budget", "--alpha", "1e-3", "--r", "0.85",
                           "--csv", str(path))
        assert code == 4
        assert "inner_zone" in err
        assert path.exists()  # the budget is still written, violation flagged

    def test_json_output(self, capsys, tmp_path):
        path = tmp_path / "b.json"
        code, _, _ = run(capsys, "budget", "--Z", "636.6", "--json", str(path))
        assert code == 0
        doc = json.loads(path.read_text())
        assert len(doc["terms"]) == 9
        assert doc["total"] > 0


class TestAsymptotics:
    def test_single_row_smoke(self, capsys, tmp_path):
        path = tmp_path / "a.csv"
        code, _, _ = run(capsys, "asymptotics", "--Z", "137", "--csv", str(path))
        assert code == 0
        header, row = path.read_text().splitlines()
        assert header.split(",")[:6] == ["Z", "alpha", "E_lower", "E_ref",
                                         "ratio", "budget_total"]
        cells = row.split(",")
        assert cells[-1] == "ok"
        assert all(math.isfinite(float(c)) for c in cells[:-1])
        alpha = float(cells[1])
        assert abs(alpha - (2.0 / math.pi) / 137.0) < 1e-15

    def test_lambda_scaling_of_reference(self, capsys, tmp_path):
        rows = {}
        for lam in (1.0, 0.5):
            path = tmp_path / f"lam{lam}.csv"
            code, _, _ = run(capsys, "asymptotics", "--Z", "10", "--lambda",
                             str(lam), "--csv", str(path))
            assert code == 0
            rows[lam] = path.read_text().splitlines()[1].split(",")
        e1 = float(rows[1.0][3])
        e05 = float(rows[0.5][3])
        # E_ref(lam)/E_ref(1) = C_TF(lam)/C_TF(1), Z-independent
        from relatom import thomas_fermi as tf

        c1 = -tf.tf_energy(tf.solve(tf.TFParams(lam=1.0, Z=1.0)))
        c05 = -tf.tf_energy(tf.solve(tf.TFParams(lam=0.5, Z=1.0)))
        assert abs(e05 / e1 - c05 / c1) < 1e-9

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"z_values": [20.0], "delta": 0.5}))
        path = tmp_path / "out.csv"
        code, _, _ = run(capsys, "asymptotics", "--config", str(cfg),
                         "--delta", "0.4", "--csv", str(path))
        assert code == 0
        row = path.read_text().splitlines()[1].split(",")
        assert abs(float(row[1]) - 0.4 / 20.0) < 1e-15  # flag overrode the file

    def test_delta_out_of_range(self, capsys):
        code, _, err = run(capsys, "asymptotics", "--Z", "10", "--delta", "0.7")
        assert code == 1
        assert "2/pi" in err

    def test_failed_row_is_marked_and_exit_two(self, capsys, tmp_path, monkeypatch):
        from relatom import thomas_fermi as tf
        from relatom.errors import ShootingFailure

        real_solve = tf.solve

        def flaky(params, tol=1e-7):
            if params.Z == 20.0:
                raise ShootingFailure("forced")
            return real_solve(params, tol)

        monkeypatch.setattr(cli.tf, "solve", flaky)
        path = tmp_path / "rows.csv"
        code, _, err = run(capsys, "asymptotics", "--Z", "10", "20", "--csv", str(path))
        assert code == 2
        rows = path.read_text().splitlines()[1:]
        assert rows[0].endswith(",ok")
        assert rows[1].endswith(",failed:ShootingFailure")
        assert "nan" in rows[1]

    def test_parallel_matches_serial_bytes(self, capsys, tmp_path, monkeypatch):
        serial = tmp_path / "serial.csv"
        code, _, _ = run(capsys, "asymptotics", "--Z", "10", "25", "--csv", str(serial))
        assert code == 0
        monkeypatch.setenv("SEMICLASSIC_THREADS", "2")
        parallel = tmp_path / "parallel.csv"
        code, _, _ = run(capsys, "asymptotics", "--Z", "10", "25", "--csv", str(parallel))
        assert code == 0
        assert serial.read_bytes() == parallel.read_bytes()
