import csv
import io
import json
import os
import subprocess
import sys

import pytest

from conftest import geometric_rate
from renewal_ldp.cli import ConfigError, parse_grid, run
from renewal_ldp.model import geometric, model_to_dict


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def periodic_model(tmp_path):
    path = tmp_path / "periodic.json"
    path.write_text(json.dumps({"head_weights": [0.0, 1.0], "rewards": {"head": [[1.0], [1.0]]}}))
    return str(path)


class TestGrids:
    def test_linspace(self):
        assert parse_grid("0:1:5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]

    @pytest.mark.parametrize("text", ["1:0:3", "0:1", "a:b:c", "0:0:2"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_grid(text)


class TestCommands:
    def test_rate_matches_closed_form(self, capsys):
        code, out, _ = _run(capsys, "rate", "--preset", "geometric", "--w-grid", "0.05:0.95:19")
        assert code == 0
        rows = _rows(out)
        assert len(rows) == 19
        for row in rows:
            w = float(row["w"])
            assert float(row["I"]) == pytest.approx(geometric_rate(w), abs=1e-9)

    def test_phase_diagram_labels(self, capsys):
        params = json.dumps({"a": 0, "b": 0, "c": 2.5, "eps": 0})
        code, out, _ = _run(capsys, "phase-diagram", "--preset", "poland-scheraga", "--params", params,
                            "--beta", "-1:1:5")
        assert code == 0
        rows = _rows(out)
        assert [float(r["beta"]) for r in rows] == [-1.0, -0.5, 0.0, 0.5, 1.0]
        assert {r["label"] for r in rows} == {"discontinuous"}
        assert float(rows[0]["w_c"]) > 0
        assert float(rows[0]["beta_c"]) > -1e300

    def test_free_energy_columns(self, capsys):
        code, out, _ = _run(capsys, "free-energy", "--preset", "zeta", "--params", '{"c": 2.5}',
                            "--k-grid", "-1:1:3")
        assert code == 0
        rows = _rows(out)
        assert list(rows[0]) == ["k", "z", "nu", "theta", "in_theta", "subdiff"]
        assert rows[0]["in_theta"] == "true" and float(rows[0]["z"]) == 0.0

    def test_exact_probabilities(self, capsys):
        code, out, _ = _run(capsys, "exact", "--preset", "geometric", "--t", "4")
        assert code == 0
        probs = {int(r["n"]): float(r["probability"]) for r in _rows(out)}
        assert probs[2] == pytest.approx(3 / 8, abs=1e-15)

    def test_exact_rates(self, capsys):
        code, out, _ = _run(capsys, "exact", "--preset", "geometric", "--t", "100,200", "--w-grid", "0.5:0.75:2")
        assert code == 0
        assert len(_rows(out)) == 4

    def test_sample_rows(self, capsys):
        code, out, _ = _run(capsys, "sample", "--preset", "dirac", "--t", "6", "--samples", "3")
        assert code == 0
        rows = _rows(out)
        assert len(rows) == 3
        assert all(r["n_renewals"] == "6" for r in rows)

    def test_sample_deviation_json(self, capsys):
        code, out, _ = _run(capsys, "sample", "--preset", "geometric", "--t", "50,100", "--delta", "0.1",
                            "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["command"] == "sample"
        assert doc["metadata"]["rng"] == "numpy.random.Philox"
        assert [row[0] for row in doc["rows"]] == [50, 100]

    def test_validate_from_file(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(json.dumps(model_to_dict(geometric())))
        code, out, _ = _run(capsys, "validate", "--model", str(path))
        assert code == 0
        assert "passed,true" in out

    def test_verify_dirac(self, capsys):
        code, out, _ = _run(capsys, "verify", "--preset", "dirac")
        assert code == 0
        assert all(r["passed"] == "true" for r in _rows(out))

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "rate.csv"
        code, out, _ = _run(capsys, "rate", "--preset", "geometric", "--w-grid", "0.5:0.5:1", "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text().startswith("w,I,branch,dual_k")


class TestExitCodes:
    def test_unknown_preset(self, capsys):
        assert _run(capsys, "rate", "--preset", "nope", "--w-grid", "0:1:3")[0] == 2

    def test_bad_grid(self, capsys):
        assert _run(capsys, "rate", "--preset", "geometric", "--w-grid", "1:0:3")[0] == 2

    def test_missing_file(self, capsys, tmp_path):
        assert _run(capsys, "validate", "--model", str(tmp_path / "missing.json"))[0] == 2

    def test_bad_tolerance(self, capsys):
        assert _run(capsys, "verify", "--preset", "dirac", "--tol", "1e-16")[0] == 2

    def test_unknown_command(self, capsys):
        assert _run(capsys, "frobnicate")[0] == 2

    def test_no_path_is_numeric_failure(self, capsys, periodic_model):
        assert _run(capsys, "exact", "--model", periodic_model, "--t", "5")[0] == 3

    def test_verification_failure(self, capsys, periodic_model):
        assert _run(capsys, "validate", "--model", periodic_model)[0] == 1
        assert _run(capsys, "verify", "--model", periodic_model)[0] == 1


def _cli(args, threads):
    env = dict(os.environ, RENEWAL_LDP_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "renewal_ldp", *args], env=env, capture_output=True, check=True).stdout


@pytest.mark.parametrize("args", [
    ["rate", "--preset", "zeta", "--params", '{"c": 2.5, "beta": 0.2}', "--w-grid", "0.1:0.9:9"],
    ["sample", "--preset", "geometric", "--t", "40", "--samples", "25000", "--seed", "7"],
])
def test_byte_identical_across_threads(args):
    one = _cli(args, 1)
    assert one == _cli(args, 1)
    assert one == _cli(args, 4)
