from __future__ import annotations

import csv
import io
import json

import pytest

from sturm import cli
from sturm.config import bundled_names, load_raw, validate
from sturm.errors import ConfigError, ConvergenceError

TABLE_L0 = [-92.264199, -54.224609, -26.210528, -6.5302229]
BOHR = [-0.5, -0.125, -1 / 18, -1 / 32, -1 / 50]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, (json.loads(out) if out else None), err


@pytest.fixture
def write_config(tmp_path):
    def make(data, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data) if not isinstance(data, str) else data)
        return str(path)

    return make


class TestConfigs:
    def test_bundled_blocks(self, capsys):
        names = bundled_names()
        for eq in ("schrodinger", "kg"):
            for l in range(3):
                assert f"table1_{eq}_l{l}" in names
        for j in ("1_2", "3_2", "5_2"):
            assert f"table1_dirac_j{j}" in names
        code, out, _ = run(capsys, "--list-configs")
        assert code == 0 and out.split() == names

    def test_bundled_configs_validate(self):
        for name in bundled_names():
            validate(load_raw(name))

    def test_hash_ignores_output(self):
        raw = load_raw("hydrogen_check")
        a = validate(raw)
        b = validate({**raw, "output": {"format": "csv", "path": "x.csv"}})
        c = validate({**raw, "coulomb_Z": -2.0})
        assert a.digest() == b.digest() != c.digest()

    @pytest.mark.parametrize(
        "patch, field",
        [
            ({"colour": 1}, "colour"),
            ({"j": 0.5}, "l"),
            ({"basis": {"N": 0}}, "basis.N"),
            ({"basis": {"b": -1.0}}, "basis.b"),
            ({"search": {"bound_interval": [-1.0, 1.0]}}, "search.bound_interval"),
            ({"potential": [{"amp": 1.0, "power": -1}]}, "potential[0]"),
            ({"output": {"format": "xml"}}, "output.format"),
            ({"constants": {"c": 137.0, "alpha": 0.0073}}, "constants"),
        ],
    )
    def test_validation_paths(self, patch, field):
        raw = load_raw("hydrogen_check")
        for key, value in patch.items():
            raw[key] = {**raw.get(key, {}), **value} if isinstance(value, dict) and key in raw else value
        with pytest.raises(ConfigError) as info:
            validate(raw)
        assert info.value.path == field


class TestExitCodes:
    def test_bad_json(self, capsys, write_config):
        code, _, err = run(capsys, "solve", "--config", write_config("{not json"))
        assert code == cli.EXIT_CONFIG and "config error" in err

    def test_missing_config(self, capsys):
        assert run(capsys, "solve", "--config", "no_such_config")[0] == cli.EXIT_CONFIG

    def test_no_command(self, capsys):
        assert run(capsys)[0] == cli.EXIT_CONFIG

    def test_supercritical_is_config_error(self, capsys):
        code, _, err = run(capsys, "solve", "--config", "table1_kg_l0", "--equation", "kg")
        assert code == cli.EXIT_OK
        raw = load_raw("table1_kg_l0")
        raw["coulomb_Z"] = -100.0
        with pytest.raises(ConfigError) as info:
            validate(raw)
        assert info.value.path == "coulomb_Z"

    def test_numerical_failure(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise ConvergenceError("continued fraction stalled", 5)

        monkeypatch.setattr(cli, "find_bound_states", boom)
        code, _, err = run(capsys, "solve", "--config", "hydrogen_check")
        assert code == cli.EXIT_NUMERIC and "ConvergenceError" in err

    def test_verify_mismatch(self, capsys):
        code, rec, err = run_json(capsys, "verify", "--config", "hydrogen_check", "--tolerance", "1e-15")
        assert code == cli.EXIT_MISMATCH and rec["passed"] is False and "mismatch" in err

    def test_verify_rejects_dirac(self, capsys):
        code, _, err = run(capsys, "verify", "--config", "table1_dirac_j1_2")
        assert code == cli.EXIT_CONFIG and "equation" in err


class TestSolve:
    def test_table_l0(self, capsys):
        code, rec, _ = run_json(capsys, "solve", "--config", "table1_schrodinger_l0")
        assert code == 0
        bound = [r for r in rec["roots"] if r["type"] == "bound"]
        res = [r for r in rec["roots"] if r["type"] == "resonance"]
        assert [r["E_re"] for r in bound] == pytest.approx(TABLE_L0, abs=5e-4)
        assert len(res) == 1 and res[0]["E_re"] == pytest.approx(6.139886, abs=5e-4)
        for r in rec["roots"]:
            assert r["E_im"] <= 0 and r["residual"] is not None
            assert {"type", "E_re", "E_im", "residual", "N", "b", "iterations"} <= set(r)
        assert rec["config_hash"] == validate(load_raw("table1_schrodinger_l0")).digest()

    def test_repulsive_no_states(self, capsys, write_config):
        path = write_config({"equation": "schrodinger", "l": 0, "coulomb_Z": 1.0,
                             "search": {"bound_interval": [-1.0, -0.01]}})
        code, rec, _ = run_json(capsys, "solve", "--config", path)
        assert code == 0 and rec["roots"] == []

    def test_hydrogen(self, capsys):
        code, rec, _ = run_json(capsys, "solve", "--config", "hydrogen_check")
        assert code == 0
        E = [r["E_re"] for r in rec["roots"]]
        assert E[:5] == pytest.approx(BOHR, abs=1e-9)

    def test_flag_overrides(self, capsys):
        code, rec, _ = run_json(capsys, "solve", "--config", "hydrogen_check", "--l", "1", "--n-basis", "5", "--b", "0.5")
        assert code == 0 and rec["quantum_number"] == 1
        assert all(r["N"] == 5 and r["b"] == 0.5 for r in rec["roots"])
        assert [r["E_re"] for r in rec["roots"]][:2] == pytest.approx(BOHR[1:3], abs=1e-9)

    def test_json_round_trip_and_determinism(self, capsys):
        _, out1, _ = run(capsys, "solve", "--config", "hydrogen_check", "--format", "json")
        _, out2, _ = run(capsys, "solve", "--config", "hydrogen_check", "--format", "json")
        a, b = json.loads(out1), json.loads(out2)
        a.pop("timings"), b.pop("timings")
        assert a == b
        assert json.loads(json.dumps(a)) == a

    def test_csv_full_precision(self, capsys):
        _, out, _ = run(capsys, "solve", "--config", "hydrogen_check", "--format", "csv")
        _, rec, _ = run_json(capsys, "solve", "--config", "hydrogen_check")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [float(r["E_re"]) for r in rows] == [r["E_re"] for r in rec["roots"]]

    def test_text_table(self, capsys):
        code, out, _ = run(capsys, "solve", "--config", "hydrogen_check", "--format", "text")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("# solve schrodinger 0 config=")
        assert "-0.125" in out and "E_re" in lines[1]

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code, out, _ = run(capsys, "solve", "--config", "hydrogen_check", "--format", "json", "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["command"] == "solve"


class TestVerify:
    def test_hydrogen(self, capsys):
        code, rec, _ = run_json(capsys, "verify", "--config", "hydrogen_check")
        assert code == 0 and rec["passed"] and rec["count_mismatch"] == 0
        assert max(r["delta"] for r in rec["levels"]) <= 1e-8

    def test_table_l1(self, capsys):
        code, rec, _ = run_json(capsys, "verify", "--config", "table1_schrodinger_l1")
        assert code == 0 and len(rec["levels"]) == 4
        assert max(r["delta"] for r in rec["levels"]) <= 1e-5


class TestConverge:
    def test_single_cell(self, capsys):
        code, rec, _ = run_json(capsys, "converge", "--config", "hydrogen_check")
        assert code == 0 and len(rec["rows"]) == 1 and "drift" not in rec["rows"][0]
        _, out, _ = run(capsys, "converge", "--config", "hydrogen_check", "--format", "csv")
        assert "drift" not in out.splitlines()[0]

    def test_pure_coulomb(self, capsys):
        code, rec, _ = run_json(capsys, "converge", "--config", "hydrogen_check", "--N-list", "1,3,10", "--b-list", "0.7,2")
        assert code == 0 and len(rec["rows"]) == 6
        assert max(max(r["drift"]) for r in rec["rows"]) <= 1e-12

    def test_model_monotone(self, capsys):
        code, rec, _ = run_json(capsys, "converge", "--config", "table1_schrodinger_l0", "--N-list", "30,40,50,60,80")
        assert code == 0
        drift = [r["drift"] for r in rec["rows"][:-1]]
        for k in range(4):
            col = [d[k] for d in drift]
            assert all(x > y for x, y in zip(col, col[1:]))


class TestGreensProbe:
    def test_grid(self, capsys):
        code, rec, _ = run_json(capsys, "greens-probe", "--config", "hydrogen_check",
                                "--re-range=-0.6,-0.1,11", "--im-range=-0.1,0,3", "--sheet", "unphysical")
        assert code == 0 and rec["sheet"] == "unphysical" and len(rec["grid"]) == 33
        assert all("log_abs_det" in p for p in rec["grid"] if p["E_im"] < 0)
        # the continued-fraction representation has its cut on this part of the real axis
        assert all("error" in p for p in rec["grid"] if p["E_im"] == 0)


class TestThreads:
    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("STURM_THREADS", "3")
        assert cli.resolve_threads(None) == 3
        assert cli.resolve_threads(2) == 2
        monkeypatch.setenv("STURM_THREADS", "many")
        with pytest.raises(ConfigError):
            cli.resolve_threads(None)
        monkeypatch.delenv("STURM_THREADS")
        assert cli.resolve_threads(None) == 1

    def test_threads_same_result(self, capsys, monkeypatch):
        _, a, _ = run_json(capsys, "solve", "--config", "hydrogen_check")
        monkeypatch.setenv("STURM_THREADS", "2")
        _, b, _ = run_json(capsys, "solve", "--config", "hydrogen_check")
        assert a["roots"] == b["roots"]
