import json
import math

import numpy as np
import pytest

import thermowork.cli as cli
from thermowork import max_entangled, serialization as ser
from thermowork.errors import ParseError

from conftest import assert_close


@pytest.fixture
def files(tmp_path):
    paths = {}
    paths["h2_flat"] = tmp_path / "h2_flat.json"
    ser.save_state_file(paths["h2_flat"], "hamiltonian", [2], np.zeros((2, 2)))
    paths["h2_batt"] = tmp_path / "h2_batt.json"
    ser.save_state_file(paths["h2_batt"], "hamiltonian", [2], np.diag([0.0, 0.8]))
    paths["bell"] = tmp_path / "bell.json"
    ser.save_state_file(paths["bell"], "bipartite", [2, 2], max_entangled(2).mat)
    paths["gibbs"] = tmp_path / "gibbs.json"
    z = 1.0 + math.exp(-0.8)
    ser.save_state_file(
        paths["gibbs"], "density", [2], np.diag([1.0 / z, math.exp(-0.8) / z])
    )
    paths["excited"] = tmp_path / "excited.json"
    ser.save_state_file(paths["excited"], "density", [2], np.diag([0.0, 1.0]))
    paths["tmp"] = tmp_path
    return paths


class TestStateFiles:
    def test_round_trip_bytes(self, tmp_path):
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        rng = np.random.default_rng(3)
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        ser.save_state_file(p1, "bipartite", [2, 2], rho)
        content = ser.load_state_file(p1)
        ser.save_state_file(p2, content.kind, content.dims, content.data)
        assert p1.read_bytes() == p2.read_bytes()

    def test_pure_kind(self, tmp_path):
        p = tmp_path / "pure.json"
        amp = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
        ser.save_state_file(p, "pure", [2, 2], amp)
        state = ser.as_bipartite(ser.load_state_file(p))
        assert np.abs(state.mat - max_entangled(2).mat).max() <= 1e-12

    def test_schema_errors(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            ser.load_state_file(p)
        p.write_text(json.dumps({"schema_version": "2", "kind": "density", "dims": [2], "matrix": []}))
        with pytest.raises(ParseError):
            ser.load_state_file(p)
        p.write_text(json.dumps({"schema_version": "1", "kind": "blob", "dims": [2], "matrix": []}))
        with pytest.raises(ParseError):
            ser.load_state_file(p)
        payload = ser.state_payload("density", [2], np.eye(2) / 2)
        payload["matrix"][0][0] = ["x", 0]
        p.write_text(json.dumps(payload))
        with pytest.raises(ParseError):
            ser.load_state_file(p)


class TestWorkCommand:
    def test_gibbs_input_zero(self, files, capsys):
        rc = cli.main(["work", str(files["gibbs"]), str(files["h2_batt"]), "--beta", "1.0"])
        assert rc == 0
        out = capsys.readouterr().out
        value = float(out.split("=")[1].split("(")[0])
        assert abs(value) <= 1e-9

    def test_excited_battery_value(self, files, capsys):
        rc = cli.main(["work", str(files["excited"]), str(files["h2_batt"]), "--beta", "1.0"])
        assert rc == 0
        value = float(capsys.readouterr().out.split("=")[1].split("(")[0])
        assert_close(value, 0.8 + math.log(1.0 + math.exp(-0.8)), 1e-9)

    def test_malformed_json_exit_2(self, files):
        bad = files["tmp"] / "broken.json"
        bad.write_text("{oops")
        assert cli.main(["work", str(bad), str(files["h2_flat"])]) == 2

    def test_invariant_violation_exit_3(self, files):
        bad = files["tmp"] / "notrace.json"
        bad.write_text(json.dumps(ser.state_payload("density", [2], np.diag([0.9, 0.9]))))
        assert cli.main(["work", str(bad), str(files["h2_flat"])]) == 3

    def test_usage_exit_4(self, files):
        assert cli.main(["work", str(files["gibbs"])]) == 4
        assert cli.main(["work", str(files["gibbs"]), str(files["h2_flat"]), "--beta", "-2"]) == 4


class TestAssistCommand:
    def test_bell_report(self, files):
        out = files["tmp"] / "rep.json"
        rc = cli.main(
            ["assist", str(files["bell"]), str(files["h2_flat"]),
             "--restarts", "8", "--oracle", "--out", str(out)]
        )
        assert rc == 0
        rep = json.loads(out.read_text())
        assert_close(rep["w_assistance"], math.log(2.0), 1e-6)
        assert_close(rep["j_arrow"], math.log(2.0), 1e-6)
        assert abs(rep["oracle_gap"]) <= 1e-4
        assert rep["config"]["restarts"] == 8
        assert rep["povm"]["dim_a"] == 2

    def test_oracle_requires_qubit(self, files):
        h3 = files["tmp"] / "h3.json"
        ser.save_state_file(h3, "hamiltonian", [3], np.zeros((3, 3)))
        big = files["tmp"] / "iso3.json"
        ser.save_state_file(big, "bipartite", [3, 3], np.eye(9) / 9)
        assert cli.main(["assist", str(big), str(h3), "--oracle"]) == 4

    def test_report_regenerates(self, files):
        out1 = files["tmp"] / "r1.json"
        out2 = files["tmp"] / "r2.json"
        argv = ["assist", str(files["bell"]), str(files["h2_batt"]),
                "--restarts", "6", "--seed", "3"]
        assert cli.main(argv + ["--out", str(out1)]) == 0
        assert cli.main(argv + ["--out", str(out2)]) == 0
        a = json.loads(out1.read_text())
        b = json.loads(out2.read_text())
        a.pop("wall_time_ms"), b.pop("wall_time_ms")
        assert a == b


class TestHierarchyCommand:
    def test_bell_endpoints(self, files, capsys):
        out = files["tmp"] / "h.json"
        rc = cli.main(
            ["hierarchy", str(files["bell"]), str(files["h2_flat"]),
             "--restarts", "8", "--out", str(out)]
        )
        assert rc == 0
        rep = json.loads(out.read_text())
        assert_close(rep["w_assistance"], math.log(2.0), 1e-6)
        assert_close(rep["w_collaboration_upper"], 2.0 * math.log(2.0), 1e-9)
        assert_close(rep["discord_gap"], math.log(2.0), 1e-6)
        assert "notes" in rep and rep["notes"]


class TestIsotropicCommand:
    def test_closed_form_column(self, files, capsys):
        out = files["tmp"] / "iso.csv"
        rc = cli.main(
            ["isotropic", str(files["h2_flat"]), "--d", "2",
             "--lambda-grid", "0,0.5,1", "--restarts", "8", "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].split(",")[0:3] == ["lambda", "w_a_closed_form", "w_a_optimizer"]
        rows = [line.split(",") for line in lines[1:]]
        closed = [float(r[1]) for r in rows]
        from thermowork import shannon_entropy

        expected = [0.0, math.log(2.0) - shannon_entropy([0.25, 0.75]), math.log(2.0)]
        for got, want in zip(closed, expected):
            assert_close(got, want, 1e-12)
        gaps = [abs(float(r[3])) for r in rows]
        assert max(gaps) <= 1e-4
        assert (files["tmp"] / "iso.png").exists()

    def test_out_of_range_skipped(self, files, capsys):
        out = files["tmp"] / "iso2.csv"
        rc = cli.main(
            ["isotropic", str(files["h2_flat"]), "--d", "2",
             "--lambda-grid=-0.5,0.5", "--restarts", "6", "--out", str(out), "--no-fig"]
        )
        assert rc == 0
        err = capsys.readouterr().err
        assert "skipping lambda" in err
        assert len(out.read_text().strip().splitlines()) == 2  # header + one row
        assert not (files["tmp"] / "iso2.png").exists()


class TestSweepCommand:
    def test_rows_and_qt_injection(self, files):
        out = files["tmp"] / "sweep.csv"
        rc = cli.main(
            ["sweep", str(files["h2_batt"]), "--dim-a", "2", "--dim-b", "2",
             "--count", "4", "--restarts", "6", "--qt-every", "2",
             "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 5
        kinds = [line.split(",")[1] for line in lines[1:]]
        assert kinds == ["random", "qt", "random", "qt"]
        for line in lines[1:]:
            cells = line.split(",")
            if cells[1] == "qt":
                assert abs(float(cells[3])) <= 1e-5  # w_assistance
        assert (files["tmp"] / "sweep.png").exists()

    def test_determinism_across_runs_and_threads(self, files, monkeypatch):
        argv = ["sweep", str(files["h2_batt"]), "--dim-a", "2", "--dim-b", "2",
                "--count", "3", "--restarts", "6", "--seed", "11", "--no-fig"]
        outs = []
        for i, threads in enumerate(("1", "1", "3")):
            out = files["tmp"] / f"s{i}.csv"
            monkeypatch.setenv("THERMOWORK_THREADS", threads)
            assert cli.main(argv + ["--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_dims_capped(self, files):
        rc = cli.main(
            ["sweep", str(files["h2_batt"]), "--dim-a", "9", "--dim-b", "2",
             "--count", "1", "--out", str(files["tmp"] / "x.csv")]
        )
        assert rc == 4

    def test_property_violation_exit_5(self, files, monkeypatch):
        monkeypatch.setattr(cli, "FORMATION_TOL", -1.0)
        rc = cli.main(
            ["sweep", str(files["h2_batt"]), "--dim-a", "2", "--dim-b", "2",
             "--count", "1", "--restarts", "6", "--no-fig",
             "--out", str(files["tmp"] / "v.csv")]
        )
        assert rc == 5
