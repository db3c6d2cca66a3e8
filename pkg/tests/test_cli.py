"""Tests for scenario configs, snapshots, figures and the command-line front end."""

import csv

import numpy as np
import pytest

from mkglorenz.cli import (
    EXIT_BLOWUP,
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_CONSTRAINT,
    EXIT_OK,
    EXIT_SNAPSHOT,
    main,
    run_scenario,
)
from mkglorenz.config import ScenarioConfig, load_config, parse_config
from mkglorenz.errors import ConfigParseError, ConfigurationError, SnapshotError
from mkglorenz.gauge_data import build_potential_data
from mkglorenz.grid import make_grid
from mkglorenz.observables import CSV_HEADER, initial_energy
from mkglorenz.plotting import plot_diagnostics, read_diagnostics
from mkglorenz.presets import gaussian_pulse
from mkglorenz.snapshot import MAGIC, read_snapshot, snapshot_bytes, state_from_bytes, write_snapshot

from _fields import random_state


def _write_config(tmp_path, name="run.cfg", **entries):
    base = {
        "grid.n": 16,
        "time.dt": 0.02,
        "time.T": 0.1,
        "data.preset": "gaussian_pulse",
        "data.kcut": 1,
        "data.amplitude": 0.5,
        "output.csv": name.replace(".cfg", ".csv"),
        "output.plots": "false",
    }
    base.update(entries)
    text = "".join(f"{k} = {v}\n" for k, v in base.items() if v is not None)
    path = tmp_path / name
    path.write_text(text)
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class _Capture:
    def __init__(self):
        self.lines = []

    def __call__(self, msg):
        self.lines.append(msg)

    @property
    def text(self):
        return "\n".join(self.lines)


class TestConfig:
    def test_parse_all_sections(self, tmp_path):
        text = f"""
        # comment line
        grid.n = 32          # trailing comment
        grid.L = 6.283185307179586
        physics.m = 1.5
        time.dt = 0.001
        time.T = 1
        time.cadence = 10
        data.preset = gaussian_pulse
        data.momentum = 1, 0, 0
        data.velocity = 0.3 0 0
        data.field_amplitude = 2
        solver.nonlinearity_form = direct
        solver.regauge_at = 0.25, 0.5
        output.csv = {tmp_path}/x.csv
        output.snapshot_cadence = 100
        seed = 7
        """
        cfg = parse_config(text)
        assert (cfg.n, cfg.m, cfg.dt, cfg.T, cfg.cadence) == (32, 1.5, 0.001, 1.0, 10)
        assert cfg.preset_params == {"momentum": (1, 0, 0), "velocity": (0.3, 0.0, 0.0), "field_amplitude": 2.0}
        assert cfg.regauge_at == (0.25, 0.5) and cfg.nonlinearity_form == "direct" and cfg.seed == 7

    def test_round_trip_text(self, tmp_path):
        cfg = parse_config(f"data.amplitude = 2\ndata.momentum = 1 0 0\noutput.csv = {tmp_path}/a.csv\n")
        again = parse_config(cfg.to_text())
        assert again == cfg

    @pytest.mark.parametrize(
        "text,line,key",
        [
            ("grid.n = 16\ngrid.m = 1\n", 2, "grid.m"),
            ("grid.n = 16\n\nnot a pair\n", 3, None),
            ("time.dt = fast\n", 1, "time.dt"),
            ("grid.n = 16\ngrid.n = 32\n", 2, "grid.n"),
            ("data.momentum = 1 0\n", 1, "data.momentum"),
            ("grid.n = 16.5\n", 1, "grid.n"),
        ],
    )
    def test_parse_errors_name_line_and_key(self, text, line, key):
        with pytest.raises(ConfigParseError) as err:
            parse_config(text, validate=False)
        assert err.value.line == line and err.value.key == key
        assert f"line {line}" in str(err.value)

    @pytest.mark.parametrize(
        "entry",
        [
            "time.dt = 2\ntime.T = 1",
            "physics.m = 0",
            "grid.n = 15",
            "time.cadence = 0",
            "data.preset = vortex",
            "data.kappa = -1",
            "data.preset = decoupled_real\ndata.momentum = 1 0 0",
            "data.preset = from_snapshot",
            "solver.nonlinearity_form = implicit",
            "output.csv = /nonexistent/dir/x.csv",
        ],
    )
    def test_validation(self, entry):
        with pytest.raises(ConfigurationError):
            parse_config(entry + "\n")

    def test_zero_final_time_allowed(self, tmp_path):
        cfg = parse_config(f"time.T = 0\noutput.csv = {tmp_path}/a.csv\n")
        assert cfg.T == 0

    def test_relative_paths_resolve_beside_file(self, tmp_path):
        path = _write_config(tmp_path)
        assert load_config(path).csv == str(tmp_path / "run.csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.cfg")

    def test_defaults_are_valid(self, tmp_path):
        cfg = ScenarioConfig(csv=str(tmp_path / "d.csv"))
        cfg.validate()


class TestSnapshot:
    def test_round_trip_bit_exact(self, rng, tmp_path):
        s = random_state(rng, make_grid(8), m=1.3, t=0.37)
        s = s.with_fields(zero_mode=rng.standard_normal((4, 2)))
        back = read_snapshot(write_snapshot(tmp_path / "s.mkgf", s))
        assert back.t == s.t and back.m == s.m and back.grid.n == 8 and back.grid.L == s.grid.L
        for name in ("phi_plus", "phi_minus", "A_plus", "A_minus", "zero_mode"):
            np.testing.assert_array_equal(getattr(back, name), getattr(s, name))

    def test_layout(self, rng):
        s = random_state(rng, make_grid(8), t=0.5)
        data = snapshot_bytes(s)
        assert data[:4] == MAGIC
        assert int.from_bytes(data[4:8], "little") == 1
        assert int.from_bytes(data[8:12], "little") == 8
        L, m, t = np.frombuffer(data[12:36], dtype="<f8")
        assert (L, m, t) == (s.grid.L, s.m, 0.5)
        assert len(data) == 36 + 10 * 8**3 * 16 + 64
        # first complex value of phi_plus, then its x-neighbour (first index fastest)
        first = np.frombuffer(data[36:68], dtype="<f8")
        np.testing.assert_array_equal(first, [s.phi_plus[0, 0, 0].real, s.phi_plus[0, 0, 0].imag,
                                              s.phi_plus[1, 0, 0].real, s.phi_plus[1, 0, 0].imag])
        np.testing.assert_array_equal(np.frombuffer(data[-64:], dtype="<f8"), s.zero_mode.reshape(-1))

    def test_corrupt(self, rng):
        data = snapshot_bytes(random_state(rng, make_grid(8)))
        with pytest.raises(SnapshotError):
            state_from_bytes(b"XXXX" + data[4:])
        with pytest.raises(SnapshotError):
            state_from_bytes(data[:-8])
        with pytest.raises(SnapshotError):
            state_from_bytes(data[:10])
        bad_version = data[:4] + (7).to_bytes(4, "little") + data[8:]
        with pytest.raises(SnapshotError):
            state_from_bytes(bad_version)


class TestPlotting:
    def test_figures_written_beside_csv(self, tmp_path):
        path = tmp_path / "d.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for i in range(4):
                w.writerow([0.1 * i, 1 + 1e-12 * i, 0, 0, 1e-12 * i, 0, 1, 2, 0.5, 1])
        figs = plot_diagnostics(path)
        assert [f.name for f in figs] == ["d_energy.png", "d_constraints.png", "d_norms.png"]
        for f in figs:
            assert f.parent == tmp_path and f.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert read_diagnostics(path)["gauss_res"][2] == 2e-12

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_diagnostics(path)


class TestRun:
    def test_decoupled_real_stays_decoupled(self, tmp_path):
        path = _write_config(
            tmp_path, **{"data.preset": "decoupled_real", "data.kcut": 2, "data.amplitude": None,
                         "time.dt": 0.01, "time.T": 1, "time.cadence": 10}
        )
        res = run_scenario(load_config(path))
        assert res.steps == 100 and res.records[-1].t == 1.0
        assert len(res.records) == 11
        assert max(r.lorenz_res for r in res.records) <= 1e-10
        assert max(r.A_norm for r in res.records) <= 1e-10

    def test_zero_time_single_row(self, tmp_path):
        path = _write_config(tmp_path, **{"time.T": 0})
        assert main(["run", "--config", str(path), "--quiet"]) == EXIT_OK
        rows = _rows(tmp_path / "run.csv")
        assert rows[0] == CSV_HEADER and len(rows) == 2
        cd = gaussian_pulse(make_grid(16), 1.0, amplitude=0.5, kcut=1)
        assert float(rows[1][1]) == pytest.approx(initial_energy(cd, build_potential_data(cd)), rel=1e-12)

    def test_seventeen_digits(self, tmp_path):
        path = _write_config(tmp_path, **{"time.T": 0})
        main(["run", "--config", str(path), "--quiet"])
        energy = _rows(tmp_path / "run.csv")[1][1]
        assert len(energy.replace(".", "").lstrip("0")) == 17

    def test_figures_on_request(self, tmp_path):
        path = _write_config(tmp_path, **{"output.plots": "true"})
        out = _Capture()
        assert main(["run", "--config", str(path)], out=out) == EXIT_OK
        for name in ("run_energy.png", "run_constraints.png", "run_norms.png"):
            assert (tmp_path / name).exists()
        assert "relative energy drift" in out.text

    def test_charged_pair_is_constraint_error(self, tmp_path, capsys):
        path = _write_config(tmp_path, **{"data.preset": "neutral_pair", "data.imbalance": 0.5, "data.kcut": 2})
        assert main(["run", "--config", str(path)]) == EXIT_CONSTRAINT
        assert "charge" in capsys.readouterr().err.lower()

    def test_parse_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("grid.n = 16\ntime.dt = soon\n")
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "line 2" in err and "time.dt" in err

    def test_blow_up_exit(self, tmp_path, capsys):
        path = _write_config(
            tmp_path, **{"time.dt": 0.5, "time.T": 20, "data.amplitude": 30, "data.field_amplitude": 5,
                         "data.kcut": 3}
        )
        assert main(["run", "--config", str(path)]) == EXIT_BLOWUP
        assert "t = " in capsys.readouterr().err
        assert len(_rows(tmp_path / "run.csv")) >= 2

    def test_bad_snapshot_exit(self, tmp_path):
        (tmp_path / "junk.mkgf").write_bytes(b"junk")
        path = _write_config(tmp_path, **{"data.preset": "from_snapshot", "data.path": "junk.mkgf",
                                          "data.kcut": None, "data.amplitude": None})
        assert main(["run", "--config", str(path)]) == EXIT_SNAPSHOT

    def test_deterministic_csv(self, tmp_path):
        a = _write_config(tmp_path, "a.cfg", **{"solver.regauge_at": 0.05})
        b = _write_config(tmp_path, "b.cfg", **{"solver.regauge_at": 0.05})
        assert main(["run", "--config", str(a), "--quiet", "--seed", "3"]) == EXIT_OK
        assert main(["run", "--config", str(b), "--quiet", "--seed", "3"]) == EXIT_OK
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_restart_matches_single_run(self, tmp_path):
        full = _write_config(tmp_path, "full.cfg", **{"time.T": 0.2})
        first = _write_config(tmp_path, "first.cfg", **{"output.snapshot": "half.mkgf"})
        second = _write_config(tmp_path, "second.cfg", **{"data.preset": "from_snapshot", "data.path": "half.mkgf",
                                                           "data.kcut": None, "data.amplitude": None})
        for p in (full, first, second):
            assert main(["run", "--config", str(p), "--quiet"]) == EXIT_OK
        ref = np.array(_rows(tmp_path / "full.csv")[1:], dtype=float)
        pieces = np.array(_rows(tmp_path / "first.csv")[1:] + _rows(tmp_path / "second.csv")[2:], dtype=float)
        assert ref.shape == pieces.shape
        np.testing.assert_allclose(pieces, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())

    def test_snapshot_cadence(self, tmp_path):
        path = _write_config(tmp_path, **{"output.snapshot": "s_{step}.mkgf", "output.snapshot_cadence": 2})
        res = run_scenario(load_config(path))
        assert [p.name for p in res.snapshots] == ["s_2.mkgf", "s_4.mkgf", "s_5.mkgf"]
        final = read_snapshot(tmp_path / "s_5.mkgf")
        np.testing.assert_array_equal(final.phi_plus, res.state.phi_plus)

    def test_snapshot_resume_refuses_violating_state(self, rng, tmp_path):
        s = random_state(rng, make_grid(16), lorenz=False)
        write_snapshot(tmp_path / "v.mkgf", s)
        path = _write_config(tmp_path, **{"data.preset": "from_snapshot", "data.path": "v.mkgf",
                                          "data.kcut": None, "data.amplitude": None})
        assert main(["run", "--config", str(path)]) == EXIT_CONSTRAINT

    def test_convergence_ladder(self, tmp_path):
        path = _write_config(tmp_path, **{"time.dt": 0.05, "time.T": 0.2, "data.amplitude": 2,
                                          "data.field_amplitude": 1, "data.momentum": "2 0 0"})
        out = _Capture()
        assert main(["convergence", "--config", str(path), "--levels", "3"], out=out) == EXIT_OK
        last = out.lines[-1].split()
        assert float(last[-1]) >= 3.5


class TestEstimateCommands:
    def test_bundled_products(self):
        out = _Capture()
        assert main(["check-products"], out=out) == EXIT_OK
        assert "21 matrices, 0 unexpected" in out.text

    def test_mutations(self):
        from mkglorenz.estimates.products import bundled_fixture

        out = _Capture()
        assert main(["check-products", str(bundled_fixture("mutations"))], out=out) == EXIT_OK
        assert out.text.count("rejected") == 10

    def test_rejected_line_flagged(self, tmp_path):
        path = tmp_path / "f.txt"
        path.write_text("0 99/100 1 0 99/100 51/100\n0 0 0 0 3/5 3/5\n")
        out = _Capture()
        assert main(["check-products", str(path)], out=out) == EXIT_CHECK_FAILED
        flagged = [l for l in out.lines if "unexpected" in l and "<--" in l]
        assert len(flagged) == 1 and flagged[0].split()[0] == "2" and "C6" in flagged[0]

    def test_empty_fixture(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        out = _Capture()
        assert main(["check-products", str(path)], out=out) == EXIT_OK
        assert "0 matrices" in out.text

    def test_fixture_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("# ok\n0 1 1 0 1\n")
        assert main(["check-products", str(path)]) == EXIT_CONFIG
        assert "line 2" in capsys.readouterr().err

    def test_symbols_deterministic(self):
        a, b = _Capture(), _Capture()
        assert main(["check-symbols", "--m", "0", "--count", "10", "--seed", "1"], out=a) == EXIT_OK
        main(["check-symbols", "--m", "0", "--count", "10", "--seed", "1"], out=b)
        assert a.text == b.text and "0 violations" in a.text

    def test_probe(self):
        out = _Capture()
        code = main(["probe", "--matrix", "0 99/100 1 0 99/100 51/100", "--trials", "3", "--sizes", "8"], out=out)
        assert code == EXIT_OK and "sup ratio" in out.text

    def test_probe_malformed_matrix(self, capsys):
        assert main(["probe", "--matrix", "0 1 x 0 1 1"]) == EXIT_CONFIG
        assert "not a rational" in capsys.readouterr().err

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            main([])
