"""End-to-end tests of the command-line interface and its file outputs."""

import json
import math

import numpy as np
import pytest

from spinorbit2d import acceptance
from spinorbit2d.cli import (
    ConfigError,
    RunConfig,
    main,
    parse_angle,
    parse_chi,
    parse_nu_range,
    parse_rational,
)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return header, data


class TestParsers:
    def test_rational(self):
        from fractions import Fraction

        assert parse_rational("7/3") == Fraction(7, 3)
        assert parse_rational("135/2") == Fraction(135, 2)
        assert parse_rational("2.5") == Fraction(5, 2)
        with pytest.raises(ConfigError):
            parse_rational("abc")

    def test_angle(self):
        assert parse_angle("4pi") == pytest.approx(4 * math.pi)
        assert parse_angle("pi/2") == pytest.approx(math.pi / 2)
        assert parse_angle("-pi") == pytest.approx(-math.pi)
        assert parse_angle("0.75") == 0.75
        assert parse_angle("3/2pi") == pytest.approx(1.5 * math.pi)
        with pytest.raises(ConfigError):
            parse_angle("pi2")

    def test_chi(self):
        assert parse_chi("plus").up == 1.0
        assert parse_chi("minus").down == 1.0
        s = parse_chi("plusx")
        assert abs(s.up - s.down) < 1e-15
        s2 = parse_chi("0.6,0,0,0.8")
        assert abs(abs(s2.up) ** 2 - 0.36) < 1e-12
        with pytest.raises(ConfigError):
            parse_chi("sideways")

    def test_nu_range(self):
        assert parse_nu_range("1..5") == [1, 2, 3, 4, 5]
        assert parse_nu_range("2,4,6") == [2, 4, 6]
        with pytest.raises(ConfigError):
            parse_nu_range("5..1")


class TestRunConfig:
    def test_coupling_consistency_enforced(self):
        cfg = RunConfig(q=0.1, beta=0.05, eta=1.0)
        assert cfg.resolved().q == pytest.approx(0.1)
        with pytest.raises(ConfigError):
            RunConfig(q=0.2, beta=0.05, eta=1.0).resolved()

    def test_beta_derived_from_q(self):
        cfg = RunConfig(q=0.3).resolved()
        assert cfg.eta == 1.0
        assert cfg.beta == pytest.approx(0.15)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_payload({"mystery_knob": 1})

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(k="0").resolved()
        with pytest.raises(ConfigError):
            RunConfig(gamma="-3").resolved()
        with pytest.raises(ConfigError):
            RunConfig(formats=["csv", "pdf"]).resolved()


class TestOrbitCommand:
    def test_preset_four_petals(self, tmp_path):
        out = tmp_path / "run"
        code = main(["orbit", "--preset", "fig1-k4", "--out", str(out),
                     "--formats", "csv,json,ppm", "--samples-per-petal", "64"])
        assert code == 0
        header, data = read_csv(out / "orbit.csv")
        assert header == ["phi", "r", "x", "y"]
        report = json.loads((out / "orbit_report.json").read_text())
        assert report["petals"] == 4
        # four-petal pattern: radius invariant under rotation by pi/2
        assert (out / "orbit.ppm").read_bytes()[:2] == b"P6"
        assert (out / "resolved_config.json").exists()

    def test_explicit_parameters_match_preset(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["orbit", "--preset", "fig1-k1", "--out", str(a)]) == 0
        assert main(["orbit", "--k", "1", "--gamma", "15", "--out", str(b)]) == 0
        assert (a / "orbit.csv").read_bytes() == (b / "orbit.csv").read_bytes()

    def test_k_zero_exits_2(self, tmp_path, capsys):
        code = main(["orbit", "--k", "0", "--out", str(tmp_path / "x")])
        assert code == 2
        assert "nonzero" in capsys.readouterr().err

    def test_unknown_preset_exits_2(self, tmp_path):
        assert main(["orbit", "--preset", "fig9-k9", "--out", str(tmp_path)]) == 2

    def test_config_round_trip(self, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        assert main(["orbit", "--preset", "fig1-k7over3", "--out", str(first),
                     "--samples-per-petal", "32"]) == 0
        assert main(["orbit", "--config", str(first / "resolved_config.json"),
                     "--out", str(second)]) == 0
        assert (first / "orbit.csv").read_bytes() == (second / "orbit.csv").read_bytes()
        assert (
            (first / "resolved_config.json").read_bytes()
            == (second / "resolved_config.json").read_bytes()
        )


class TestSpectrumCommand:
    def test_values_and_spacing(self, tmp_path):
        out = tmp_path / "spec"
        assert main(["spectrum", "--k", "7/3", "--q", "0.1", "--nu", "1..5",
                     "--out", str(out)]) == 0
        payload = json.loads((out / "spectrum.json").read_text())
        ups = [lv["lambda"] for lv in payload["levels"] if lv["sign"] == 1]
        assert len(ups) == 5
        assert ups[0] == pytest.approx(7 / 3 + 0.05, abs=1e-12)
        for a, b in zip(ups, ups[1:]):
            assert (b - a) == pytest.approx(7 / 3, abs=1e-12)

    def test_non_normalizable_order_rejected(self, tmp_path):
        assert main(["spectrum", "--k", "1", "--nu", "1..3",
                     "--out", str(tmp_path / "x")]) == 2


class TestSpinCommand:
    def test_precession_curves(self, tmp_path):
        out = tmp_path / "spin"
        assert main(["spin", "--chi", "plusx", "--q", "0.1", "--span", "4pi",
                     "--steps", "64", "--out", str(out)]) == 0
        header, data = read_csv(out / "spin.csv")
        assert header == ["phi", "sx", "sy", "sz"]
        phi = data[:, 0]
        assert np.allclose(data[:, 1], np.cos(0.1 * phi), atol=1e-11)
        assert np.allclose(data[:, 2], -np.sin(0.1 * phi), atol=1e-11)
        assert np.allclose(data[:, 3], 0.0, atol=1e-15)
        assert phi[-1] == pytest.approx(4 * math.pi)


class TestGaugeCommand:
    def test_records_and_holonomy(self, tmp_path):
        out = tmp_path / "gauge"
        assert main(["gauge", "--eta", "1.0", "--beta", "0.05",
                     "--r", "1.0", "--phi", "0.0", "--out", str(out)]) == 0
        payload = json.loads((out / "gauge.json").read_text())
        assert payload["q"] == pytest.approx(0.1)
        names = [rec["component"] for rec in payload["records"]]
        assert names == ["A_x", "A_y", "A_z", "B_x", "B_y", "B_z"]
        b_x = payload["records"][3]
        assert all(v == 0.0 for row in b_x["re"] for v in row)
        assert all(v == 0.0 for row in b_x["im"] for v in row)
        hol = payload["holonomy"]
        assert hol["re"][0][0] == pytest.approx(math.cos(0.1 * math.pi), abs=1e-10)
        assert hol["im"][0][0] == pytest.approx(math.sin(0.1 * math.pi), abs=1e-10)

    def test_inconsistent_couplings_exit_2(self, tmp_path):
        assert main(["gauge", "--eta", "1.0", "--beta", "0.05", "--q", "0.3",
                     "--out", str(tmp_path / "x")]) == 2


class TestDensityAndQcc:
    def test_density_outputs(self, tmp_path):
        out = tmp_path / "dens"
        assert main(["density", "--preset", "fig1-k4", "--n", "6",
                     "--n-r", "96", "--formats", "csv,json,ppm",
                     "--out", str(out)]) == 0
        header, data = read_csv(out / "density.csv")
        assert header == ["r", "phi", "density", "re_up", "im_up", "re_down", "im_down"]
        dens = data[:, 2]
        recon = data[:, 3] ** 2 + data[:, 4] ** 2 + data[:, 5] ** 2 + data[:, 6] ** 2
        assert np.max(np.abs(dens - recon)) < 1e-10 * max(1.0, dens.max())
        mheader, mdata = read_csv(out / "angular_marginal.csv")
        assert mheader == ["phi", "marginal"]
        assert np.all(mdata[:, 1] >= 0)
        report = json.loads((out / "density_report.json").read_text())
        assert 0.9 <= report["grid_norm_per_period"] <= 1.05
        assert report["phi_dot_expectation"] > 0

    def test_qcc_report(self, tmp_path):
        out = tmp_path / "qcc"
        assert main(["qcc", "--preset", "fig1-k4", "--n", "30",
                     "--out", str(out)]) == 0
        payload = json.loads((out / "qcc_report.json").read_text())
        assert payload["symmetry_order_detected"] == "4"
        assert payload["symmetry_mismatch"] < 1e-9
        assert payload["mean_relative_deviation"] <= 0.05
        header, _ = read_csv(out / "ridge.csv")
        assert header == ["phi", "r_peak", "density_peak"]


class TestSelftestExitCodes:
    def test_exit_zero_when_all_pass(self, monkeypatch):
        ok = [acceptance.CriterionResult(1, "x", True, "d")]
        monkeypatch.setattr(acceptance, "run_all", lambda verbose=False: ok)
        assert main(["selftest"]) == 0

    def test_exit_one_on_failure(self, monkeypatch):
        bad = [
            acceptance.CriterionResult(1, "x", True, "d"),
            acceptance.CriterionResult(2, "y", False, "d"),
        ]
        monkeypatch.setattr(acceptance, "run_all", lambda verbose=False: bad)
        assert main(["selftest"]) == 1
