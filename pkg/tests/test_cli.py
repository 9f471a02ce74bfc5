import csv
import json
import math

import numpy as np
import pytest

from postres import __version__
from postres.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = text.splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


SMALL_REFLECTOR = {"grid": {"start": "10 GHz", "stop": "30 GHz", "points": 3}, "codes": [0, 5, 1023]}


class TestReflector:
    def test_header_and_order(self, capsys, tmp_path):
        code, out, _ = run(capsys, "reflector", "--preset", "fig3", "--config", write_cfg(tmp_path, SMALL_REFLECTOR))
        assert code == 0
        head, rows = table(out)
        assert head == f"# postres v{__version__} preset=fig3"
        assert out.splitlines()[1] == "f_hz,code,re_gamma,im_gamma,mag_db,phase_deg"
        assert [r["code"] for r in rows] == ["0"] * 3 + ["5"] * 3 + ["1023"] * 3
        assert [float(r["f_hz"]) for r in rows[:3]] == [10e9, 20e9, 30e9]

    def test_values_round_trip(self, capsys, tmp_path):
        _, out, _ = run(capsys, "reflector", "--config", write_cfg(tmp_path, SMALL_REFLECTOR))
        head, rows = table(out)
        assert head.endswith("preset=custom")
        for r in rows:
            g = complex(float(r["re_gamma"]), float(r["im_gamma"]))
            assert abs(math.degrees(math.atan2(g.imag, g.real)) - float(r["phase_deg"])) < 1e-6
            assert abs(20 * math.log10(abs(g)) - float(r["mag_db"])) < 1e-9

    def test_lossless_unit_magnitude(self, capsys, tmp_path):
        _, out, _ = run(capsys, "reflector", "--preset", "lossless", "--config", write_cfg(tmp_path, SMALL_REFLECTOR))
        assert all(abs(float(r["mag_db"])) < 1e-8 for r in table(out)[1])

    @pytest.mark.parametrize(
        "cfg",
        [
            {"grid": {"start": "10 GHz", "stop": "5 GHz", "points": 3}},
            {"grid": {"start": "10", "stop": "20 GHz", "points": 3}},
            {"quality": 0},
            {"codes": [4096]},
            {"inductanse": "300 pH"},
        ],
    )
    def test_bad_config_exit_2(self, capsys, tmp_path, cfg):
        code, out, err = run(capsys, "reflector", "--config", write_cfg(tmp_path, cfg))
        assert code == 2 and out == "" and "postres:" in err

    def test_unknown_preset(self, capsys):
        assert run(capsys, "reflector", "--preset", "nope")[0] == 2

    def test_json_rows(self, capsys, tmp_path):
        _, out, _ = run(capsys, "reflector", "--json", "--config", write_cfg(tmp_path, SMALL_REFLECTOR))
        obj = json.loads(out)
        assert obj["columns"][0] == "f_hz" and len(obj["rows"]) == 9


class TestBloch:
    def test_lossless_half_cell(self, capsys):
        code, out, _ = run(capsys, "bloch", "--preset", "lossless")
        assert code == 0
        rows = [r for r in table(out)[1] if float(r["f_hz"]) < 30e9]
        assert rows
        assert all(abs(float(r["im_zb"])) < 1e-9 for r in rows)
        assert all(abs(float(r["re_zb"]) - math.sqrt(350e-12 / 200e-15)) < 1e-9 for r in rows)

    def test_columns_and_blocks(self, capsys, tmp_path):
        cfg = {"grid": {"start": "1 GHz", "stop": "60 GHz", "points": 4}}
        _, out, _ = run(capsys, "bloch", "--config", write_cfg(tmp_path, cfg))
        assert out.splitlines()[1] == "c_farad,f_hz,re_zb,im_zb,re_betad,im_betad"
        assert len(table(out)[1]) == 8 * 4

    def test_empty_grid(self, capsys, tmp_path):
        cfg = {"grid": {"start": "1 GHz", "stop": "2 GHz", "points": 0}}
        assert run(capsys, "bloch", "--config", write_cfg(tmp_path, cfg))[0] == 2


class TestCmt:
    def test_lossless_unit(self, capsys):
        code, out, _ = run(capsys, "cmt", "--preset", "lossless1")
        assert code == 0
        rows = table(out)[1]
        assert len(rows) == 991
        assert all(abs(float(r["mag_s11"]) - 1) < 1e-9 for r in rows)
        assert {r["status"] for r in rows} == {"ok"}

    def test_tuning_blocks(self, capsys, tmp_path):
        cfg = {"grid": {"start": "1 GHz", "stop": "100 GHz", "points": 5}}
        _, out, _ = run(capsys, "cmt", "--config", write_cfg(tmp_path, cfg))
        rows = table(out)[1]
        assert len({r["f1_hz"] for r in rows}) == 8 and len(rows) == 40

    def test_singular_point_flagged(self, capsys, tmp_path):
        cfg = {
            "modes": [
                {"freq": "10 GHz", "quality": 5, "gamma_ext": "2 GHz"},
                {"freq": "20 GHz", "quality": "inf", "gamma_ext": "0 GHz"},
            ],
            "couplings": [],
            "grid": {"start": "19 GHz", "stop": "21 GHz", "points": 3},
        }
        code, out, _ = run(capsys, "cmt", "--preset", "lossless1", "--config", write_cfg(tmp_path, cfg))
        assert code == 0
        rows = table(out)[1]
        assert [r["status"] for r in rows] == ["ok", "singular", "ok"]
        assert rows[1]["mag_s11"] == "nan"

    def test_no_port(self, capsys, tmp_path):
        cfg = {"modes": [{"freq": "10 GHz", "quality": 5, "gamma_ext": "0 GHz"}], "couplings": []}
        assert run(capsys, "cmt", "--preset", "lossless1", "--config", write_cfg(tmp_path, cfg))[0] == 2


class TestShifter:
    GRID = {"grid": {"start": "21 GHz", "stop": "30 GHz", "points": 2}}

    def test_base(self, capsys, tmp_path):
        out_csv = tmp_path / "s.csv"
        code, _, _ = run(capsys, "shifter", "--config", write_cfg(tmp_path, self.GRID), "--out", str(out_csv))
        assert code == 0
        head, rows = table(out_csv.read_text())
        assert len(rows) == 2048
        summary = json.loads(out_csv.with_suffix(".json").read_text())
        assert summary["states"] == 1024 and summary["stages"] == 1
        assert len(summary["range_deg_by_f"]) == 2

    def test_extension_states(self, capsys, tmp_path):
        _, out, _ = run(capsys, "shifter", "--preset", "ext", "--json", "--config", write_cfg(tmp_path, self.GRID))
        obj = json.loads(out)
        assert obj["states"] == 2048 and obj["preset"] == "ext"

    def test_two_stages_double_loss(self, capsys, tmp_path):
        one = json.loads(run(capsys, "shifter", "--json", "--config", write_cfg(tmp_path, self.GRID))[1])
        two = json.loads(run(capsys, "shifter", "--json", "--config", write_cfg(tmp_path, {**self.GRID, "stages": 2}))[1])
        assert two["avg_il_db"] == pytest.approx(2 * one["avg_il_db"])

    def test_band_outside_grid(self, capsys, tmp_path):
        cfg = {**self.GRID, "band": {"start": "40 GHz", "stop": "50 GHz"}}
        assert run(capsys, "shifter", "--config", write_cfg(tmp_path, cfg))[0] == 2


class TestArray:
    def test_linear_preset(self, capsys):
        code, out, _ = run(capsys, "array", "--preset", "fig2b", "--json")
        obj = json.loads(out)
        assert code == 0 and obj["elements"] == 16
        assert obj["main_lobe_az"] == pytest.approx(25, abs=0.5)

    def test_single_element(self, capsys, tmp_path):
        cfg = {"grid": {"az": {"start": "-90 deg", "stop": "90 deg", "step": "5 deg"}, "el": {"start": "-90 deg", "stop": "90 deg", "step": "5 deg"}}}
        _, out, _ = run(capsys, "array", "--preset", "single", "--json", "--config", write_cfg(tmp_path, cfg))
        assert json.loads(out)["peak_sidelobe_db"] is None

    def test_csv_rows(self, capsys, tmp_path):
        cfg = {"grid": {"az": {"start": "-90 deg", "stop": "90 deg", "step": "10 deg"}, "el": {"start": "0 deg", "stop": "20 deg", "step": "10 deg"}}}
        _, out, _ = run(capsys, "array", "--config", write_cfg(tmp_path, cfg))
        rows = table(out)[1]
        assert len(rows) == 19 * 3
        assert max(float(r["gain_db"]) for r in rows) == 0.0

    def test_one_sample_rejected(self, capsys, tmp_path):
        cfg = {"n_x": 4, "grid": {"az": {"start": "0 deg", "stop": "0 deg", "step": "1 deg"}}}
        assert run(capsys, "array", "--preset", "uniform50", "--config", write_cfg(tmp_path, cfg))[0] == 2


class TestCompare:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "compare")
        assert code == 0 and len(out.splitlines()) >= 5
        assert "post-resonance" in out

    def test_json_filter(self, capsys):
        obj = json.loads(run(capsys, "compare", "--json", "--type", "passive")[1])
        assert obj["rows"] and all(r["type"] == "passive" for r in obj["rows"])


class TestVerify:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        assert len(out.splitlines()) == 5 and all(line.startswith("PASS") for line in out.splitlines())

    def test_perturbed_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--check", "rtps_hybrid", "--perturb", "1e-6")
        assert code == 1 and out.startswith("FAIL rtps_hybrid")

    def test_subset_json(self, capsys):
        obj = json.loads(run(capsys, "verify", "--json", "--check", "quantize_bound", "--check", "cmt_solve")[1])
        assert [c["name"] for c in obj["checks"]] == ["quantize_bound", "cmt_solve"] and obj["passed"]

    def test_unknown_check(self, capsys):
        assert run(capsys, "verify", "--check", "nope")[0] == 2


SMALL = {
    "reflector": SMALL_REFLECTOR,
    "bloch": {"grid": {"start": "1 GHz", "stop": "60 GHz", "points": 7}},
    "cmt": {"grid": {"start": "1 GHz", "stop": "100 GHz", "points": 7}},
    "shifter": {"grid": {"start": "21 GHz", "stop": "30 GHz", "points": 3}},
    "array": {"grid": {"az": {"start": "-90 deg", "stop": "90 deg", "step": "3 deg"}, "el": {"start": "-90 deg", "stop": "90 deg", "step": "3 deg"}}},
}


@pytest.mark.parametrize("command", sorted(SMALL))
def test_deterministic_across_workers(capsys, tmp_path, monkeypatch, command):
    cfg = write_cfg(tmp_path, SMALL[command])
    outs = []
    for workers in ("1", "1", "4"):
        monkeypatch.setenv("POSTRES_WORKERS", workers)
        outs.append(run(capsys, command, "--config", cfg)[1])
    assert outs[0] == outs[1] == outs[2]
