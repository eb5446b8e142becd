import csv
import io
import json
import math

import pytest

from adxlab import cli


def run_capture(argv):
    buf = io.StringIO()
    status = cli.run(argv, stream=buf)
    return status, buf.getvalue()


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return [dict(zip(header, row)) for row in body]


class TestParsing:
    def test_psd_spec(self):
        psd = cli.parse_psd("flat:W=0.5")
        assert psd.kind == "flat" and psd.params["W"] == 0.5
        assert cli.parse_psd("tri:W=0.4").kind == "triangular"
        assert cli.parse_psd("multimodal:center=0.3,width=0.08").kind == "multimodal"

    def test_range_forms(self):
        assert cli.parse_range("1.5") == [1.5]
        assert cli.parse_range("0:1:3") == pytest.approx([0.0, 0.5, 1.0])
        got = cli.parse_range("log:0.1:10:3")
        assert got == pytest.approx([0.1, 1.0, 10.0])

    def test_bad_range(self):
        with pytest.raises(Exception):
            cli.parse_range("1:2")


class TestCommands:
    def test_drf_flat_value(self):
        status, out = run_capture(["drf", "--psd", "flat:W=0.5", "--rate", "1"])
        assert status == 0
        rec = parse_csv(out)[0]
        assert float(rec["distortion"]) == pytest.approx(0.25, rel=1e-6)
        assert float(rec["f_R"]) == pytest.approx(1.0, abs=1e-6)

    def test_drf_zero_rate(self):
        _, out = run_capture(["drf", "--psd", "flat:W=0.5", "--rate", "0"])
        assert float(parse_csv(out)[0]["distortion"]) == pytest.approx(1.0)

    def test_critical_ou_has_closed_form_column(self):
        _, out = run_capture(["critical", "--psd", "ou:f0=1", "--rate", "1"])
        rec = parse_csv(out)[0]
        assert float(rec["f_R"]) == pytest.approx(float(rec["f_R_closed_form"]),
                                                  rel=1e-3)

    def test_adx_filter_modes(self):
        for mode in ("lpf", "allpass", "optimal", "branches:3"):
            status, out = run_capture([
                "adx", "--psd", "flat:W=0.5", "--rate", "1",
                "--fs", "0.5", "--filter", mode])
            assert status == 0
            assert float(parse_csv(out)[0]["total"]) == pytest.approx(
                0.53125, rel=1e-6)

    def test_pcm_optimum_meta(self):
        status, out = run_capture([
            "pcm", "--psd", "tri:W=0.5", "--rate", "1", "--fs", "0.2:1:5",
            "--optimum", "--json"])
        assert status == 0
        doc = json.loads(out)
        assert doc["schema"] == "adx-lab.v1"
        assert doc["meta"]["f_s_optimal"] < 1.0

    def test_simulate_pcm(self):
        status, out = run_capture([
            "simulate", "--psd", "flat:W=0.5", "--fs", "1", "--rate", "8",
            "--trials", "20", "--seed", "3", "--json"])
        assert status == 0
        rec = json.loads(out)["records"][0]
        assert abs(rec["empirical"] - rec["analytic_pcm"]) < 0.2 * rec["analytic_pcm"]

    def test_simulate_mmse(self):
        status, out = run_capture([
            "simulate", "--psd", "flat:W=0.5", "--fs", "0.5",
            "--pipeline", "mmse", "--trials", "20", "--seed", "3"])
        assert status == 0
        rec = parse_csv(out)[0]
        assert float(rec["empirical_mmse"]) == pytest.approx(0.5, rel=0.1)

    def test_piecewise_file(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("psd-piecewise v1\n0.0 2.0\n0.5 0.0\n")
        status, out = run_capture(
            ["drf", "--psd", f"piecewise:file={path}", "--rate", "1"])
        assert status == 0
        assert 0.0 < float(parse_csv(out)[0]["distortion"]) < 0.5


class TestEncodings:
    ARGS = ["drf", "--psd", "ou:f0=1", "--rate", "0.5:2:4"]

    def test_csv_json_value_equality(self):
        _, csv_text = run_capture(self.ARGS)
        _, json_text = run_capture(self.ARGS + ["--json"])
        doc = json.loads(json_text)
        rows = parse_csv(csv_text)
        assert len(rows) == len(doc["records"])
        for row, rec in zip(rows, doc["records"]):
            for key, val in rec.items():
                assert float(row[key]) == val

    def test_deterministic_output(self):
        _, a = run_capture(self.ARGS)
        _, b = run_capture(self.ARGS)
        assert a == b


class TestExitCodes:
    def test_success(self):
        status, _ = run_capture(["drf", "--psd", "flat:W=0.5", "--rate", "1"])
        assert status == 0

    def test_unknown_psd_kind(self):
        status, _ = run_capture(["drf", "--psd", "bogus:W=1", "--rate", "1"])
        assert status == 1

    def test_malformed_flag_value(self):
        status, _ = run_capture(["drf", "--psd", "flat:W", "--rate", "1"])
        assert status == 1

    def test_missing_file(self):
        status, _ = run_capture(
            ["drf", "--psd", "piecewise:file=/nonexistent", "--rate", "1"])
        assert status == 1

    def test_unknown_filter_mode(self):
        status, _ = run_capture(["adx", "--psd", "flat:W=0.5", "--rate", "1",
                                 "--fs", "0.5", "--filter", "sideways"])
        assert status == 1

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.build_parser().parse_args(["--version"])
        assert exc.value.code == 0


def test_entrypoint_help_mentions_columns():
    parser = cli.build_parser()
    text = parser.format_help()
    assert "drf" in text and "pcm" in text and "simulate" in text
