import csv
import io
import json
import subprocess
import sys

from anticonc.bounds import CSV_COLUMNS
from anticonc.cli import main
from oracles import central_binomial


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def base(n=8, tau=0.0, **kw):
    d = {"weights": [[1.0]] * n, "law_x": {"atoms": [-1, 1], "masses": [0.5, 0.5]},
         "tau": tau, "epsilon": 1.0}
    d.update(kw)
    return d


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_kv(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


def parse_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return rows


class TestQ:
    def test_enumeration(self, tmp_path, capsys):
        code, out, _ = run(["q", write(tmp_path, "s.json", base())], capsys)
        kv = parse_kv(out)
        assert code == 0 and float(kv["q"]) == 0.2734375 and kv["method"] == "enumeration"

    def test_mc_deterministic(self, tmp_path, capsys):
        path = write(tmp_path, "s.json", base(tau=0.5))
        _, out1, _ = run(["q", path, "--mc", "--seed", "7", "--samples", "20000"], capsys)
        _, out2, _ = run(["q", path, "--mc", "--seed", "7", "--samples", "20000"], capsys)
        kv = parse_kv(out1)
        assert out1 == out2 and kv["method"] == "monte-carlo" and kv["seed"] == "7"
        assert "stderr" in kv

    def test_infinite_tau(self, tmp_path, capsys):
        code, out, _ = run(["q", write(tmp_path, "s.json", base(tau="inf"))], capsys)
        assert code == 0 and float(parse_kv(out)["q"]) == 1.0

    def test_malformed(self, tmp_path, capsys):
        code, _, err = run(["q", write(tmp_path, "s.json", "{oops")], capsys)
        assert code == 2 and "invalid JSON" in err
        code, _, _ = run(["q", str(tmp_path / "missing.json")], capsys)
        assert code == 2

    def test_cap(self, tmp_path, capsys):
        path = write(tmp_path, "s.json", base(n=10, enumeration_cap=100))
        code, _, err = run(["q", path], capsys)
        assert code == 3 and "--mc" in err
        code, _, _ = run(["q", path, "--mc", "--samples", "5000"], capsys)
        assert code == 0


class TestBound:
    def test_all(self, tmp_path, capsys):
        code, out, _ = run(["bound", write(tmp_path, "s.json", base(tau=0.5))], capsys)
        rep = json.loads(out)
        assert code == 0
        for name in ("esseen", "thm1", "cor1", "cor2", "cor2_lambda"):
            assert rep[name] is not None
        assert rep["scenario"]["quadrature"]["nodes_per_axis"] == 513

    def test_v_not_dominated(self, tmp_path, capsys):
        s = write(tmp_path, "s.json", base(tau=0.5))
        v = write(tmp_path, "v.json", {"atoms": [2.0], "masses": [0.4]})
        code, _, err = run(["bound", s, "--v", "file", "--v-file", v], capsys)
        assert code == 4 and "2.0" in err
        v = write(tmp_path, "v2.json", {"atoms": [2.0], "masses": [0.2]})
        code, out, _ = run(["bound", s, "--v", "file", "--v-file", v], capsys)
        assert code == 0 and json.loads(out)["v_choice"] == "custom"

    def test_cor2_tau_zero(self, tmp_path, capsys):
        code, out, _ = run(["bound", write(tmp_path, "s.json", base()), "--which", "cor2"],
                           capsys)
        rep = json.loads(out)
        assert code == 0 and rep["cor2_lambda"] == 0.5 and rep["esseen"] is None

    def test_cor2_lambda_zero_flagged(self, tmp_path, capsys):
        pm = base(tau=1.0, law_x={"atoms": [0.0], "masses": [1.0]})
        code, out, _ = run(["bound", write(tmp_path, "s.json", pm), "--which", "cor2"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["cor2"] is None and "cor2:vacuous_lambda_zero" in rep["flags"]

    def test_csv(self, tmp_path, capsys):
        code, out, _ = run(["bound", write(tmp_path, "s.json", base(tau=0.5)), "--format", "csv",
                            "--v", "floor"], capsys)
        assert code == 0 and out.splitlines()[0] == ",".join(CSV_COLUMNS)
        assert len(parse_csv(out)) == 1


class TestSweep:
    def sweep(self, tmp_path, capsys, spec):
        code, out, _ = run(["sweep", write(tmp_path, "sw.json", spec)], capsys)
        assert code == 0
        return parse_csv(out)

    def test_tau(self, tmp_path, capsys):
        rows = self.sweep(tmp_path, capsys, {"base": base(), "axis": "tau",
                                              "values": [0, 0.25, 0.5, 1]})
        qs = [float(r["q_exact"]) for r in rows]
        assert len(rows) == 4 and qs == sorted(qs)

    def test_epsilon(self, tmp_path, capsys):
        rows = self.sweep(tmp_path, capsys, {"base": base(tau=0.5), "axis": "epsilon",
                                              "values": [0.1, 0.2, 0.3, 1.0]})
        assert len({r["q_exact"] for r in rows}) == 1
        assert len({r["cor1"] for r in rows}) > 1 and len({r["cor2"] for r in rows}) > 1

    def test_n(self, tmp_path, capsys):
        rows = self.sweep(tmp_path, capsys, {"base": base(), "axis": "n", "values": [4, 8, 12],
                                              "family": {"kind": "all_ones", "n": 1}})
        assert [float(r["q_exact"]) for r in rows] == [central_binomial(n) for n in (4, 8, 12)]
        rows = self.sweep(tmp_path, capsys, {"base": base(), "axis": "n", "values": [2, 4]})
        assert [int(r["n"]) for r in rows] == [2, 4]

    def test_lambda_exp_and_row_failures(self, tmp_path, capsys):
        rows = self.sweep(tmp_path, capsys, {"base": base(tau=0.5), "axis": "lambda_exp",
                                              "values": [0.2, 0.5, 0.9]})
        assert len(rows) == 3
        assert rows[0]["thm1_tail"] != "" and "lambda=0.2" in rows[0]["flags"]
        assert rows[2]["thm1_tail"] == "" and "V_not_dominated" in rows[2]["flags"]
        rows = self.sweep(tmp_path, capsys, {"base": base(tau=2.0), "axis": "lambda_exp",
                                              "values": [0.5]})
        assert "error:" in rows[0]["flags"]

    def test_invalid(self, tmp_path, capsys):
        code, _, _ = run(["sweep", write(tmp_path, "a.json", {"base": base(), "axis": "tau",
                                                               "values": [1, 0]})], capsys)
        assert code == 2
        code, _, _ = run(["sweep", write(tmp_path, "b.json", {"base": base(), "axis": "zeta",
                                                               "values": [1]})], capsys)
        assert code == 2


class TestVerify:
    def test_cf(self, tmp_path, capsys):
        code, out, _ = run(["verify", "--suite", "cf", "--out", str(tmp_path)], capsys)
        assert code == 0 and "max violation" in out
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["suites"]["cf"]["failures"] == 0
        assert (tmp_path / "verify_report.xml").exists()

    def test_all_byte_identical(self, tmp_path, capsys):
        outs = []
        for k in (1, 2):
            d = tmp_path / f"r{k}"
            code, _, _ = run(["verify", "--suite", "all", "--seed", "1", "--count", "10",
                              "--out", str(d)], capsys)
            assert code == 0
            outs.append(d)
        for name in ("verify_report.json", "verify_report.xml", "constants.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_corrupted_tolerance(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ANTICONC_QUAD_RELTOL", "1e-300")
        code, out, _ = run(["verify", "--suite", "jensen", "--count", "6", "--out",
                            str(tmp_path)], capsys)
        assert code == 1 and "FAILED" in out


def test_console_script(tmp_path):
    path = write(tmp_path, "s.json", base())
    res = subprocess.run([sys.executable, "-m", "anticonc.cli", "q", path],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "0.2734375" in res.stdout
