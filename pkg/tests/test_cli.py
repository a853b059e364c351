import csv
import json
import subprocess
import sys
from pathlib import Path

from avezlab import __version__
from avezlab.cli import main

SPECS = Path(__file__).parent.parent / "specs"


def write(tmp_path, text, name="x.spec"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(*args):
    return main([str(a) for a in args])


def load(path):
    return json.loads(Path(path).read_text())


def test_walk_outputs_and_manifest(tmp_path):
    spec = write(tmp_path, "group lattice(1); measure lazy_uniform(1/2); walk n=6 targets=[0,1]")
    out = tmp_path / "out"
    assert run("walk", "--spec", spec, "--out", out) == 0
    rows = list(csv.DictReader((out / "ratio_1.csv").open()))
    assert [r["ratio_lo"] for r in rows] == [f"{n}/{n + 1}" for n in range(1, 7)]
    m = load(out / "manifest.json")
    assert m["exit_code"] == 0 and m["status"] == "ok" and m["exact"] is True
    assert m["version"] == __version__ and m["timings"] == "timings.json"
    for name, digest in m["outputs"].items():
        assert (out / name).exists() and len(digest) == 64
    assert "phases_seconds" in load(out / "timings.json")


def test_period_two_warning_in_manifest(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("describe", "--spec", SPECS / "period_two.spec", "--out", out) == 0
    cap = capsys.readouterr()
    assert "period_two_risk" in cap.out and "odd n" in cap.err
    assert load(out / "manifest.json")["measure_validation"]["aperiodic"] == "period_two_risk"
    assert load(out / "describe.json")["measure"]["validation"]["aperiodic"] == "period_two_risk"


def test_negative_control_exits_one(tmp_path):
    out = tmp_path / "o"
    assert run("verify", "--spec", SPECS / "c13_negative_control.spec", "--out", out) == 1
    doc = load(out / "verify.json")
    assert not doc["passed"]
    failed = [c["name"] for c in doc["checks"] if c["status"] == "fail"]
    assert failed == ["smoothing_invariance"]


def test_cap_exit_keeps_partial_csv(tmp_path):
    out = tmp_path / "o"
    assert run("walk", "--spec", SPECS / "walk_cap.spec", "--out", out, "--cap", 2000) == 2
    index = load(out / "series.json")
    assert not index[0]["complete"] and index[0]["entries"] > 0
    rows = list(csv.reader((out / index[0]["file"]).open()))
    assert len(rows) == index[0]["entries"] + 1
    assert load(out / "manifest.json")["status"] == "cap"


def test_missing_spec_is_io_error(tmp_path):
    assert run("walk", "--spec", tmp_path / "nope.spec", "--out", tmp_path / "o") == 3


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    spec = write(tmp_path, "group cyclic(3); measure lazy_uniform(1/2)")
    assert run("describe", "--spec", spec, "--out", blocker / "sub") == 3


def test_spec_error_exit_and_diagnostic(tmp_path):
    spec = write(tmp_path, "group free(2);\nmeasure lazy_uniform(1/4);\nwalk n=3 targets=[q]")
    out = tmp_path / "o"
    assert run("walk", "--spec", spec, "--out", out) == 4
    err = load(out / "error.json")
    assert err["line"] == 3 and err["error"] == "spec"


def test_command_analysis_mismatch(tmp_path):
    out = tmp_path / "o"
    assert run("walk", "--spec", SPECS / "c07_lazy_z.spec", "--out", out) == 0
    assert run("classify", "--spec", SPECS / "c07_lazy_z.spec", "--out", tmp_path / "p") == 4


def test_usage_errors(tmp_path, capsys):
    assert run("bogus") == 4
    assert run("walk") == 4
    spec = write(tmp_path, "group cyclic(5); measure lazy_uniform(1/3)")
    assert run("walk", "--spec", spec, "--cap", 0) == 4
    bad = write(tmp_path, "group cyclic(5); measure lazy_uniform(1/3); verify inject=nothing", "b.spec")
    assert run("verify", "--spec", bad, "--out", tmp_path / "o") == 4
    assert run("verify", "--spec", spec, "--out", tmp_path / "f", "--float") == 4
    nomeasure = write(tmp_path, "group cyclic(5)", "n.spec")
    assert run("walk", "--spec", nomeasure, "--out", tmp_path / "g") == 4
    assert main(["--version"]) == 0


def test_float_mode_marks_outputs(tmp_path):
    spec = write(tmp_path, "group lattice(1); measure lazy_uniform(1/2); walk n=4 targets=[1]")
    out = tmp_path / "o"
    assert run("walk", "--spec", spec, "--out", out, "--float") == 0
    rows = list(csv.DictReader((out / "ratio_0.csv").open()))
    assert {r["exact"] for r in rows} == {"false"}
    assert load(out / "manifest.json")["exact"] is False


def test_classify_probe_and_chain(tmp_path):
    spec = write(tmp_path, "group lattice(1); measure lazy_uniform(1/2); classify n=400 targets=[1]")
    assert run("classify", "--spec", spec, "--out", tmp_path / "c") == 0
    v = load(tmp_path / "c" / "verdicts.json")
    assert v["verdicts"][0]["verdict"] == "member-evidence"
    assert v["policy"]["window"] == 20
    spec = write(tmp_path, "group cyclic(5); measure lazy_uniform(1/3); probe n=30 radius=1", "p.spec")
    assert run("probe", "--spec", spec, "--out", tmp_path / "p") == 0
    assert load(tmp_path / "p" / "probe.json")
    assert run("chain", "--spec", SPECS / "c10_s3_chain.spec", "--out", tmp_path / "ch") == 0
    doc = load(tmp_path / "ch" / "chain.json")
    assert doc["balanced"] and doc["P"][0] == ["5/8", "3/16", "3/16"]
    assert set(doc["rell"].values()) <= {p.name for p in (tmp_path / "ch").glob("ratio_*.csv")}


def test_seed_override_changes_only_seed(tmp_path):
    spec = SPECS / "c11_kpower_c2c3.spec"
    assert run("verify", "--spec", spec, "--out", tmp_path / "a", "--seed", 5) == 0
    assert load(tmp_path / "a" / "verify.json")["seed"] == 5


def test_module_entry_point_and_determinism(tmp_path):
    spec = SPECS / "c10_rell.spec"
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        proc = subprocess.run([sys.executable, "-m", "avezlab", "chain", "--spec", str(spec), "--out", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        if name != "timings.json":
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
