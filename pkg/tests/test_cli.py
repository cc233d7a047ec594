import io
import json
import shutil
import subprocess
import sys

import pytest

from orbitstrata.cli import main
from orbitstrata.example_o3 import DATA_DIR


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture
def broken_bundle(tmp_path):
    dst = tmp_path / "bundle"
    shutil.copytree(DATA_DIR, dst)
    f = dst / "pmatrix.poly"
    f.write_text(f.read_text().replace("P22 = 4*p2", "P22 = 5*p2"))
    return dst


def test_verify_single_group_passes():
    code, text = run("verify", "--only", "so3")
    assert code == 0
    assert text.splitlines()[-1] == "1 passed, 0 failed"


def test_verify_names_the_corrupted_entry(broken_bundle):
    code, text = run("verify", "--bundle", str(broken_bundle), "--only", "pmatrix")
    assert code == 1
    failed = [ln for ln in text.splitlines() if ln.startswith("FAIL")]
    assert len(failed) == 1 and "P22" in failed[0]


def test_usage_errors(capsys):
    assert run("verify", "--only", "nonsense")[0] == 2
    assert run("classify", "1", "2")[0] == 2
    assert run("sample", "S9")[0] == 2
    assert run("strata", "--only", "S9")[0] == 2
    assert run("classify", "--tol", "0", "0", "0", "0", "0", "0")[0] == 2
    assert run("minimize", "a1*p1")[0] == 2
    assert run("minimize", "p1 +* p2")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("verify", "--bundle", "/nonexistent/bundle")[0] == 2
    assert "orbitstrata:" in capsys.readouterr().err


def test_classify_examples():
    # image of the S4 typical point (1, 1, 0, 0, 0, 0, 1, 1)
    r3 = 3 ** 0.5
    code, text = run("classify", "4", "2", str(4 * r3), str(2 * r3), "8")
    assert code == 0 and "verdict      S4" in text
    assert "S0" in run("classify", "0", "0", "0", "0", "0")[1]
    assert "outside orbit space" in run("classify", "-1", "0", "0", "0", "0")[1]


def test_classify_records():
    code, text = run("classify", "--format", "records", "1", "0", "0", "0", "0")
    rec = json.loads(text)
    assert code == 0 and rec["psd"] and rec["stratum"] == "S2B" and rec["rank"] == 2
    rec = json.loads(run("classify", "--format", "records", "-1", "0", "0", "0", "0")[1])
    assert rec["psd"] is False and rec["stratum"] is None


def test_classify_so3_basis():
    code, text = run("classify", "--format", "records", "0", "0", "0", "0", "0", "0")
    rec = json.loads(text)
    assert code == 0 and rec["on_Z"] and rec["rank"] == 0


def test_records_are_reproducible():
    a = run("sample", "S4", "--samples", "5", "--seed", "11", "--format", "records")[1]
    b = run("sample", "S4", "--samples", "5", "--seed", "11", "--format", "records")[1]
    assert a == b and len(a.splitlines()) == 5
    c = run("sample", "S4", "--samples", "5", "--seed", "12", "--format", "records")[1]
    assert a != c


def test_pmatrix_output():
    code, text = run("pmatrix", "--det")
    lines = text.splitlines()
    assert code == 0 and "P22 = 4*p2" in lines and lines[-1].startswith("det = ")
    code, text = run("pmatrix", "--so3", "--format", "records")
    recs = [json.loads(ln) for ln in text.splitlines()]
    assert code == 0 and len(recs) == 21 and recs[-1]["entry"] == "P66"


def test_strata_output():
    code, text = run("strata")
    assert code == 0 and "S4  dimension 4" in text and "Delta:" in text
    code, text = run("strata", "--only", "S2B", "--format", "records")
    rec = json.loads(text)
    assert rec["dimension"] == 2 and rec["phi"][2] == "-2*r3*l2"


def test_sample_text():
    code, text = run("sample", "S3", "--samples", "3")
    assert code == 0 and text.startswith("S3: 3 points") and text.count("lambda") == 3


def test_minimize_smoke(tmp_path):
    f = tmp_path / "pot.txt"
    f.write_text("a1*p1 +\n p1^2\n")
    code, text = run("minimize", f"@{f}", "--grid", "a1=-1:1:2", "--seeds", "2",
                     "--format", "records")
    recs = [json.loads(ln) for ln in text.splitlines()]
    assert code == 0 and len(recs) == 2
    assert recs[1]["winner"] == "S0"
    assert recs[0]["values"]["S1"] == pytest.approx(-0.25, abs=1e-6)


def test_minimize_text_table():
    code, text = run("minimize", "p1^2 - p1", "--seeds", "2")
    assert code == 0 and "winner" in text.splitlines()[0]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "orbitstrata", "classify", "0", "0", "0", "0", "0"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and "S0" in r.stdout
