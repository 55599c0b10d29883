import json
import subprocess
import sys

import pytest

from symred.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cutlift_exhaustive(capsys):
    code, out, _ = run(capsys, "cutlift", "--n", "4", "--exhaustive")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,m,mode,hom_defect,hom_bound,roundtrip,roundtrip_bound,ok"
    assert "4,3,exhaustive,2/3,2/3,1/2,1/2,1" in lines


def test_cutlift_malformed_range(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cutlift", "--n", "3-x"])
    assert exc.value.code == 2
    assert "malformed range" in capsys.readouterr().err


def test_cutlift_exhaustive_cap(capsys):
    code, _, err = run(capsys, "cutlift", "--n", "9", "--exhaustive")
    assert code == 2 and "capped" in err


def test_stability_missing_manifest(capsys, tmp_path):
    code, _, err = run(capsys, "stability", str(tmp_path / "nope.ini"))
    assert code == 2 and "manifest not found" in err


def test_stability_writes_files(capsys, tmp_path):
    man = tmp_path / "grid.ini"
    man.write_text("degrees = 12\ndeltas = 0, 1/12\ntrials = 2\nseed = 3\n")
    code, _, _ = run(capsys, "stability", str(man), "--out-dir", str(tmp_path / "out"))
    assert code == 0
    summary = json.loads((tmp_path / "out" / "stability_summary.json").read_text())
    assert [c["delta"] for c in summary["cells"]] == ["0", "1/12"]
    assert (tmp_path / "out" / "stability_trials.csv").read_text().startswith("n,m,delta,trial")


def test_lattice(capsys):
    code, out, _ = run(capsys, "lattice", "--n", "4")
    assert code == 0
    assert "4,1,2,1,1,3/4,3,1" in out.splitlines()


def test_rearrange_powers(capsys, tmp_path):
    k, l = tmp_path / "k.txt", tmp_path / "l.txt"
    k.write_text("geometric 1 2\n")
    l.write_text("geometric 1 3\n")
    code, out, _ = run(capsys, "rearrange", str(k), str(l), "--epsilon", "0.4", "--horizon", "64")
    assert code == 0
    payload = json.loads(out)
    assert payload["feasible"] is False
    assert payload["min_epsilon_float"] >= 0.4
    assert payload["out_shadow_k"]["discrete"] is True


def test_rearrange_self_is_identity(capsys, tmp_path):
    k = tmp_path / "k.txt"
    k.write_text("\n".join(str(v) for v in [5, 3, 8, 1]) + "\n")
    code, out, _ = run(capsys, "rearrange", str(k), str(k))
    assert code == 0 and json.loads(out)["f"] == [0, 1, 2, 3]


def test_defects(capsys):
    code, out, _ = run(capsys, "defects", "--source", "affine 1 2", "--horizon", "4", "--format", "json")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert [s["hom"] for s in stages[:3]] == ["0", "1", "2/3"]


def test_psif(capsys, tmp_path):
    elem = tmp_path / "e.txt"
    elem.write_text("shape: 2 3 4\n2: 2 1\n3: 2 3 1\n4: 4 3 2 1\n")
    code, out, _ = run(capsys, "psif", str(elem), "--f", "shift 1", "--format", "json")
    assert code == 0
    cert = json.loads(out)
    assert cert["flagged"] == [{"stage": 2, "reason": "out-of-horizon"}]
    code, out, _ = run(capsys, "psif", str(elem), "--f", "shift 1")
    assert out.splitlines()[1:] == ["2: 2 1", "3: 1 3 2", "4: 1 2 3 4"]


def test_psif_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "psif", str(tmp_path / "x"), "--f", "identity")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "symred", "lattice", "--n", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("n,t1,t2")
