import csv
import hashlib
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from procal.cli import main, read_manifest
from procal.dataset import emit_csv, load_csv, make_blobs


@pytest.fixture
def data_csv(tmp_path):
    path = tmp_path / "blobs.csv"
    emit_csv(make_blobs(700, 4, classes=3, seed=0, center_box=4.0), path)
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_perturb_static_rows_and_manifest(tmp_path, data_csv):
    out = tmp_path / "p.csv"
    before = digest(data_csv)
    assert main(["perturb", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--kprime", "100", "--seed", "7"]) == 0
    assert len(rows(out)) == 701
    assert digest(data_csv) == before
    man = read_manifest(str(out) + ".manifest")
    assert man["command"] == "perturb" and man["seed"] == "7"
    assert man[f"sha256:{out}"] == digest(out)
    assert not (tmp_path / "p.csv.provenance.csv").exists()
    # labels are carried through in the class column
    assert sorted(r[-1] for r in rows(out)[1:]) == sorted(r[-1] for r in rows(data_csv)[1:])


def test_perturb_test_mode_sidecar(tmp_path, data_csv):
    out = tmp_path / "p.csv"
    assert main(["perturb", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--k", "5", "--test-mode"]) == 0
    prov = rows(tmp_path / "p.csv.provenance.csv")
    assert prov[0] == ["source_row"]
    assert sorted(int(r[0]) for r in prov[1:]) == list(range(700))


def test_perturb_stream_release_sizes(tmp_path):
    src = tmp_path / "s.csv"
    emit_csv(make_blobs(7000, 3, seed=1), src)
    out = tmp_path / "s_out.csv"
    assert main(["perturb", "--mode", "stream", "--buffer", "1000", "--threshold", "3",
                 "--kprime", "50", "--in", str(src), "--out", str(out), "--class-col", "-1"]) == 0
    assert len(rows(out)) == 7001
    assert json.loads(read_manifest(str(out) + ".manifest")["release_sizes"]) == [3000, 3000, 1000]


def test_perturb_stream_stdin(tmp_path):
    text = "".join(",".join(map(str, r)) + "\n" for r in np.arange(40.0).reshape(20, 2))
    out = tmp_path / "o.csv"
    proc = subprocess.run([sys.executable, "-m", "procal", "perturb", "--mode", "stream",
                           "--buffer", "5", "--threshold", "2", "--kprime", "2", "--no-header",
                           "--in", "-", "--out", str(out)],
                          input=text, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(rows(out)) == 20


@pytest.mark.parametrize("extra, code, name", [
    (["--kprime", "1"], 2, "InvalidGroupSize"),
    (["--mode", "stream", "--k", "10", "--buffer", "15", "--threshold", "2"], 2, "InvalidStreamConfig"),
    (["--method", "rp", "--mode", "stream", "--buffer", "10", "--threshold", "1"], 2, "ConfigError"),
])
def test_guard_exits(tmp_path, data_csv, capsys, extra, code, name):
    rc = main(["perturb", "--in", str(data_csv), "--out", str(tmp_path / "x.csv"),
               "--class-col", "-1", *extra])
    assert rc == code
    assert name in capsys.readouterr().err


def test_usage_error_exit(capsys):
    assert main(["perturb", "--bogus"]) == 2


def test_missing_input_exit(tmp_path):
    assert main(["perturb", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv"),
                 "--kprime", "5"]) == 3


def test_non_numeric_exit(tmp_path, data_csv, capsys):
    assert main(["perturb", "--in", str(data_csv), "--out", str(tmp_path / "o.csv"),
                 "--kprime", "5"]) == 3
    assert "NonNumericValue" in capsys.readouterr().err


def test_attack_report(tmp_path, data_csv):
    out = tmp_path / "a.csv"
    args = ["attack", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
            "--method", "procal,dc,rp", "--kprime", "50", "--seed", "2"]
    assert main(args) == 0
    table = rows(out)
    assert table[0] == ["method", "NImin", "NIavg", "ICAmin", "ICAavg", "IOmin", "IOavg"]
    assert [r[0] for r in table[1:]] == ["k'-P2RoCAl", "DC", "RP"]
    for r in table[1:]:
        v = [float(x) for x in r[1:]]
        assert all(x >= 0 for x in v)
        assert v[0] <= v[1] and v[2] <= v[3] and v[4] <= v[5]
    first = (digest(out), digest(tmp_path / "a.txt"))
    assert main(args) == 0
    assert (digest(out), digest(tmp_path / "a.txt")) == first


def test_attack_rp_full_known_fraction(tmp_path, data_csv):
    out = tmp_path / "a.csv"
    assert main(["attack", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--method", "rp", "--iterations", "1", "--known-fraction", "1.0"]) == 0
    assert float(rows(out)[1][5]) <= 1e-6


def test_attack_existing_perturbed(tmp_path, data_csv):
    p = tmp_path / "p.csv"
    main(["perturb", "--in", str(data_csv), "--out", str(p), "--class-col", "-1", "--kprime", "20",
          "--test-mode"])
    out = tmp_path / "a.csv"
    assert main(["attack", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--perturbed", str(p), "--provenance", str(p) + ".provenance.csv"]) == 0
    assert rows(out)[1][0] == "perturbed"
    assert main(["attack", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--perturbed", str(p)]) == 3


def test_evaluate_grid(tmp_path, data_csv):
    out = tmp_path / "e.csv"
    assert main(["evaluate", "--in", str(data_csv), "--out", str(out), "--class-col", "-1",
                 "--kprime", "50", "--methods", "procal,dc,rp", "--normalize", "raw"]) == 0
    table = rows(out)
    assert table[0] == ["dataset", "scaling", "original", "k'-P2RoCAl", "DC", "RP"]
    assert all(0.0 <= float(x) <= 1.0 for x in table[1][2:])
    config = json.loads(read_manifest(str(out) + ".manifest")["config"])
    assert (config["folds"], config["knn_k"]) == (10, 1)


def test_evaluate_without_labels(tmp_path, data_csv, capsys):
    assert main(["evaluate", "--in", str(data_csv), "--out", str(tmp_path / "e.csv"),
                 "--kprime", "50"]) == 3
    assert "NoLabels" in capsys.readouterr().err


def test_bench_rows(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--sweep", "n", "--values", "4,8", "--fixed", "500", "--k", "5",
                 "--repeats", "1", "--out", str(out)]) == 0
    table = rows(out)
    assert len(table) == 3 and table[1][:2] == ["500", "4"]
    work = rows(tmp_path / "b.csv.workload.csv")
    assert work[0] == ["m", "n", "data_sha256", "output_sha256"]


def test_synth_and_replay(tmp_path):
    out = tmp_path / "syn.csv"
    assert main(["synth", "--m", "100", "--n", "3", "--out", str(out)]) == 0
    first = digest(out)
    out.unlink()
    assert main(["replay", str(out) + ".manifest"]) == 0
    assert digest(out) == first
    assert load_csv(out, class_column=-1).m == 100


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "procal", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "procal" in proc.stdout
