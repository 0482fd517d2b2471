import csv
import io

import pytest

from oagrade.cli import run


def call(argv):
    out = io.StringIO()
    code = run(argv, out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    code, _ = call(["synth", "--out", str(data), "--seed", "5"])
    assert code == 0
    model = root / "model.txt"
    code, text = call(["train", "--manifest", str(data / "manifest.csv"), "--seed", "5", "--model", str(model)])
    assert code == 0
    return root, data, model, text


def test_train_requires_manifest(capsys):
    code, _ = call(["train"])
    assert code == 1
    assert "usage" in capsys.readouterr().err


def test_no_subcommand_and_unknown_flag():
    assert call([])[0] == 1
    assert call(["synth", "--out", "x", "--bogus", "1"])[0] == 1
    assert call(["frobnicate"])[0] == 1


def test_gradcheck_seed_7():
    code, text = call(["gradcheck", "--seed", "7"])
    assert code == 0
    err = float(text.split("error:")[1].split()[0])
    assert err < 1e-6


def test_synth_output(cli_run):
    _, data, _, _ = cli_run
    assert len(list(data.glob("*.pgm"))) == 68
    assert (data / "manifest.csv").read_text().startswith("path,grade,split\n")


def test_train_prints_epochs(cli_run):
    *_, text = cli_run
    lines = [l for l in text.splitlines() if l.startswith("epoch ")]
    assert lines[0].startswith("epoch 1 mse ")
    assert "recognition 1.0000" in lines[-1]
    assert "converged" in text or "max epochs" in text


def test_evaluate_train_split(cli_run):
    _, data, model, _ = cli_run
    code, text = call(["evaluate", "--model", str(model), "--manifest", str(data / "manifest.csv"), "--split", "train"])
    assert code == 0
    assert "accuracy: 1.0000" in text


def test_evaluate_writes_csv(cli_run, tmp_path):
    _, data, model, _ = cli_run
    out_csv = tmp_path / "cm.csv"
    code, _ = call(["evaluate", "--model", str(model), "--manifest", str(data / "manifest.csv"),
                    "--split", "validation", "--csv", str(out_csv)])
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["truth", "pred_1", "pred_2", "pred_3", "pred_4"]
    assert sum(int(x) for r in rows[1:] for x in r[1:]) == 20


def test_predict(cli_run):
    _, data, model, _ = cli_run
    code, text = call(["predict", "--model", str(model), "--image", str(data / "g2_train_000.pgm")])
    assert code == 0
    assert text.splitlines()[-1] == "grade: 2"
    assert text.startswith("outputs: ")


def test_predict_missing_image(cli_run, capsys):
    _, _, model, _ = cli_run
    code, _ = call(["predict", "--model", str(model), "--image", "/nonexistent.pgm"])
    assert code == 2
    assert capsys.readouterr().err.strip()


def test_extract_csv(cli_run, tmp_path):
    _, data, _, _ = cli_run
    out = tmp_path / "features.csv"
    code, _ = call(["extract", "--manifest", str(data / "manifest.csv"), "--out", str(out)])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][:3] == ["path", "grade", "f000"] and rows[0][-1] == "f131"
    assert len(rows) == 69
    assert all(len(r) == 134 for r in rows)
    assert abs(sum(float(x) for x in rows[1][2:130]) - 1.0) < 1e-9


def test_bad_manifest_is_data_error(tmp_path):
    bad = tmp_path / "m.csv"
    bad.write_text("path,grade,split\na.pgm,9,train\n")
    code, _ = call(["extract", "--manifest", str(bad), "--out", str(tmp_path / "f.csv")])
    assert code == 2


def test_bad_bundle_is_data_error(cli_run, tmp_path):
    _, data, model, _ = cli_run
    broken = tmp_path / "broken.txt"
    broken.write_text(model.read_text().replace("format_version = 1", "format_version = 999"))
    code, _ = call(["evaluate", "--model", str(broken), "--manifest", str(data / "manifest.csv")])
    assert code == 2


def test_train_is_byte_deterministic(cli_run, tmp_path):
    _, data, model, _ = cli_run
    again = tmp_path / "again.txt"
    code, _ = call(["train", "--manifest", str(data / "manifest.csv"), "--seed", "5", "--model", str(again)])
    assert code == 0
    assert again.read_bytes() == model.read_bytes()


def test_invalid_hyperparameter_is_usage_error(cli_run, tmp_path):
    _, data, _, _ = cli_run
    code, _ = call(["train", "--manifest", str(data / "manifest.csv"), "--momentum", "1.5",
                    "--model", str(tmp_path / "m.txt")])
    assert code == 1


def test_gradcheck_failure_exit_code(monkeypatch):
    from oagrade import neuralnet

    real = neuralnet.gradients
    monkeypatch.setattr(neuralnet, "gradients", lambda *a: tuple(2.0 * g for g in real(*a)))
    code, _ = call(["gradcheck", "--trials", "1"])
    assert code == 3
