import xml.etree.ElementTree as ET

import numpy as np
import pytest

from clique.cli import main
from clique.cv import assign_folds, cv_errors, fit_cv
from clique.data import load_csv
from clique.importance import read_importance_csv
from clique.models import Hyperparams, load_predictor


@pytest.fixture
def and_gate_csv(tmp_path):
    path = tmp_path / "d.csv"
    assert main(["simulate", "--kind", "and_gate", "--n", "120", "--seed", "7", "--out", str(path)]) == 0
    return path


def _importance(data, out, *extra):
    return main(["importance", "--in", str(data), "--label", "y", "--task", "classification",
                 "--n-trees", "40", "--seed", "7", "--out", str(out), *extra])


def test_simulate(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["simulate", "--kind", "and_gate", "--n", "400", "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "v1,v2,v3,y"
    assert len(lines) == 401
    assert "n=400 p=3" in capsys.readouterr().out
    again = tmp_path / "again.csv"
    main(["simulate", "--kind", "and_gate", "--n", "400", "--seed", "7", "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_unknown_kind_is_usage_error(tmp_path):
    assert main(["simulate", "--kind", "xor", "--out", str(tmp_path / "x.csv")]) == 1
    assert main([]) == 1


def test_importance_clique(tmp_path, and_gate_csv, capsys):
    out = tmp_path / "imp.csv"
    assert _importance(and_gate_csv, out, "--method", "clique") == 0
    V, ids, names, meta = read_importance_csv(out)
    assert V.shape == (120, 3)
    assert names == ("v1", "v2", "v3")
    assert meta["method"] == "clique" and meta["M"] == "25" and meta["k"] == "10"
    assert meta["loss"] == "zero_one" and meta["seed"] == "7"
    # the printed CV error is the mean of the per-row CV errors
    printed = float(capsys.readouterr().out.split("cv_error (zero_one, k=10) = ")[1].split()[0])
    d = load_csv(and_gate_csv, "y", "classification")
    ens = fit_cv(d, Hyperparams(n_trees=40, seed=7), assign_folds(d, 10, seed=7))
    assert printed == pytest.approx(float(np.mean(cv_errors(ens, d))), abs=1e-6)
    assert meta["cv_error"] == repr(float(np.mean(cv_errors(ens, d))))


def test_importance_values_have_full_precision(tmp_path, and_gate_csv):
    out = tmp_path / "imp.csv"
    _importance(and_gate_csv, out, "--method", "clip", "--M", "7")
    for line in out.read_text().splitlines()[1:]:
        for cell in line.split(",")[1:]:
            v = float(cell)
            assert float(repr(v)) == v


def test_clip_on_single_row(tmp_path):
    data = tmp_path / "one.csv"
    data.write_text("a,b,y\n0.5,0.25,1\n")
    out = tmp_path / "imp.csv"
    assert _importance(data, out, "--method", "clip") == 0
    V, ids, names, meta = read_importance_csv(out)
    assert V.shape == (1, 2) and np.all(V == 0.0)


def test_loss_task_mismatch(tmp_path, and_gate_csv, capsys):
    assert _importance(and_gate_csv, tmp_path / "i.csv", "--loss", "squared_error") == 1
    assert "incompatible" in capsys.readouterr().err


def test_missing_input_reports_stage(tmp_path, capsys):
    assert _importance(tmp_path / "nope.csv", tmp_path / "i.csv") == 1
    assert "error [load]" in capsys.readouterr().err


def test_unwritable_output_is_runtime_error(tmp_path, and_gate_csv):
    assert _importance(and_gate_csv, tmp_path / "missing_dir" / "i.csv", "--M", "3") == 2


def test_global_and_pdp(tmp_path, and_gate_csv):
    out = tmp_path / "g.csv"
    assert _importance(and_gate_csv, out, "--method", "global") == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "feature,importance" and len(rows) == 4
    pdp = tmp_path / "pdp.csv"
    assert _importance(and_gate_csv, pdp, "--method", "pdp", "--feature", "v1", "--M", "9") == 0
    rows = pdp.read_text().splitlines()
    assert rows[0] == "feature,value,mean_prediction" and len(rows) == 10


def test_fit_writes_model_and_folds(tmp_path, and_gate_csv, capsys):
    model = tmp_path / "m.npz"
    folds = tmp_path / "folds.csv"
    assert main(["fit", "--in", str(and_gate_csv), "--label", "y", "--task", "classification",
                 "--n-trees", "10", "--out", str(model), "--folds-out", str(folds)]) == 0
    assert load_predictor(model).n_trees == 10
    assert folds.read_text().startswith("id,fold\n")
    assert "cv_error" in capsys.readouterr().out


def test_summarize(tmp_path, and_gate_csv, capsys):
    out = tmp_path / "imp.csv"
    _importance(and_gate_csv, out)
    stats_file = tmp_path / "s.txt"
    args = ["summarize", "--importance", str(out), "--data", str(and_gate_csv), "--label", "y",
            "--task", "classification", "--feature", "v1"]
    assert main(args + ["--region", "v2 > -0.333333", "--out", str(stats_file)]) == 0
    stats = dict(line.split("=", 1) for line in stats_file.read_text().splitlines())
    V, *_ = read_importance_csv(out)
    d = load_csv(and_gate_csv, "y", "classification")
    mask = d.X[:, 1] > -0.333333
    assert float(stats["in.mean"]) == pytest.approx(V[mask, 0].mean(), abs=1e-9)
    assert int(stats["in.count"]) == mask.sum()
    # region covering every row
    capsys.readouterr()
    assert main(args + ["--region", "v1 > -5"]) == 0
    text = capsys.readouterr().out
    assert f"in.count={d.n}" in text and "out.count=0" in text
    assert f"in.mean={V[:, 0].mean():.9g}" in text
    assert "ratio_mean_in_out=NA" in text


def test_summarize_all_zero_column(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("a,b,y\n1,0,0\n2,0,1\n3,0,0\n4,0,1\n")
    imp = tmp_path / "imp.csv"
    imp.write_text("id,a,b\n0,0.0,0.0\n1,0.0,0.0\n2,0.0,0.0\n3,0.0,0.0\n")
    out = tmp_path / "s.txt"
    assert main(["summarize", "--importance", str(imp), "--data", str(data), "--label", "y",
                 "--task", "classification", "--feature", "b", "--region", "a > 2", "--out", str(out)]) == 0
    stats = dict(line.split("=", 1) for line in out.read_text().splitlines())
    assert stats["in.mean"] == "0" and stats["out.variance"] == "0"
    assert stats["ratio_mean_in_out"] == "NA"


def test_plot_scatter_and_box(tmp_path, and_gate_csv):
    imp = tmp_path / "imp.csv"
    _importance(and_gate_csv, imp)
    common = ["--importance", str(imp), "--data", str(and_gate_csv), "--label", "y",
              "--task", "classification", "--feature", "v1"]
    svg1 = tmp_path / "s.svg"
    assert main(["plot", *common, "--region", "v2 > -0.3333", "--out", str(svg1)]) == 0
    root = ET.parse(svg1).getroot()
    assert len([g for g in root.iter() if g.tag.endswith("}g")]) == 2
    svg2 = tmp_path / "b.svg"
    assert main(["plot", *common, "--style", "box", "--group-by", "y", "--out", str(svg2)]) == 0
    ET.parse(svg2)
    svg3 = tmp_path / "one.svg"
    assert main(["plot", *common, "--style", "box", "--out", str(svg3)]) == 0
    assert ET.parse(svg3).getroot() is not None
    # same inputs, same bytes
    svg4 = tmp_path / "s2.svg"
    main(["plot", *common, "--region", "v2 > -0.3333", "--out", str(svg4)])
    assert svg1.read_bytes() == svg4.read_bytes()


def test_plot_id_mismatch(tmp_path, and_gate_csv):
    imp = tmp_path / "imp.csv"
    _importance(and_gate_csv, imp, "--M", "3")
    lines = imp.read_text().splitlines()
    lines[1] = "x" + lines[1]
    imp.write_text("\n".join(lines) + "\n")
    assert main(["plot", "--importance", str(imp), "--data", str(and_gate_csv), "--label", "y",
                 "--task", "classification", "--feature", "v1", "--out", str(tmp_path / "p.svg")]) == 1


def test_experiment_command(tmp_path, capsys):
    out = tmp_path / "exp"
    code = main(["experiment", "--kind", "and_gate", "--n", "200", "--n-trees", "60", "--seed", "1",
                 "--out", str(out)])
    text = capsys.readouterr().out
    assert code in (0, 3)
    assert ("overall: PASS" in text) == (code == 0)
    assert (out / "clique.csv").is_file() and (out / "report.txt").is_file()
