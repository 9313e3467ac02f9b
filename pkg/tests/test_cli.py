import json

import pytest

from ssma import io
from ssma.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["toy", "--setting", "sr", "--n-per-class", "40", "--seed", "3", "-o", str(d / "toy.csv")]) == 0
    assert main(["align", str(d / "toy.csv"), "-o", str(d / "model.txt")]) == 0
    return d


def test_toy_settings(workdir):
    ds = io.read_dataset(workdir / "toy.csv")
    assert ds.dims == [2, 2] and ds.n_samples == 240


def test_toy_is_deterministic(tmp_path):
    args = ["toy", "--setting", "srt", "--seed", "7", "--n-per-class", "30"]
    main(args + ["-o", str(tmp_path / "a.csv")])
    main(args + ["-o", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_toy_setting_s_is_scale_only(tmp_path):
    main(["toy", "--setting", "s", "--n-per-class", "30", "--seed", "1", "-o", str(tmp_path / "s.csv")])
    main(["toy", "--setting", "none", "--n-per-class", "30", "--seed", "1", "-o", str(tmp_path / "n.csv")])
    s, n = io.read_dataset(tmp_path / "s.csv"), io.read_dataset(tmp_path / "n.csv")
    assert (s.domains[1].features == 2 * n.domains[1].features).all()


def test_toy_one_class_is_usage_error(capsys):
    assert main(["toy", "--classes", "1"]) == 2
    assert "classes" in capsys.readouterr().err


def test_align_model_shape(workdir):
    model = io.read_model(workdir / "model.txt")
    assert model.F.shape == (4, 4)
    assert 1 <= model.dims <= 4


def test_align_mu_zero_recorded(workdir):
    out = workdir / "mu0.txt"
    assert main(["align", str(workdir / "toy.csv"), "--mu", "0", "--dims", "2", "-o", str(out)]) == 0
    model = io.read_model(out)
    assert model.params.mu == 0.0 and model.dims == 2


def test_align_missing_file(capsys):
    assert main(["align", "does-not-exist.csv"]) == 3
    assert "error" in capsys.readouterr().err


def test_align_parse_error_has_line_and_module(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("#ssma-dataset v1; domains=1; dims=2; classes=2\na,1,0.5\n")
    assert main(["align", str(bad)]) == 3
    err = capsys.readouterr().err
    assert "bad.csv:2" in err and "[io]" in err


def test_align_fit_error_provenance(tmp_path, capsys):
    tiny = tmp_path / "tiny.csv"
    main(["toy", "--n-per-class", "2", "-o", str(tiny)])
    assert main(["align", str(tiny)]) == 3
    assert "[alignment]" in capsys.readouterr().err


def test_project_columns(workdir):
    out = workdir / "z.csv"
    assert main(["project", str(workdir / "model.txt"), str(workdir / "toy.csv"), "--dims", "2", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sample,domain,label,z1,z2"
    assert len(lines) == 1 + 240
    assert main(["project", str(workdir / "model.txt"), str(workdir / "toy.csv"), "--domain", "2", "-o", str(out)]) == 0
    assert {line.split(",")[1] for line in out.read_text().splitlines()[1:]} == {"2"}


def test_synthesize_round_trip_column(workdir):
    out = workdir / "syn.csv"
    args = ["synthesize", str(workdir / "model.txt"), str(workdir / "toy.csv"), "--src", "1", "--dst", "1", "-o", str(out)]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0].endswith("recon_error")
    assert max(float(line.split(",")[-1]) for line in lines[1:]) <= 1e-6


def test_synthesize_unknown_domain(workdir):
    args = ["synthesize", str(workdir / "model.txt"), str(workdir / "toy.csv"), "--src", "1", "--dst", "9"]
    assert main(args) == 3


def _config(path, **kw):
    cfg = dict(
        toy={"setting": "sr", "n_per_class": 40, "seed": 0},
        budgets=[0, 5],
        leading_budget=10,
        unlabeled=10,
        realizations=1,
        c_grid=[100.0],
    )
    path.write_text(json.dumps(cfg | kw))
    return str(path)


def test_experiment_and_overrides(tmp_path, capsys):
    cfg = _config(tmp_path / "c.json")
    out = tmp_path / "r.csv"
    assert main(["experiment", cfg, "--methods", "none,ssma", "-o", str(out)]) == 0
    res = io.read_results(out)
    assert {r.budget for r in res.rows} == {0, 5}
    assert {r.method for r in res.rows} == {"none", "ssma"}
    assert "mean_kappa" in capsys.readouterr().out


def test_experiment_mixed_dims_none_is_config_error(tmp_path, capsys):
    from ssma.data import DomainDataset, MultiDomainDataset
    import numpy as np

    rng = np.random.default_rng(0)
    ds = MultiDomainDataset(
        (
            DomainDataset("a", rng.standard_normal((8, 20)), [1, 2] * 10),
            DomainDataset("b", rng.standard_normal((4, 20)), [1, 2] * 10),
        ),
        2,
    )
    io.write_dataset(ds, tmp_path / "mixed.csv")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dataset": "mixed.csv", "methods": ["none"]}))
    assert main(["experiment", str(cfg)]) == 2
    assert "none" in capsys.readouterr().err


def test_experiment_invalid_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"toy": {}, "budgets": [-1], "folds": 1}))
    assert main(["experiment", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "budgets" in err and "folds" in err


def test_eval_kappa(tmp_path, capsys):
    cm = tmp_path / "cm.csv"
    cm.write_text("30,10\n10,50\n")
    assert main(["eval-kappa", str(cm), "--confusion"]) == 0
    assert "kappa=0.583333" in capsys.readouterr().out
    pairs = tmp_path / "p.csv"
    pairs.write_text("true,pred\n1,1\n2,2\n1,2\n2,2\n")
    assert main(["eval-kappa", str(pairs)]) == 0
    assert "accuracy=0.750000" in capsys.readouterr().out
    pairs.write_text("1,a\n")
    assert main(["eval-kappa", str(pairs)]) == 3
