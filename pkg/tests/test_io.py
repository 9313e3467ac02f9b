import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_dataset
from ssma import io
from ssma.alignment import AlignmentParams, fit
from ssma.errors import ConfigError, DataError
from ssma.evaluate import ExperimentConfig, ExperimentResult, ResultRow
from ssma.synth import toy_dataset


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_dataset_round_trip(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, dims=(3, 1, 2), n=8)
    # awkward doubles survive the text format bit for bit
    dom = ds.domains[0]
    feats = dom.features.copy()
    feats[0, 0], feats[1, 1] = 0.1 + 0.2, np.nextafter(1.0, 2.0)
    ds = ds.replace([dom.with_features(feats), *ds.domains[1:]])
    assert io.parse_dataset(io.format_dataset(ds)) == ds


def test_dataset_header_and_rows():
    text = io.format_dataset(toy_dataset("s", 2, seed=0))
    lines = text.splitlines()
    assert lines[0] == "#ssma-dataset v1; domains=2; dims=2,2; classes=3"
    assert len(lines) == 1 + 12
    assert lines[1].startswith("1,1,")


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("#ssma-dataset v1; domains=1; dims=2; classes=2\na,1,0.5\n", 2),
        ("#ssma-dataset v1; domains=1; dims=1; classes=2\na,1,0.5\na,x,1\n", 3),
        ("#ssma-dataset v1; domains=1; dims=1; classes=2\na,3,0.5\n", 2),
        ("#ssma-dataset v1; domains=1; dims=1; classes=2\na,1,0.5\nb,1,0.5\n", 3),
        ("#ssma-dataset v2; domains=1; dims=1; classes=2\n", 1),
        ("hello\n", 1),
    ],
)
def test_dataset_parse_errors_carry_line(text, lineno):
    with pytest.raises(DataError, match=f"f.csv:{lineno}"):
        io.parse_dataset(text, "f.csv")


def test_dataset_domain_count_mismatch():
    with pytest.raises(DataError, match="declares 2 domains"):
        io.parse_dataset("#ssma-dataset v1; domains=2; dims=1,1; classes=2\na,1,0.5\n")


def test_model_round_trip():
    model = fit(toy_dataset("srt", 30, seed=1), AlignmentParams(mu=0.5, k=5, dims=3))
    text = io.format_model(model)
    back = io.parse_model(text)
    assert back == model
    assert io.format_model(back) == text
    assert '"mu": 0.5' in text and text.startswith("#ssma-model v1.0\n")


def test_model_newer_major_version_fails():
    text = io.format_model(fit(toy_dataset("s", 20, seed=0))).replace("#ssma-model v1.0", "#ssma-model v2.0", 1)
    with pytest.raises(DataError, match="newer"):
        io.parse_model(text)


def test_model_missing_entry():
    text = io.format_model(fit(toy_dataset("s", 20, seed=0)))
    text = "\n".join(line for line in text.splitlines() if not line.startswith("dims ="))
    with pytest.raises(DataError, match="dims"):
        io.parse_model(text)


def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig(toy={"setting": "sr", "seed": 3}, budgets=[0, 5], methods=["ssma", "pca"], dims=2)
    path = tmp_path / "c.json"
    io.write_config(cfg, path)
    assert io.read_config(path) == cfg
    assert json.loads(path.read_text())["budgets"] == [0, 5]


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        io.read_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        io.read_config(bad)


def test_results_round_trip(tmp_path):
    rows = [ResultRow("1", "2", "target", 5, "ssma", 0, 0.123456789, 0.5, 2, seconds=1.5)]
    res = ExperimentResult(rows)
    path = tmp_path / "r.csv"
    io.write_results(res, path)
    assert io.read_results(path).rows == rows
    assert "seconds" not in path.read_text()


def test_coordinates_table():
    text = io.format_coordinates([(0, "a", 1, np.array([1.0, 2.0])), (1, "a", None, np.array([3.0, 4.0]))], 2, "z")
    assert text.splitlines() == ["sample,domain,label,z1,z2", "0,a,1,1.0,2.0", "1,a,,3.0,4.0"]
