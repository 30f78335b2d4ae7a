import json

import pytest

from cpforge.errors import ParseError
from cpforge.quality import Hyper, save_model, train
from cpforge.sampler import SamplerParams, sample_dataset, write_dataset
from cpforge.validate import sniff_kind, validate_file, validate_path
from test_quality import enemy_toy_set


@pytest.fixture(scope="module")
def model():
    return train(enemy_toy_set(), Hyper())


def test_sniff_kinds(tmp_path, model):
    data = tmp_path / "d.jsonl"
    write_dataset(sample_dataset(5, SamplerParams(seed=1)), data)
    assert sniff_kind(data) == "dataset"
    m = tmp_path / "m.txt"
    save_model(model, m)
    assert sniff_kind(m) == "model"
    junk = tmp_path / "x.bin"
    junk.write_text("!!!!\n")
    with pytest.raises(ParseError):
        sniff_kind(junk)


def test_dataset_with_wrong_features_flagged(tmp_path):
    data = tmp_path / "d.jsonl"
    write_dataset(sample_dataset(5, SamplerParams(seed=2)), data)
    lines = data.read_text().splitlines()
    first = json.loads(lines[0])
    first["features"]["enemy_count"] += 1
    lines[0] = json.dumps(first, sort_keys=True, separators=(",", ":"))
    data.write_text("\n".join(lines) + "\n")
    problems = validate_file(data)
    assert any("features" in p for p in problems)


def test_cpset_below_theta_flagged(tmp_path, model):
    from cpforge.pipeline import generate_cps, write_cpset

    cpset = generate_cps(model, 10, SamplerParams(seed=3), theta=0.5)
    path = tmp_path / "cps.jsonl"
    write_cpset(cpset, path)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["theta"] = 0.9999  # raise the header threshold above stored p values
    lines[0] = json.dumps(header, sort_keys=True, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")
    problems = validate_file(path)
    assert any("below theta" in p for p in problems)


def test_validate_path_missing_file(tmp_path):
    with pytest.raises(ParseError):
        validate_path(tmp_path / "missing.jsonl")
