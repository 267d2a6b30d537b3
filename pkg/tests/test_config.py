import json

import pytest

from camrkit.config import (
    DEFAULTS,
    ConfigError,
    apply_override,
    dump_config,
    load_config,
    published_config,
    train_config,
)


def test_defaults_validate():
    cfg = load_config()
    assert cfg == DEFAULTS
    assert train_config(cfg, "relation").optimizer == "adam"


def test_override_types():
    cfg = apply_override(DEFAULTS, "heads.relation.learning_rate=0.5")
    assert cfg["heads"]["relation"]["learning_rate"] == 0.5
    cfg = apply_override(cfg, "scorer.relation_alignment=joint")
    assert cfg["scorer"]["relation_alignment"] == "joint"
    assert DEFAULTS["scorer"]["relation_alignment"] == "separate"


@pytest.mark.parametrize("override", ["nope=1", "heads.relation.lr=1", "heads.relation.epochs"])
def test_bad_override(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


@pytest.mark.parametrize("override", ["scorer.restarts=0", "heads.norm.optimizer=\"rmsprop\"",
                                      "embedding.kind=bert", "heads.surface.context_hidden=0"])
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_file_round_trip(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(dump_config(published_config()), encoding="utf-8")
    cfg = load_config(p, ["seed=7"])
    assert cfg["seed"] == 7
    assert cfg["heads"]["surface"]["batch_size"] == 10
    assert cfg["heads"]["relation"]["learning_rate"] == 7e-5


def test_version_and_paths_checked(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"version": 2}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text(json.dumps({"version": 1, "paths": {"train": "missing.camr"}}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p)
    (tmp_path / "t.camr").write_text("", encoding="utf-8")
    p.write_text(json.dumps({"version": 1, "paths": {"train": "t.camr"}}), encoding="utf-8")
    assert load_config(p)["paths"]["train"] == str(tmp_path / "t.camr")


def test_malformed_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p)
