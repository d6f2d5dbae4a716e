"""TOML config parsing: defaults, provenance, rejection, round trips."""

import pytest

from prune_lab.config import (
    ConfigFileError,
    parse_config,
    parse_config_text,
    serialize_config,
)
from prune_lab.schedule import ScheduleKind


def test_empty_config_applies_all_defaults():
    cfg = parse_config_text("")
    spec = cfg.schedule_spec()
    assert (spec.alpha, spec.beta) == (14.0, 5.0)
    assert cfg.values["lr"]["lr_max"] == 0.001
    assert cfg.values["train"]["epochs"] == 60
    assert all(v == "default" for v in cfg.provenance.values())


def test_empty_one_cycle_section_gets_alpha_beta_defaults():
    cfg = parse_config_text('[schedule]\nkind = "one_cycle"\n')
    spec = cfg.schedule_spec()
    assert spec.kind is ScheduleKind.ONE_CYCLE
    assert (spec.alpha, spec.beta) == (14.0, 5.0)
    assert cfg.provenance["schedule.kind"] == "file"
    assert cfg.provenance["schedule.alpha"] == "default"


def test_baseline_pretrain_defaults():
    assert parse_config_text('[schedule]\nkind = "one_shot"').schedule_spec().pretrain_fraction == 0.4
    assert parse_config_text('[schedule]\nkind = "iterative"').schedule_spec().pretrain_fraction == 0.2
    assert parse_config_text('[schedule]\nkind = "agp"').schedule_spec().pretrain_fraction == 0.2


def test_semantic_error_names_key():
    with pytest.raises(ConfigFileError, match="s_f"):
        parse_config_text("[schedule]\ns_i = 0.9\ns_f = 0.5\n")


def test_unknown_key_suggests_close_match():
    with pytest.raises(ConfigFileError, match="alpha"):
        parse_config_text("[schedule]\nalpa = 10.0\n")


def test_unknown_section_rejected():
    with pytest.raises(ConfigFileError, match="schedule"):
        parse_config_text("[schedul]\n")


def test_syntax_error_carries_location():
    with pytest.raises(ConfigFileError, match="line"):
        parse_config_text("[schedule\nalpha = 1\n")


def test_type_error_named():
    with pytest.raises(ConfigFileError, match="train.epochs"):
        parse_config_text('[train]\nepochs = "many"\n')


def test_round_trip_is_fixed_point():
    text = """
[schedule]
kind = "agp"
s_f = 0.9

[train]
epochs = 10
seed = 3
"""
    cfg = parse_config_text(text)
    once = serialize_config(cfg)
    again = serialize_config(parse_config_text(once))
    assert once == again
    assert parse_config_text(once).values == cfg.values


def test_parse_from_file(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("[train]\nepochs = 2\nseed = 9\n[dataset]\nn = 50\n")
    cfg = parse_config(p)
    assert cfg.values["train"]["epochs"] == 2
    rc = cfg.run_config()
    assert rc.seed == 9
    assert len(rc.dataset.labels) == 50


def test_missing_file():
    with pytest.raises(ConfigFileError, match="no such file"):
        parse_config("/nonexistent/x.toml")


def test_run_config_dimension_mismatch():
    with pytest.raises(ConfigFileError, match="layer_dims"):
        parse_config_text("[network]\nlayer_dims = [3, 8, 2]\n").run_config()
