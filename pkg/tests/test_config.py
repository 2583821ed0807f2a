import pytest

from trialkit import ConfigError
from trialkit.config import load_config, parse_config

BASE = {
    "model": {"lam": 1.0, "horizon": 5.0, "mu0": 0.5},
    "distribution": {"kind": "uniform", "lo": 0.9, "hi": 1.1},
    "task": {"name": "solve", "wl": 0.0},
}


def doc(**patches):
    out = {k: dict(v) for k, v in BASE.items()}
    for key, val in patches.items():
        block, _, field = key.partition("__")
        if field:
            if val is None:
                out[block].pop(field, None)
            else:
                out[block][field] = val
        elif val is None:
            out.pop(block, None)
        else:
            out[block] = val
    return out


def reason_of(bad) -> str:
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    return err.value.reason


def test_minimal_valid_config():
    cfg = parse_config(doc())
    assert cfg.task == "solve"
    assert cfg.lam == 1.0
    assert cfg.horizon == 5.0
    assert cfg.args["wl"] == 0.0
    assert cfg.args["selection"] == 0.0  # default filled in
    assert cfg.out_dir == "out"
    assert cfg.formats == ("json", "csv", "png")
    assert cfg.params().mu0 == 0.5
    assert cfg.distribution().support_lo == pytest.approx(0.9)


def test_lambda_alias():
    cfg = parse_config(doc(model={"lambda": 2.0, "horizon": 5.0, "mu0": 0.5}))
    assert cfg.lam == 2.0
    bad = doc(model={"lam": 1.0, "lambda": 2.0, "horizon": 5.0, "mu0": 0.5})
    assert reason_of(bad).startswith("conflicting_fields:model.lam")


def test_missing_and_unknown_fields():
    assert reason_of(doc(model__lam=None)) == "missing_field:model.lam"
    assert reason_of(doc(task__wl=None)) == "missing_field:task.wl"
    assert reason_of(doc(task__bogus=1.0)) == "unknown_field:task.bogus"
    assert reason_of(doc(model__bogus=1.0)) == "unknown_field:model.bogus"
    assert reason_of({**doc(), "extra": {}}) == "unknown_block:extra"
    assert reason_of(doc(model=None)) == "missing_block:model"


def test_type_mismatches():
    assert reason_of(doc(task__wl="zero")).startswith("bad_type:task.wl")
    assert reason_of(doc(model__lam=True)).startswith("bad_type:model.lam")
    grid = doc(task={"name": "frontier", "grid": 2.5})
    assert reason_of(grid).startswith("bad_type:task.grid")


def test_unknown_task_and_distribution():
    assert reason_of(doc(task={"name": "optimize"})).startswith("unknown_task")
    bad = doc(distribution={"kind": "lognormal", "lo": 0.1, "hi": 2.0})
    assert reason_of(bad).startswith("unknown_distribution")


def test_tabulated_distribution_points():
    d = doc(
        distribution={
            "kind": "tabulated",
            "points": [[0.0, 0.0], [1.02, 0.2], [1.08, 1.0]],
        }
    )
    cfg = parse_config(d)
    assert cfg.distribution().family == "tabulated"
    bad = doc(distribution={"kind": "tabulated", "points": [[0.0, 0.0], [1.0]]})
    assert reason_of(bad).startswith("bad_type:distribution.points")


def test_horizon_or_rate_required():
    no_time = doc(model={"lam": 1.0, "mu0": 0.5})
    assert reason_of(no_time).startswith("missing_field")
    # r alone only works for the infinite-horizon extension
    inf = doc(
        model={"lam": 1.0, "r": 0.1, "mu0": 0.3},
        task={"name": "extension", "which": "infinite-horizon", "wl": 0.0},
    )
    cfg = parse_config(inf)
    assert cfg.r == 0.1
    with pytest.raises(ConfigError):
        cfg.params()  # finite-horizon params unavailable
    r_only_solve = doc(model={"lam": 1.0, "r": 0.1, "mu0": 0.3})
    assert reason_of(r_only_solve) == "missing_field:model.horizon"


def test_extension_needs_fields():
    bad = doc(task={"name": "extension", "which": "bad-news", "wl": 0.0})
    assert reason_of(bad).startswith("missing_field:task.")
    unknown = doc(task={"name": "extension", "which": "premium", "wl": 0.0})
    assert reason_of(unknown).startswith("unknown_extension")


def test_tiered_needs_screening():
    bad = doc(task={"name": "tiered", "wl": 0.0})
    assert reason_of(bad) == "missing_field:task.screening"
    good = doc(
        task={"name": "tiered", "wl": 0.0, "screening": [[0.0, 0.0], [1.0, 1.0]]}
    )
    cfg = parse_config(good)
    assert cfg.args["screening"] == ((0.0, 0.0), (1.0, 1.0))


def test_frontier_grid_weights_conflict():
    both = doc(task={"name": "frontier", "grid": 10, "weights": [0.0, 1.0]})
    assert reason_of(both).startswith("conflicting_fields")


def test_check_family_validation():
    bad = doc(task={"name": "check", "wl": 0.0, "family": "premium"})
    assert reason_of(bad).startswith("unknown_family")
    tiered = doc(task={"name": "check", "wl": 0.0, "family": "tiered"})
    assert reason_of(tiered) == "missing_field:task.screening"


def test_output_block():
    cfg = parse_config({**doc(), "output": {"dir": "reports", "formats": ["json"]}})
    assert cfg.out_dir == "reports"
    assert cfg.formats == ("json",)
    bad = {**doc(), "output": {"formats": ["json", "pdf"]}}
    assert reason_of(bad).startswith("unknown_format")


def test_oracle_mode_validation():
    bad = doc(task={"name": "oracle", "wl": 0.0, "mode": "full"})
    assert reason_of(bad).startswith("unknown_mode")
    cfg = parse_config(doc(task={"name": "oracle", "wl": 0.0}))
    assert cfg.args["mode"] == "restricted"
    assert cfg.args["bins"] == 6


def test_load_config_errors(tmp_path):
    missing = tmp_path / "none.toml"
    with pytest.raises(ConfigError) as err:
        load_config(missing)
    assert err.value.reason == "unreadable_config"
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\nlam = ")
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert err.value.reason == "invalid_toml"


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(
        '[model]\nlam = 1.0\nhorizon = 5.0\nmu0 = 0.5\n\n'
        '[distribution]\nkind = "uniform"\nlo = 0.9\nhi = 1.1\n\n'
        '[task]\nname = "solve"\nwl = 0.25\n'
    )
    cfg = parse_config(load_config(p))
    assert cfg.args["wl"] == 0.25
