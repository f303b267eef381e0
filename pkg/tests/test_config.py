from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw6.config import (CacheError, ConfigError, RunConfig, grid_steps,
                        read_cache, write_cache)


def test_defaults_consistent():
    cfg = RunConfig()
    assert cfg.digits == 60
    assert cfg.work_digits == 70
    assert cfg.t_p == 36 and cfg.t_n == -60
    assert cfg.u_work_digits > cfg.digits + cfg.stiff_amp_digits
    assert cfg.u_build_stages >= 24


def test_with_override():
    cfg = RunConfig().with_(digits=80, t_m=Fraction(-1, 20))
    assert cfg.digits == 80
    assert cfg.stiff_amp_digits <= 1
    assert RunConfig().digits == 60


@pytest.mark.parametrize("kw", [
    {"digits": 10},
    {"stages": 0},
    {"t_n": Fraction(1)},
    {"t_m": Fraction(-70)},
    {"fmt": "xml"},
    {"t_h": Fraction(10)},          # seed accuracy guard
])
def test_rejects_bad_config(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_clipped_plan():
    cfg = RunConfig()
    plan = cfg.clipped_plan(Fraction(20), Fraction(-5))
    assert plan[0][0] == 20 and plan[-1][1] == -5
    steps = grid_steps(plan)
    total = sum(h for _, h in steps)
    assert total == 25
    with pytest.raises(ConfigError):
        cfg.clipped_plan(Fraction(-70), Fraction(-80))


def test_grid_steps_exact():
    steps = grid_steps(((Fraction(2), Fraction(0), Fraction(1, 4)),))
    assert len(steps) == 8
    assert steps[0] == (Fraction(2), Fraction(1, 4))
    with pytest.raises(ConfigError):
        grid_steps(((Fraction(1, 2), Fraction(0), Fraction(1, 3)),))


def test_grid_key_changes_with_config():
    a = RunConfig().grid_key("u")
    b = RunConfig().with_(digits=61).grid_key("u")
    c = RunConfig().grid_key("phi")
    assert a != b and a != c
    assert a == RunConfig().grid_key("u")


def test_cache_roundtrip(tmp_path):
    path = str(tmp_path / "c.txt")
    write_cache(path, {"kind": "test"}, ["alpha 1", "beta 2"])
    header, lines = read_cache(path)
    assert header["kind"] == "test"
    assert lines == ["alpha 1", "beta 2"]
    assert read_cache(str(tmp_path / "absent.txt")) is None


def test_cache_corruption_detected(tmp_path):
    path = str(tmp_path / "c.txt")
    write_cache(path, {"kind": "test"}, ["alpha 1"])
    raw = open(path).read()
    open(path, "w").write(raw.replace("alpha 1", "alpha 2"))
    with pytest.raises(CacheError):
        read_cache(path)
    open(path, "w").write("not a cache\n")
    with pytest.raises(CacheError):
        read_cache(path)


@settings(max_examples=30, deadline=None)
@given(lines=st.lists(st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=126),
    min_size=1, max_size=30), min_size=1, max_size=10))
def test_cache_roundtrip_property(tmp_path_factory, lines):
    path = str(tmp_path_factory.mktemp("cc") / "c.txt")
    write_cache(path, {}, lines)
    _, got = read_cache(path)
    assert got == lines
