import json
import math

import pytest

from zeta_apoints.apoint_cache import (
    HEADER,
    ApointCache,
    Coverage,
    atomic_write,
    coverage_path,
    enumerate_into,
    read_cache,
    write_cache,
)
from zeta_apoints.apoint_engine import APoint
from zeta_apoints.errors import CacheIncomplete, InvalidInput
from zeta_apoints.zeta_kernel import TargetSpec


@pytest.fixture(scope="module")
def small_cache():
    cache = ApointCache()
    enumerate_into(cache, TargetSpec(0, 0), 60.0)
    enumerate_into(cache, TargetSpec(1, 0), 40.0)
    enumerate_into(cache, TargetSpec(-0.5 + 2j, 1), 40.0)
    return cache


def test_round_trip_is_exact(small_cache, tmp_path):
    path = tmp_path / "c.csv"
    write_cache(small_cache, path)
    back = read_cache(path)
    assert back.entries == small_cache.entries


def test_file_layout(small_cache, tmp_path):
    path = tmp_path / "c.csv"
    write_cache(small_cache, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(HEADER)
    keys = []
    for line in lines[1:]:
        k, re, im, _, gamma, *_ = line.split(",")
        keys.append((int(k), float(re), float(im), float(gamma)))
    assert keys == sorted(keys)
    side = json.loads(coverage_path(path).read_text())
    assert len(side["coverage"]) == 3


def test_rewrite_is_byte_identical(small_cache, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_cache(small_cache, a)
    write_cache(read_cache(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert coverage_path(a).read_bytes() == coverage_path(b).read_bytes()


def test_query_outside_coverage_is_refused(small_cache):
    with pytest.raises(CacheIncomplete):
        small_cache.points(TargetSpec(0, 0), 1, 61)
    with pytest.raises(CacheIncomplete):
        small_cache.points(TargetSpec(0, 3), 1, 10)
    assert len(small_cache.points(TargetSpec(0, 0), 1, 50)) == 10


def test_gammas_repeat_by_multiplicity():
    t = TargetSpec(0, 0)
    cache = ApointCache()
    cache.add(t, [APoint(0.5, 20.0, t, 0.0, 2), APoint(0.5, 10.0, t, 0.0)], Coverage(1.0, 30.0, -2, 6))
    assert cache.gammas(t) == [10.0, 20.0, 20.0]


def test_coverage_starts_at_one():
    cov = Coverage(1 + 1e-6, 100.0, -2.0, 6.0)
    assert cov.covers(1.0, 100.0)
    assert not cov.covers(1.0, 100.5)
    assert not Coverage(5.0, 100.0, -2, 6).covers(1.0, 50.0)


def test_missing_files_are_incomplete(small_cache, tmp_path):
    with pytest.raises(CacheIncomplete):
        read_cache(tmp_path / "nope.csv")
    path = tmp_path / "c.csv"
    write_cache(small_cache, path)
    coverage_path(path).unlink()
    with pytest.raises(CacheIncomplete):
        read_cache(path)


def test_malformed_rows_are_invalid(small_cache, tmp_path):
    path = tmp_path / "c.csv"
    write_cache(small_cache, path)
    text = path.read_text()
    path.write_text(text.replace("k,a_re", "kk,a_re", 1))
    with pytest.raises(InvalidInput):
        read_cache(path)
    path.write_text(text + "0,0.0,0.0,0.5,notanumber,1,0.0\n")
    with pytest.raises(InvalidInput):
        read_cache(path)
    path.write_text(text + "4,0.0,0.0,0.5,12.0,1,0.0\n")
    with pytest.raises(InvalidInput):
        read_cache(path)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write(target, "first")
    atomic_write(target, "second")
    assert target.read_text() == "second"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_mismatched_target_is_rejected():
    cache = ApointCache()
    p = APoint(0.5, 14.0, TargetSpec(0, 0), 0.0)
    with pytest.raises(InvalidInput):
        cache.add(TargetSpec(1, 0), [p], Coverage(1.0, 20.0, -2, 6))


def test_unbounded_query_uses_full_coverage(small_cache):
    cov = small_cache.coverage(TargetSpec(1, 0))
    assert small_cache.points(TargetSpec(1, 0)) == small_cache.points(TargetSpec(1, 0), 1, cov.t_high)
    assert math.isfinite(cov.t_high)
