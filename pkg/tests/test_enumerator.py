import random

import pytest

from sophlab.core import Dyadic
from sophlab.enumerator import (
    CorruptFileError,
    EnumConfig,
    HaltRecord,
    ResourceLimitError,
    VersionError,
    content_hash,
    enumerate_domain,
    load_table,
    manifest_path,
    naive_oracle,
    save_table,
)
from sophlab.machine import in_domain, run


def test_lmax4_single_record():
    table = enumerate_domain(EnumConfig(4, 10, 4))
    assert table.records == (HaltRecord("1111", "", 1),)


def test_lmax6_records():
    table = enumerate_domain(EnumConfig(6, 10, 4))
    assert set(table.records) == {
        HaltRecord("1111", "", 1),
        HaltRecord("001111", "0", 2),
        HaltRecord("011111", "1", 2),
    }
    assert table.records == naive_oracle(EnumConfig(6, 10, 4)).records


def test_lmax0_empty():
    assert len(enumerate_domain(EnumConfig(0, 10))) == 0


def test_naive_oracle_small():
    assert len(naive_oracle(EnumConfig(3, 4096))) == 0
    assert len(naive_oracle(EnumConfig(4, 4096))) == 1
    with pytest.raises(ValueError):
        naive_oracle(EnumConfig(19, 10))


@pytest.mark.parametrize("lmax", [1, 5, 8, 11, 13])
@pytest.mark.parametrize("aux", ["", "0", "1", "01", "110"])
def test_matches_naive_oracle(lmax, aux):
    cfg = EnumConfig(lmax, 4096, 64, aux)
    assert enumerate_domain(cfg).records == naive_oracle(cfg).records


@pytest.mark.parametrize("tmax,ocap", [(1, 64), (3, 64), (5, 2), (4096, 0), (4096, 1)])
def test_matches_naive_oracle_under_tight_limits(tmax, ocap):
    cfg = EnumConfig(12, tmax, ocap)
    table = enumerate_domain(cfg)
    assert table.records == naive_oracle(cfg).records
    assert all(r.steps <= tmax and len(r.output) <= ocap for r in table.records)


def test_records_replay(domain16):
    for rec in domain16.records:
        out = run(rec.program, "", 4096, 64)
        assert in_domain(out, rec.program)
        assert (out.output, out.steps, out.frontier) == (rec.output, rec.steps, rec.frontier)


def test_prune_soundness_spot_check(domain16):
    """Random strings outside the table must not halt cleanly."""
    rng = random.Random(3)
    domain = domain16.programs()
    checked = 0
    while checked < 10_000:
        n = rng.randint(1, 16)
        p = format(rng.getrandbits(n), f"0{n}b")
        if p in domain:
            continue
        assert not in_domain(run(p, "", 4096, 64), p)
        checked += 1


def test_kraft(domain16):
    assert domain16.kraft_sum() <= Dyadic(1)


def test_workers_do_not_change_result():
    cfg = EnumConfig(13, 4096)
    assert enumerate_domain(cfg, workers=3).records == enumerate_domain(cfg).records
    assert enumerate_domain(cfg, workers=2, split_depth=3).records == enumerate_domain(cfg).records


def test_resource_limit():
    with pytest.raises(ResourceLimitError):
        enumerate_domain(EnumConfig(14, 4096), max_live=5)


def test_save_load_round_trip(tmp_path, domain12):
    path = tmp_path / "domain.csv"
    save_table(domain12, path)
    first = path.read_bytes()
    loaded = load_table(path)
    assert loaded == domain12
    assert loaded.manifest.content_hash == content_hash(domain12.records)
    save_table(loaded, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == first


def test_file_format(tmp_path):
    table = enumerate_domain(EnumConfig(6, 10, 4))
    path = tmp_path / "d.csv"
    save_table(table, path)
    assert path.read_text().splitlines() == [
        "# soph-lab v1; machine=RM1-v1; lmax=6; tmax=10; ocap=4; aux=e",
        "program,output,steps",
        "1111,e,1",
        "001111,0,2",
        "011111,1,2",
    ]
    assert manifest_path(path).exists()


def test_truncated_file_is_corrupt(tmp_path, domain12):
    path = tmp_path / "domain.csv"
    save_table(domain12, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptFileError):
        load_table(path)


def test_edited_record_is_corrupt(tmp_path, domain12):
    path = tmp_path / "domain.csv"
    save_table(domain12, path)
    path.write_text(path.read_text().replace("1111,e,1", "1111,e,2"))
    with pytest.raises(CorruptFileError):
        load_table(path)


def test_foreign_machine_is_version_error(tmp_path, domain12):
    path = tmp_path / "domain.csv"
    save_table(domain12, path)
    path.write_text(path.read_text().replace("machine=RM1-v1", "machine=RM2-v9"))
    with pytest.raises(VersionError):
        load_table(path)
