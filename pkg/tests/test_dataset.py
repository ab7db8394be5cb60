import json

import numpy as np
import pytest

from reachfield.dataset import (
    MANIFEST_FILE,
    RECORDS_FILE,
    CountMismatchError,
    DatasetError,
    DatasetWriter,
    IntegrityError,
    OrderError,
    OrderedBuffer,
    SchemaError,
    VersionMismatchError,
    encode_record,
    parse_line,
    read_dataset,
    read_manifest,
    record_line,
    write_dataset,
)
from reachfield.sampler import episode_for_index


@pytest.fixture(scope="module")
def episodes(tmp_path_factory):
    from reachfield.config import ScenarioConfig

    cfg = ScenarioConfig(episodes=4)
    recs = []
    for i in range(4):
        recs.extend(episode_for_index(cfg, i)[1])
    return cfg, recs


@pytest.fixture
def written(tmp_path, episodes):
    cfg, recs = episodes
    out = tmp_path / "ds"
    write_dataset(recs, out, cfg.to_dict(), "episodes: 4\n", cfg.master_seed, 4)
    return out


def test_empty_stream(tmp_path):
    m = write_dataset([], tmp_path / "e", {}, "", 0, 0)
    assert m.record_count == 0 and m.episode_count == 0
    manifest, it = read_dataset(tmp_path / "e")
    assert list(it) == [] and manifest.checksum == m.checksum


def test_round_trip_bitwise(written, episodes, tmp_path):
    _, recs = episodes
    manifest, it = read_dataset(written, decode=False)
    raw = list(it)
    assert raw == [encode_record(r) for r in recs]
    # re-serializing what was read reproduces the file byte for byte
    again = "".join(record_line(d) + "\n" for d in raw)
    assert again == (written / RECORDS_FILE).read_text(encoding="utf-8")
    assert manifest.record_count == len(recs)
    assert manifest.config_text == "episodes: 4\n"


def test_decoded_records_match(written, episodes):
    _, recs = episodes
    _, it = read_dataset(written)
    for a, b in zip(it, recs):
        np.testing.assert_array_equal(a.chunk.dp, b.chunk.dp)
        np.testing.assert_array_equal(a.chunk.gripper, b.chunk.gripper)
        np.testing.assert_allclose(a.observation.pose.rotation, b.observation.pose.rotation, atol=1e-14)
        assert a.observation.step == b.observation.step


def test_corrupted_byte_reports_line(written):
    path = written / RECORDS_FILE
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    target = 2  # 0-based, reported as line 3
    i = lines[target].index('"n_real":') + len('"n_real":')
    digit = lines[target][i]
    lines[target] = lines[target][:i] + ("7" if digit != "7" else "8") + lines[target][i + 1 :]
    path.write_text("".join(lines), encoding="utf-8")
    with pytest.raises(IntegrityError) as info:
        read_dataset(written)
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_count_mismatch(written):
    mpath = written / MANIFEST_FILE
    raw = json.loads(mpath.read_text())
    raw["record_count"] += 1
    mpath.write_text(json.dumps(raw))
    with pytest.raises(CountMismatchError):
        read_dataset(written)


def test_version_mismatch(written):
    mpath = written / MANIFEST_FILE
    raw = json.loads(mpath.read_text())
    raw["format_version"] = 99
    mpath.write_text(json.dumps(raw))
    with pytest.raises(VersionMismatchError):
        read_manifest(written)


def test_schema_errors(written, tmp_path):
    mpath = written / MANIFEST_FILE
    raw = json.loads(mpath.read_text())
    del raw["checksum"]
    mpath.write_text(json.dumps(raw))
    with pytest.raises(SchemaError):
        read_manifest(written)
    mpath.write_text("{not json")
    with pytest.raises(SchemaError):
        read_manifest(written)
    with pytest.raises(DatasetError):
        read_manifest(tmp_path / "missing")


def test_malformed_record_is_schema_error(tmp_path):
    bad = {"episode": 0, "step": 0, "pose": [0, 0], "gripper": 0, "actions": [0.0] * 7,
           "n_real": 1, "reward": None, "image_path": None, "provenance": {}}
    write_dataset([bad], tmp_path / "b", {}, "", 0, 1)
    _, it = read_dataset(tmp_path / "b")
    with pytest.raises(SchemaError):
        list(it)


def test_missing_crc():
    with pytest.raises(IntegrityError):
        parse_line('{"episode":0}', 1)


def test_out_of_order_write_aborts(tmp_path, episodes):
    _, recs = episodes
    out = tmp_path / "o"
    w = DatasetWriter(out, {}, "", 0)
    w.write(recs[1])
    with pytest.raises(OrderError):
        w.write(recs[0])
    assert list(out.iterdir()) == []


def test_failed_write_leaves_nothing(tmp_path, episodes):
    _, recs = episodes
    out = tmp_path / "f"

    def boom():
        yield recs[0]
        raise RuntimeError("producer died")

    with pytest.raises(RuntimeError):
        write_dataset(boom(), out, {}, "", 0)
    assert list(out.iterdir()) == []


def test_context_manager(tmp_path, episodes):
    _, recs = episodes
    with DatasetWriter(tmp_path / "c", {}, "", 0) as w:
        w.write_all(recs[:3])
    m, it = read_dataset(tmp_path / "c")
    assert m.record_count == 3 and len(list(it)) == 3


def test_reward_dataset_in_unit_interval(tmp_path):
    from reachfield.config import ScenarioConfig

    cfg = ScenarioConfig(episodes=3, episodes_per_goal=4, reward_mode="uniform_reward")
    recs = [r for i in range(cfg.total_episodes) for r in episode_for_index(cfg, i)[1]]
    write_dataset(recs, tmp_path / "r", cfg.to_dict(), "", 0, cfg.total_episodes)
    _, it = read_dataset(tmp_path / "r")
    rewards = [r.reward for r in it]
    assert rewards and all(0.0 <= x <= 1.0 for x in rewards)


def test_ordered_buffer():
    buf = OrderedBuffer()
    assert buf.put(2, ["c"]) == []
    assert buf.put(0, ["a0", "a1"]) == ["a0", "a1"]
    assert buf.pending == 1
    assert buf.put(1, ["b"]) == ["b", "c"]
    assert buf.pending == 0
    with pytest.raises(OrderError):
        buf.put(1, ["again"])
