"""Episode dataset on disk: ``records.jsonl`` plus ``manifest.json``.

Each record line is canonical JSON (fixed key order, shortest round-trip
float repr) ending in a ``crc32`` field computed over the line without that
field. The manifest holds the sha256 of the whole record file, so identical
(config, seed) pairs give identical checksums on every platform.
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from .rollout import ActionChunk
from .sampler import EpisodeRecord, Observation
from .so3 import Pose, rotation_log

FORMAT_VERSION = 1
RECORDS_FILE = "records.jsonl"
MANIFEST_FILE = "manifest.json"
ACTION_WIDTH = 7
_CRC_KEY = ',"crc32":"'


class DatasetError(Exception):
    pass


class OrderError(DatasetError):
    pass


class VersionMismatchError(DatasetError):
    pass


class IntegrityError(DatasetError):
    """Checksum mismatch; ``line`` is the 1-based record line when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class CountMismatchError(DatasetError):
    pass


class SchemaError(DatasetError):
    pass


@dataclass
class DatasetManifest:
    format_version: int
    config: dict[str, Any]
    config_text: str
    master_seed: int
    episode_count: int
    record_count: int
    checksum: str
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "config": self.config,
            "config_text": self.config_text,
            "master_seed": self.master_seed,
            "episode_count": self.episode_count,
            "record_count": self.record_count,
            "checksum": {"algorithm": "sha256", "value": self.checksum},
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DatasetManifest":
        try:
            return cls(
                format_version=int(d["format_version"]),
                config=d["config"],
                config_text=d["config_text"],
                master_seed=int(d["master_seed"]),
                episode_count=int(d["episode_count"]),
                record_count=int(d["record_count"]),
                checksum=d["checksum"]["value"],
                extra=d.get("extra", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed manifest: {exc!r}") from None


def _floats(a) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def encode_record(rec: EpisodeRecord) -> dict[str, Any]:
    obs = rec.observation
    prov = {k: v for k, v in rec.provenance.items() if k != "start"}
    return {
        "episode": int(obs.episode),
        "step": int(obs.step),
        "pose": _floats(obs.pose.position) + _floats(rotation_log(obs.pose.rotation)),
        "gripper": int(obs.gripper),
        "actions": _floats(rec.chunk.as_array()),
        "n_real": int(rec.chunk.n_real),
        "reward": None if rec.reward is None else float(rec.reward),
        "image_path": obs.image_path,
        "provenance": prov,
    }


def decode_record(d: dict[str, Any]) -> EpisodeRecord:
    try:
        pose = np.array(d["pose"], dtype=float)
        actions = np.array(d["actions"], dtype=float)
        if pose.shape != (6,) or actions.size % ACTION_WIDTH or actions.size == 0:
            raise SchemaError("pose must have 6 numbers and actions a multiple of 7")
        block = actions.reshape(-1, ACTION_WIDTH)
        chunk = ActionChunk(block[:, :3], block[:, 3:6], block[:, 6] > 0.5, int(d["n_real"]))
        obs = Observation(
            Pose.from_axis_angle(pose[:3], pose[3:]),
            bool(d["gripper"]),
            int(d["step"]),
            int(d["episode"]),
            d.get("image_path"),
        )
        return EpisodeRecord(obs, chunk, d["reward"], dict(d["provenance"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed record: {exc!r}") from None


def record_line(d: dict[str, Any]) -> str:
    body = json.dumps(d, separators=(",", ":"), allow_nan=False)
    crc = zlib.crc32(body.encode("utf-8"))
    return f"{body[:-1]}{_CRC_KEY}{crc:08x}\"}}"


def parse_line(line: str, lineno: int) -> dict[str, Any]:
    line = line.rstrip("\n")
    i = line.rfind(_CRC_KEY)
    if i < 0 or not line.endswith('"}'):
        raise IntegrityError(f"line {lineno}: missing crc32 field", lineno)
    body = line[:i] + "}"
    stored = line[i + len(_CRC_KEY) : -2]
    if f"{zlib.crc32(body.encode('utf-8')):08x}" != stored:
        raise IntegrityError(f"line {lineno}: record checksum mismatch", lineno)
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {lineno}: {exc}") from None


class DatasetWriter:
    """Streaming writer; files appear only after :meth:`close` succeeds.

    Records must arrive ordered by (episode, step).
    """

    def __init__(self, out_dir: str | Path, config: dict[str, Any], config_text: str = "", master_seed: int = 0):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.config_text = config_text
        self.master_seed = master_seed
        self._tmp = self.out_dir / (RECORDS_FILE + ".tmp")
        self._fh = open(self._tmp, "w", encoding="utf-8", newline="\n")
        self._hash = hashlib.sha256()
        self._last: tuple[int, int] | None = None
        self._episodes: set[int] = set()
        self.record_count = 0
        self.extra: dict[str, Any] = {}

    def write(self, rec: EpisodeRecord | dict[str, Any]) -> None:
        d = rec if isinstance(rec, dict) else encode_record(rec)
        key = (d["episode"], d["step"])
        if self._last is not None and key <= self._last:
            self.abort()
            raise OrderError(f"record {key} does not follow {self._last}")
        self._last = key
        line = record_line(d) + "\n"
        data = line.encode("utf-8")
        try:
            self._fh.write(line)
        except OSError:
            self.abort()
            raise
        self._hash.update(data)
        self._episodes.add(key[0])
        self.record_count += 1

    def write_all(self, records: Iterable) -> None:
        for r in records:
            self.write(r)

    def abort(self) -> None:
        if not self._fh.closed:
            self._fh.close()
        self._tmp.unlink(missing_ok=True)
        (self.out_dir / (MANIFEST_FILE + ".tmp")).unlink(missing_ok=True)

    def close(self, episode_count: int | None = None) -> DatasetManifest:
        manifest = DatasetManifest(
            FORMAT_VERSION,
            self.config,
            self.config_text,
            self.master_seed,
            len(self._episodes) if episode_count is None else episode_count,
            self.record_count,
            self._hash.hexdigest(),
            self.extra,
        )
        mtmp = self.out_dir / (MANIFEST_FILE + ".tmp")
        try:
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._fh.close()
            with open(mtmp, "w", encoding="utf-8") as f:
                json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
                f.write("\n")
            os.replace(self._tmp, self.out_dir / RECORDS_FILE)
            os.replace(mtmp, self.out_dir / MANIFEST_FILE)
        except OSError:
            self.abort()
            raise
        return manifest

    def __enter__(self) -> "DatasetWriter":
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.abort()
        elif not self._fh.closed:
            self.close()


def write_dataset(
    records: Iterable,
    out_dir: str | Path,
    config: dict[str, Any],
    config_text: str = "",
    master_seed: int = 0,
    episode_count: int | None = None,
) -> DatasetManifest:
    writer = DatasetWriter(out_dir, config, config_text, master_seed)
    try:
        writer.write_all(records)
    except BaseException:
        writer.abort()
        raise
    return writer.close(episode_count)


def read_manifest(path: str | Path) -> DatasetManifest:
    mpath = Path(path) / MANIFEST_FILE
    try:
        raw = json.loads(mpath.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError(f"no manifest at {mpath}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest is not valid JSON: {exc}") from None
    if raw.get("format_version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"dataset format {raw.get('format_version')!r}, reader supports {FORMAT_VERSION}"
        )
    return DatasetManifest.from_dict(raw)


def _verify(path: Path, manifest: DatasetManifest) -> None:
    h = hashlib.sha256()
    lines = 0
    with open(path, "rb") as f:
        for raw in f:
            h.update(raw)
            lines += 1
    if h.hexdigest() != manifest.checksum:
        # locate the damaged line
        with open(path, "r", encoding="utf-8", errors="replace") as f:
            for lineno, line in enumerate(f, 1):
                parse_line(line, lineno)
        raise IntegrityError("record file checksum does not match manifest")
    if lines != manifest.record_count:
        raise CountMismatchError(f"manifest lists {manifest.record_count} records, file has {lines}")


def read_dataset(path: str | Path, decode: bool = True) -> tuple[DatasetManifest, Iterator]:
    """Validate a dataset and return its manifest and a record iterator.

    With ``decode=False`` the iterator yields plain dicts.
    """
    path = Path(path)
    manifest = read_manifest(path)
    rpath = path / RECORDS_FILE
    if not rpath.exists():
        raise DatasetError(f"no record file at {rpath}")
    _verify(rpath, manifest)

    def records():
        with open(rpath, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                d = parse_line(line, lineno)
                yield decode_record(d) if decode else d

    return manifest, records()


class OrderedBuffer:
    """Releases per-episode record lists in episode-index order.

    Producers may finish out of order; :meth:`put` returns whatever prefix of
    episodes has become contiguous.
    """

    def __init__(self, first: int = 0):
        self._next = first
        self._pending: dict[int, list] = {}

    def put(self, episode: int, records: list) -> list:
        if episode < self._next or episode in self._pending:
            raise OrderError(f"episode {episode} delivered twice")
        self._pending[episode] = records
        out = []
        while self._next in self._pending:
            out.extend(self._pending.pop(self._next))
            self._next += 1
        return out

    @property
    def pending(self) -> int:
        return len(self._pending)
