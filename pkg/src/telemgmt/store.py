"""Embedded file-backed persistence for the medical-record state: profiles,
readings, policies, alerts, session transcripts and audit trail.

Layout under the data directory (one subdirectory per entity kind):

    <root>/streams/<kind>/<id>.log     append-only record log
    <root>/snapshots/<kind>/<id>.json  last-writer-wins document
    <root>/objects/<sha256>            content-addressed blobs

Log file format (see docs/STORAGE.md for the frozen byte-level spec):
8-byte magic ``EMRLOG01`` then a sequence of records, each
``u32_be payload_length | u32_be crc32(payload) | payload`` with the
payload being UTF-8 JSON. Appends are flushed to disk before they are
acknowledged. On open, a torn tail record (crash between write and flush)
is truncated away; checksum mismatches anywhere earlier are corruption and
raise instead of being silently returned.

Snapshots are written whole to a temp file and atomically renamed into
place, so a reader never observes a half-written document.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import zlib
from pathlib import Path
from typing import Iterable, Optional

MAGIC = b"EMRLOG01"
_HEADER = len(MAGIC)
_MAX_RECORD = 16 * 1024 * 1024  # defends the scanner against garbage lengths


class StorageError(Exception):
    pass


class StorageUnavailable(StorageError):
    """IO failure; callers surface this as a temporary fault and retry."""


class CorruptLog(StorageError):
    """Checksum mismatch on a committed record; never silently skipped."""


class SnapshotNotFound(KeyError):
    pass


class ObjectNotFound(KeyError):
    pass


def _safe_name(raw: str) -> str:
    """Map an opaque identifier onto a safe filename (reversible enough:
    distinct ids stay distinct)."""
    out = []
    for ch in raw:
        if ch.isalnum() or ch in "._-":
            out.append(ch)
        else:
            out.append(f"%{ord(ch):04x}")
    return "".join(out) or "_"


class StreamLog:
    """One append-only, checksummed record log. Single writer, any readers."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()
        self._offsets: list[int] = []  # byte position of each record
        self._end = _HEADER
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.exists():
            self._recover()
        else:
            with open(path, "wb") as f:
                f.write(MAGIC)
                f.flush()
                os.fsync(f.fileno())
        self._fh = open(path, "r+b")
        self._fh.seek(self._end)

    def _recover(self) -> None:
        size = self.path.stat().st_size
        with open(self.path, "rb") as f:
            magic = f.read(_HEADER)
            if magic != MAGIC:
                raise CorruptLog(f"{self.path}: bad magic {magic!r}")
            pos = _HEADER
            while pos < size:
                f.seek(pos)
                head = f.read(8)
                if len(head) < 8:
                    break  # torn header: uncommitted tail
                length = int.from_bytes(head[:4], "big")
                crc = int.from_bytes(head[4:8], "big")
                if length > _MAX_RECORD:
                    if pos + 8 + length >= size:
                        break  # garbage length at the tail: torn write
                    raise CorruptLog(f"{self.path}: absurd record length {length} at {pos}")
                payload = f.read(length)
                if len(payload) < length:
                    break  # torn payload
                if zlib.crc32(payload) != crc:
                    if pos + 8 + length >= size:
                        break  # torn final record
                    raise CorruptLog(f"{self.path}: checksum mismatch at offset {len(self._offsets)}")
                self._offsets.append(pos)
                pos += 8 + length
        if pos < size:
            # drop the uncommitted tail so the next append starts clean
            with open(self.path, "r+b") as f:
                f.truncate(pos)
        self._end = pos

    def __len__(self) -> int:
        with self._lock:
            return len(self._offsets)

    def append(self, record: dict) -> int:
        return self.append_many([record])

    def append_many(self, records: Iterable[dict]) -> int:
        """Append records, flush once, return the offset of the first.

        Durable (fsync) before returning.
        """
        frames = []
        for record in records:
            payload = json.dumps(record, separators=(",", ":"), sort_keys=True).encode()
            frames.append(len(payload).to_bytes(4, "big") + zlib.crc32(payload).to_bytes(4, "big") + payload)
        with self._lock:
            first = len(self._offsets)
            try:
                self._fh.seek(self._end)
                for frame in frames:
                    self._fh.write(frame)
                    self._offsets.append(self._end)
                    self._end += len(frame)
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageUnavailable(str(exc)) from exc
            return first

    def read(self, from_offset: int = 0, limit: Optional[int] = None) -> list[dict]:
        """Records [from_offset, from_offset + limit). Past-end reads are empty."""
        if from_offset < 0:
            raise ValueError("from_offset must be >= 0")
        with self._lock:
            span = self._offsets[from_offset: None if limit is None else from_offset + limit]
        out = []
        with open(self.path, "rb") as f:
            for idx, pos in enumerate(span):
                f.seek(pos)
                head = f.read(8)
                length = int.from_bytes(head[:4], "big")
                crc = int.from_bytes(head[4:8], "big")
                payload = f.read(length)
                if len(payload) < length or zlib.crc32(payload) != crc:
                    raise CorruptLog(f"{self.path}: checksum mismatch at offset {from_offset + idx}")
                out.append(json.loads(payload.decode()))
        return out

    def close(self) -> None:
        with self._lock:
            self._fh.close()


class EmrStore:
    """Facade over stream logs, snapshot documents and blob objects."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            (self.root / "streams").mkdir(parents=True, exist_ok=True)
            (self.root / "snapshots").mkdir(parents=True, exist_ok=True)
            (self.root / "objects").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageUnavailable(f"data directory not usable: {exc}") from exc
        self._streams: dict[tuple[str, str], StreamLog] = {}
        self._lock = threading.Lock()
        self._snap_locks: dict[tuple[str, str], threading.Lock] = {}

    # -- streams ---------------------------------------------------------

    def stream(self, kind: str, entity_id: str) -> StreamLog:
        key = (kind, entity_id)
        with self._lock:
            log = self._streams.get(key)
            if log is None:
                path = self.root / "streams" / _safe_name(kind) / (_safe_name(entity_id) + ".log")
                log = StreamLog(path)
                self._streams[key] = log
            return log

    def list_streams(self, kind: str) -> list[str]:
        d = self.root / "streams" / _safe_name(kind)
        if not d.is_dir():
            return []
        names = [p.stem for p in sorted(d.glob("*.log"))]
        return names

    # -- snapshots -------------------------------------------------------

    def _snap_path(self, kind: str, entity_id: str) -> Path:
        return self.root / "snapshots" / _safe_name(kind) / (_safe_name(entity_id) + ".json")

    def _snap_lock(self, kind: str, entity_id: str) -> threading.Lock:
        with self._lock:
            return self._snap_locks.setdefault((kind, entity_id), threading.Lock())

    def snapshot_upsert(self, kind: str, entity_id: str, doc: dict) -> int:
        """Last-writer-wins document write; returns the new version number."""
        path = self._snap_path(kind, entity_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._snap_lock(kind, entity_id):
            version = 1
            if path.exists():
                try:
                    version = self._load_snapshot(path)[1] + 1
                except CorruptLog:
                    # overwriting a corrupt snapshot is the only repair path
                    version = 1
            body = json.dumps(doc, separators=(",", ":"), sort_keys=True)
            wrapper = {"version": version, "crc": zlib.crc32(body.encode()), "doc": doc}
            tmp = path.with_suffix(".json.tmp")
            try:
                with open(tmp, "w", encoding="utf-8") as f:
                    json.dump(wrapper, f)
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, path)
            except OSError as exc:
                raise StorageUnavailable(str(exc)) from exc
            return version

    @staticmethod
    def _load_snapshot(path: Path) -> tuple[dict, int]:
        try:
            with open(path, encoding="utf-8") as f:
                wrapper = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptLog(f"{path}: unreadable snapshot: {exc}") from exc
        body = json.dumps(wrapper["doc"], separators=(",", ":"), sort_keys=True)
        if zlib.crc32(body.encode()) != wrapper.get("crc"):
            raise CorruptLog(f"{path}: snapshot checksum mismatch")
        return wrapper["doc"], wrapper["version"]

    def snapshot_get(self, kind: str, entity_id: str) -> tuple[dict, int]:
        """Return (document, version); SnapshotNotFound for unknown ids."""
        path = self._snap_path(kind, entity_id)
        if not path.exists():
            raise SnapshotNotFound(f"{kind}/{entity_id}")
        return self._load_snapshot(path)

    def snapshot_list(self, kind: str) -> list[str]:
        d = self.root / "snapshots" / _safe_name(kind)
        if not d.is_dir():
            return []
        return [p.stem for p in sorted(d.glob("*.json"))]

    # -- content-addressed objects --------------------------------------

    def put_object(self, data: bytes) -> str:
        ref = hashlib.sha256(data).hexdigest()
        path = self.root / "objects" / ref
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            try:
                with open(tmp, "wb") as f:
                    f.write(data)
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, path)
            except OSError as exc:
                raise StorageUnavailable(str(exc)) from exc
        return ref

    def get_object(self, ref: str) -> bytes:
        path = self.root / "objects" / _safe_name(ref)
        if not path.exists():
            raise ObjectNotFound(ref)
        data = path.read_bytes()
        if hashlib.sha256(data).hexdigest() != ref:
            raise CorruptLog(f"object {ref}: content does not match its address")
        return data

    def close(self) -> None:
        with self._lock:
            for log in self._streams.values():
                log.close()
            self._streams.clear()
