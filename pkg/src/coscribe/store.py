"""Durable document storage: versioned checkpoints plus append-only run logs.

One directory per document under DATA_DIR. Checkpoints are whole-record JSON
files written atomically (tmp + rename), so a crash can never leave a partial
checkpoint under its final name; load picks the newest complete version and
a checkpoint that fails to decode raises instead of loading partially.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

from .errors import DocumentNotFoundError, SnapshotCorruptError

_CHECKPOINT = re.compile(r"^checkpoint-(\d{6})\.json$")
KEEP_CHECKPOINTS = 10


class DocumentStore:
    def __init__(self, data_dir: str | Path | None = None):
        root = data_dir or os.environ.get("DATA_DIR", "./data")
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _doc_dir(self, doc_id: str) -> Path:
        return self.root / doc_id

    # ------------------------------------------------------------------

    def save(self, doc_id: str, record: dict) -> int:
        doc_dir = self._doc_dir(doc_id)
        doc_dir.mkdir(parents=True, exist_ok=True)
        version = self.latest_version(doc_id) + 1
        final = doc_dir / f"checkpoint-{version:06d}.json"
        tmp = doc_dir / f".checkpoint-{version:06d}.tmp"
        payload = dict(record, checkpoint_version=version)
        tmp.write_text(json.dumps(payload, ensure_ascii=False))
        os.replace(tmp, final)
        self._prune(doc_dir)
        return version

    def load(self, doc_id: str) -> dict:
        doc_dir = self._doc_dir(doc_id)
        version = self.latest_version(doc_id)
        if version == 0:
            raise DocumentNotFoundError(f"no stored document {doc_id}")
        path = doc_dir / f"checkpoint-{version:06d}.json"
        try:
            return json.loads(path.read_text())
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise SnapshotCorruptError(f"checkpoint {path.name} is corrupt: {e}") from e

    def latest_version(self, doc_id: str) -> int:
        doc_dir = self._doc_dir(doc_id)
        if not doc_dir.is_dir():
            return 0
        versions = [
            int(m.group(1))
            for p in doc_dir.iterdir()
            if (m := _CHECKPOINT.match(p.name))
        ]
        return max(versions, default=0)

    def list_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir()
            if p.is_dir() and self.latest_version(p.name) > 0
        )

    def _prune(self, doc_dir: Path) -> None:
        checkpoints = sorted(
            (int(m.group(1)), p)
            for p in doc_dir.iterdir()
            if (m := _CHECKPOINT.match(p.name))
        )
        for _, path in checkpoints[:-KEEP_CHECKPOINTS]:
            path.unlink(missing_ok=True)

    # ------------------------------------------------------------------

    def append_run_log(self, doc_id: str, entry: dict) -> None:
        doc_dir = self._doc_dir(doc_id)
        doc_dir.mkdir(parents=True, exist_ok=True)
        with open(doc_dir / "runs.jsonl", "a") as f:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def read_run_logs(self, doc_id: str) -> list[dict]:
        path = self._doc_dir(doc_id) / "runs.jsonl"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
