"""Assessment documents persisted as individual JSON files: simple,
diff-able, audit-friendly. Writes go through a temp file plus atomic
rename, and mutations to one document are serialized by a per-document
lock while distinct documents proceed independently."""

from __future__ import annotations

import os
import tempfile
import threading
from pathlib import Path

from .assessment import AssessmentDocument, dump_document, load_document
from .errors import NotFoundError


class DocumentStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _path(self, doc_id: str) -> Path:
        safe = "".join(c for c in doc_id if c.isalnum() or c in "-_")
        if safe != doc_id or not safe:
            raise NotFoundError(f"invalid document id {doc_id!r}")
        return self.data_dir / f"{safe}.json"

    def lock(self, doc_id: str) -> threading.Lock:
        with self._locks_guard:
            if doc_id not in self._locks:
                self._locks[doc_id] = threading.Lock()
            return self._locks[doc_id]

    def save(self, doc: AssessmentDocument) -> Path:
        path = self._path(doc.id)
        payload = dump_document(doc)
        fd, tmp_name = tempfile.mkstemp(dir=self.data_dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        return path

    def load(self, doc_id: str) -> AssessmentDocument:
        path = self._path(doc_id)
        if not path.exists():
            raise NotFoundError(f"no document with id {doc_id!r}")
        return load_document(path.read_bytes())

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.json") if not p.name.startswith("."))
