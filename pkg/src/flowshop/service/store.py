"""Directory-backed document store.

Each document is one canonical-JSON file under ``<root>/<kind>/<id>.json``.
No database: the canonical serialization makes files diff-able and lets the
service hand back byte-identical payloads after a restart.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

from ..model import ValidationError, canonical_json

_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class DocumentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, doc_id: str) -> Path:
        if not _ID_RE.match(doc_id):
            raise ValidationError(f"malformed id '{doc_id}'")
        return self.root / kind / f"{doc_id}.json"

    def save(self, kind: str, doc_id: str, document: dict) -> None:
        path = self._path(kind, doc_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(canonical_json(document))
        os.replace(tmp, path)

    def load(self, kind: str, doc_id: str) -> dict | None:
        path = self._path(kind, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def exists(self, kind: str, doc_id: str) -> bool:
        return self._path(kind, doc_id).exists()

    def ids(self, kind: str) -> list[str]:
        folder = self.root / kind
        if not folder.is_dir():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))

    def delete(self, kind: str, doc_id: str) -> bool:
        path = self._path(kind, doc_id)
        if path.exists():
            path.unlink()
            return True
        return False
