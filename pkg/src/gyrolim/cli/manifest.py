"""Run manifest: config snapshot, timing, status and sha256 digests of every emitted file."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str
    started: str
    finished: str
    status: str
    files: dict = field(default_factory=dict)  # path relative to the run dir -> sha256

    @classmethod
    def build(cls, run_dir, files, **kw) -> "RunManifest":
        run_dir = Path(run_dir)
        digests = {}
        for f in sorted({Path(f).resolve() for f in files}):
            digests[f.relative_to(run_dir.resolve()).as_posix()] = sha256_file(f)
        return cls(files=digests, **kw)

    def write(self, run_dir) -> Path:
        """Atomic write via a temporary file in the same directory."""
        run_dir = Path(run_dir)
        text = json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(prefix=".manifest-", dir=run_dir)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, run_dir / MANIFEST_NAME)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return run_dir / MANIFEST_NAME


def load_manifest(run_dir) -> RunManifest:
    data = json.loads((Path(run_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
    return RunManifest(**data)


def verify_manifest(run_dir) -> list[str]:
    """Relative paths whose current digest differs from the manifest (missing files included)."""
    run_dir = Path(run_dir)
    man = load_manifest(run_dir)
    bad = []
    for rel, digest in man.files.items():
        p = run_dir / rel
        if not p.is_file() or sha256_file(p) != digest:
            bad.append(rel)
    return bad
