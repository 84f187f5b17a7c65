"""
Run manifests and all-or-nothing output directories for management commands.
"""

import json
import logging
import shutil
from dataclasses import asdict, dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from django.utils import timezone

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def software_version() -> str:
    try:
        return version("rainways")
    except PackageNotFoundError:
        return "0.1.0"


@dataclass
class RunManifest:
    command: str
    seed: int | None = None
    config_path: str | None = None
    config_hash: str | None = None
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    software_version: str = field(default_factory=software_version)
    started_at: str = field(default_factory=lambda: timezone.now().isoformat())
    finished_at: str | None = None

    def to_json(self) -> dict:
        return asdict(self)


class RunOutputs:
    """
    Tracks the files a command writes into `directory`.

    Used as a context manager: if the block raises, every file written
    through it is removed again (and the directory, if this run created it).
    """

    def __init__(self, directory, manifest: RunManifest):
        self.directory = Path(directory)
        self.manifest = manifest
        self.written: list[Path] = []
        self._created = False

    def __enter__(self):
        if not self.directory.exists():
            self.directory.mkdir(parents=True)
            self._created = True
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            return False
        logger.warning(
            "%s failed; removing %d written file(s) from %s",
            self.manifest.command,
            len(self.written),
            self.directory,
        )
        for path in self.written:
            path.unlink(missing_ok=True)
        if self._created:
            shutil.rmtree(self.directory, ignore_errors=True)
        return False

    def path(self, name: str) -> Path:
        path = self.directory / name
        self.written.append(path)
        self.manifest.outputs.append(name)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.path(name)
        path.write_text(text)
        return path

    def write_json(self, name: str, payload) -> Path:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=False) + "\n")

    def write_frame(self, name: str, frame, index: bool = False, **kwargs) -> Path:
        path = self.path(name)
        frame.to_csv(path, index=index, lineterminator="\n", **kwargs)
        return path

    def finish(self) -> Path:
        """Write manifest.json last; the manifest lists every other output."""
        self.manifest.finished_at = timezone.now().isoformat()
        path = self.directory / MANIFEST_NAME
        self.written.append(path)
        path.write_text(json.dumps(self.manifest.to_json(), indent=2) + "\n")
        return path
