import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Union

import yaml
from pydantic import BaseModel

from alob.config import settings
from alob.errors import IoError

MANIFEST_NAME = "manifest.yaml"


def config_hash(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON form of a run configuration, seed excluded."""
    data = config.model_dump(mode="json", by_alias=True, exclude={"seed"})
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class RunManifest(BaseModel):
    config_hash: str
    model: str
    seed: int
    version: str = settings.app.version
    outputs: List[str] = []
    started: str = ""
    wall_clock: float = 0.0

    @classmethod
    def start(cls, config: BaseModel, model: str) -> "RunManifest":
        return cls(
            config_hash=config_hash(config),
            model=model,
            seed=config.seed,
            started=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )

    def write(self, directory: Union[str, Path]) -> Path:
        path = Path(directory) / MANIFEST_NAME
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as f:
                yaml.safe_dump(self.model_dump(), f, sort_keys=False)
        except OSError as e:
            raise IoError(f"cannot write {path}: {e}") from e
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        try:
            with open(path) as f:
                return cls.model_validate(yaml.safe_load(f))
        except OSError as e:
            raise IoError(f"cannot read {path}: {e}") from e
