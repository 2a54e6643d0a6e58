"""Run directory repository"""

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from app.core.exceptions import InputError, RunExistsError, SchemaError
from app.core.logging import get_logger
from app.schemas.runs import Manifest

UTC = timezone.utc

logger = get_logger(__name__)

MANIFEST_FILE = "manifest.json"
HASH_PREFIX = 12


def file_digest(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 16), b""):
                digest.update(chunk)
    except OSError as exc:
        raise InputError(f"Cannot read {path}: {exc.strerror}") from exc
    return digest.hexdigest()


def config_hash(command: str, config: Mapping[str, Any], inputs: Mapping[str, str]) -> str:
    """sha256 over the canonical JSON of the command, its config and input digests"""
    canonical = json.dumps(
        {"command": command, "config": config, "inputs": inputs},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class Run:
    """One command invocation and the files it produced"""

    command: str
    directory: Path
    digest: str
    config: Dict[str, Any]
    seed: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)

    def path(self, name: str) -> Path:
        """Register and return an output file inside the run directory"""
        if name not in self.outputs:
            self.outputs.append(name)
        return self.directory / name


def open_run(
    output_dir: Union[str, Path],
    command: str,
    config: Dict[str, Any],
    inputs: Optional[Mapping[str, Union[str, Path]]] = None,
    seed: Optional[int] = None,
    force: bool = False,
) -> Run:
    """Create ``<output_dir>/<command>-<hash>``; refuse to reuse it unless forced"""
    inputs = {name: str(path) for name, path in (inputs or {}).items()}
    digests = {name: file_digest(path) for name, path in inputs.items()}
    digest = config_hash(command, config, digests)
    directory = Path(output_dir) / f"{command}-{digest[:HASH_PREFIX]}"
    if directory.exists():
        if not force:
            raise RunExistsError(f"{directory} already exists; pass --force to overwrite it")
        shutil.rmtree(directory)
    directory.mkdir(parents=True)
    logger.info("Run directory %s", directory)
    return Run(command, directory, digest, config, seed, inputs)


def write_manifest(run: Run) -> Manifest:
    """Record provenance; the timestamp lives only here"""
    manifest = Manifest(
        command=run.command,
        created_at=datetime.now(UTC),
        config_hash=run.digest,
        seed=run.seed,
        config=run.config,
        inputs=run.inputs,
        outputs=list(run.outputs),
    )
    (run.directory / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return manifest


def load_run_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Config dict from a JSON config file or from a previous run's manifest"""
    try:
        body = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"Cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise SchemaError(f"{path} must hold a JSON object")
    if "config_hash" in body and "command" in body:
        return dict(body.get("config") or {})
    return body
