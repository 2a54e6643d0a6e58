"""Shared command-line helpers"""

import argparse
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from app.config import Settings
from app.schemas.runs import RunConfig
from app.store.runs import Run, load_run_config, open_run


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags every writing command accepts"""
    parser.add_argument("--config", help="JSON run config, or a manifest from an earlier run")
    parser.add_argument("--seed", type=int, help="overrides RCAD_SEED and the config seeds")
    parser.add_argument("--output-dir", help="parent directory for run directories")
    parser.add_argument("--force", action="store_true", help="overwrite an existing run directory")


def _merge(data: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if not key:
            data[section] = value
            continue
        nested = data.get(section)
        nested = dict(nested) if isinstance(nested, dict) else {}
        nested[key] = value
        data[section] = nested
    return data


def resolve_config(args: argparse.Namespace, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Config file, then flag overrides, validated as a whole.

    The seed comes from ``--seed``, else ``RCAD_SEED``, else the config file,
    and when set it drives both generation and training.
    """
    data = load_run_config(args.config) if getattr(args, "config", None) else {}
    config = RunConfig.model_validate(_merge(data, overrides or {}))

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = Settings().SEED
    if seed is None:
        seed = config.seed
    if seed is not None:
        config = config.model_copy(
            update={
                "seed": seed,
                "generate": config.generate.model_copy(update={"seed": seed}),
                "train": config.train.model_copy(update={"seed": seed}),
            }
        )
    return config


def output_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    return Path(getattr(args, "output_dir", None) or config.output_dir or Settings().OUTPUT_DIR)


def start_run(
    args: argparse.Namespace,
    command: str,
    config: RunConfig,
    inputs: Optional[Mapping[str, Path]] = None,
) -> Run:
    return open_run(
        output_dir(args, config),
        command,
        # where a run lands is not part of what it computes
        config.model_dump(mode="json", exclude={"output_dir"}),
        inputs=inputs,
        seed=config.seed,
        force=getattr(args, "force", False),
    )
