"""Experiment configuration files for the uigp CLI.

Manages:
- Config documents given with --config (JSON or TOML)
- The effective configuration saved next to the artifacts (<out>/config.toml)
"""

import json
from pathlib import Path
from typing import Optional

import toml

from ..dataclass_utils import dataclass_to_dict, dict_to_dataclass, replace
from ..exceptions import ConfigError
from ..experiments import ExperimentConfig

CONFIG_FILE = 'config.toml'


def _read_document(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}", field='config', value=str(path))
    try:
        if path.suffix == '.toml':
            return toml.load(path)
        if path.suffix == '.json':
            return json.loads(path.read_text())
    except (toml.TomlDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not parse {path}: {e}", field='config', value=str(path)) from e
    raise ConfigError(
        f"Unsupported config format '{path.suffix}'. Use .json or .toml",
        field='config', value=str(path),
    )


def load_config(path: Path, function_id: Optional[str] = None) -> ExperimentConfig:
    """Load an experiment configuration document.

    The preset of the selected latent function supplies every key the
    document leaves out; the nested ``mcmc`` table is merged key by key.

    Args:
        path: ``.json`` or ``.toml`` document mirroring ExperimentConfig
        function_id: Overrides the document's ``function_id``

    Returns:
        ExperimentConfig instance

    Raises:
        ConfigError: If the file is missing, unparsable or has unknown or invalid keys
    """
    document = _read_document(Path(path))
    if not isinstance(document, dict):
        raise ConfigError(f"{path} must contain a table of settings", field='config', value=str(path))

    function_id = function_id or document.get('function_id', 'demo8')
    merged = dataclass_to_dict(ExperimentConfig.preset(function_id))
    for key, value in document.items():
        if key == 'mcmc' and isinstance(value, dict):
            merged['mcmc'].update(value)
        else:
            merged[key] = value
    merged['function_id'] = function_id
    return dict_to_dataclass(merged, ExperimentConfig)


def save_config(cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Save the effective configuration to <out_dir>/config.toml.

    Args:
        cfg: ExperimentConfig instance
        out_dir: Artifact directory

    Returns:
        Path of the written file
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path = out_dir / CONFIG_FILE
    with open(config_path, 'w') as f:
        toml.dump(dataclass_to_dict(cfg, drop_none=True), f)
    return config_path


def resolve_config(
    config_path: Optional[Path],
    out_dir: Path,
    function_id: Optional[str] = None,
    **overrides,
) -> ExperimentConfig:
    """Effective configuration of a subcommand.

    Precedence, lowest first: preset, config file (--config, else the
    config.toml already in ``out_dir``), command-line flags. Overrides whose
    value is None were not given and are skipped.
    """
    if config_path is None and (Path(out_dir) / CONFIG_FILE).exists():
        config_path = Path(out_dir) / CONFIG_FILE
    if config_path is not None:
        cfg = load_config(config_path, function_id=function_id)
    else:
        cfg = ExperimentConfig.preset(function_id or 'demo8')
    try:
        return replace(cfg, **overrides)
    except TypeError as e:
        raise ConfigError(f"Invalid option: {e}") from e
