﻿from pathlib import Path
from typing import Any, Dict, Optional

import yaml


DEFAULT_CONFIG_PATH = Path('configs') / 'config.yaml'

DEFAULTS: Dict[str, Any] = {
    'depth': 8,
    'atom_bound': 10000,
    'cap': 1000000,
    'jobs': 1,
    'seed': 0,
    'format': 'text',
    'xcheck_depth': 0,
    'output_dir': 'output',
    'stepper': {'lo': -4, 'hi': 4, 'max_distance': 2, 'max_obstacles': 2, 'max_irqs': 2},
    'arinc': {'cores': 2, 'partitions': 2, 'channels': 1, 'chmax': 1, 'messages': 1},
}

SCALE_SECTIONS = ('stepper', 'arinc')


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load YAML configuration and return it as a dictionary."""
    if config_path:
        path = Path(config_path)
    else:
        project_root = Path(__file__).resolve().parents[2]
        path = project_root / DEFAULT_CONFIG_PATH

    if not path.exists():
        raise FileNotFoundError(f'Config file not found: {path}')

    with path.open('r', encoding='utf-8-sig') as handle:
        data = yaml.safe_load(handle) or {}

    if not isinstance(data, dict):
        raise ValueError(f'Expected dict config, got {type(data)}')

    return data


def resolve_settings(config: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Merge defaults, YAML values and command-line overrides (flags win)."""
    settings = {key: dict(value) if isinstance(value, dict) else value for key, value in DEFAULTS.items()}
    for source in (config, overrides):
        for key, value in source.items():
            if value is None:
                continue
            if key in SCALE_SECTIONS:
                if not isinstance(value, dict):
                    raise ValueError(f'Setting {key} must be a mapping, got {value!r}')
                settings[key].update({k: int(v) for k, v in value.items() if v is not None})
            else:
                settings[key] = value

    for key in ('depth', 'xcheck_depth', 'seed', 'atom_bound', 'cap', 'jobs'):
        minimum = 0 if key in ('depth', 'xcheck_depth', 'seed') else 1
        if int(settings[key]) < minimum:
            raise ValueError(f'Setting {key} must be at least {minimum}, got {settings[key]!r}')
        settings[key] = int(settings[key])
    if settings['format'] not in ('text', 'json', 'dot'):
        raise ValueError(f"Setting format must be text, json or dot, got {settings['format']!r}")
    return settings
