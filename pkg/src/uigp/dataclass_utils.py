"""Utilities for converting configuration dataclasses to and from plain dicts."""

import dataclasses
from dataclasses import fields, is_dataclass
from typing import Any, get_type_hints

import numpy as np

from .exceptions import ConfigError


def extract_annotations(cls: type) -> dict[str, type]:
    """Extract resolved type annotations from a dataclass.

    Args:
        cls: Class to extract annotations from

    Returns:
        Dictionary mapping field names to their types
    """
    try:
        return get_type_hints(cls)
    except Exception:
        # Fallback to __annotations__ if get_type_hints fails
        return getattr(cls, '__annotations__', {})


def _plain(value: Any) -> Any:
    """Convert tuples, numpy scalars and arrays into JSON/TOML-friendly values."""
    if is_dataclass(value) and not isinstance(value, type):
        return dataclass_to_dict(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def dataclass_to_dict(obj: Any, drop_none: bool = False) -> dict:
    """Convert a (possibly nested) dataclass instance to a plain dictionary.

    Args:
        obj: Dataclass instance
        drop_none: Omit fields whose value is None (TOML has no null)

    Returns:
        Dictionary with nested dataclasses converted recursively and tuples as lists
    """
    if not is_dataclass(obj):
        raise ValueError(f"{type(obj)} is not a dataclass instance")

    result = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        if value is None and drop_none:
            continue
        if is_dataclass(value):
            result[f.name] = dataclass_to_dict(value, drop_none=drop_none)
        else:
            result[f.name] = _plain(value)
    return result


def dict_to_dataclass(data: dict, cls: type, strict: bool = True, path: str = '') -> Any:
    """Instantiate a dataclass from a dictionary, recursing into nested dataclasses.

    Missing keys fall back to the dataclass defaults.

    Args:
        data: Dictionary with field values
        cls: Dataclass type to instantiate
        strict: Reject keys that are not fields of ``cls``
        path: Dotted prefix used in error messages for nested tables

    Returns:
        Instance of the dataclass

    Raises:
        ConfigError: If ``data`` is not a mapping, or has unknown keys in strict mode
    """
    if not is_dataclass(cls):
        raise ValueError(f"{cls} is not a dataclass")
    if not isinstance(data, dict):
        raise ConfigError(f"Expected a table for '{path or cls.__name__}', got {type(data).__name__}", field=path)

    field_names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - field_names)
    if unknown and strict:
        name = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(f"Unknown configuration key '{name}'", field=name)

    hints = extract_annotations(cls)
    kwargs = {}
    for key, value in data.items():
        if key not in field_names:
            continue
        hint = hints.get(key)
        if isinstance(hint, type) and is_dataclass(hint):
            value = dict_to_dataclass(value, hint, strict=strict, path=f"{path}.{key}" if path else key)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"Invalid value in '{path or cls.__name__}': {e}", field=path) from e


def replace(obj: Any, **changes) -> Any:
    """``dataclasses.replace`` that skips changes whose value is None.

    Used to layer CLI flags (None when not given) over a loaded config.
    """
    return dataclasses.replace(obj, **{k: v for k, v in changes.items() if v is not None})
