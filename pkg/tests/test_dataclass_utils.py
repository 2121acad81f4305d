"""Tests for dataclass utilities."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pytest

from uigp.dataclass_utils import (
    dataclass_to_dict,
    dict_to_dataclass,
    extract_annotations,
    replace,
)
from uigp.exceptions import ConfigError
from uigp.experiments import ExperimentConfig


@dataclass(frozen=True)
class Inner:
    steps: int = 10
    rate: float = 0.5


@dataclass(frozen=True)
class Outer:
    name: str = "run"
    interval: tuple[float, float] = (0.0, 1.0)
    inner: Inner = field(default_factory=Inner)
    limit: Optional[int] = None


class TestExtractAnnotations:
    """Tests for extract_annotations function."""

    def test_simple_class(self):
        """Test extracting annotations from a simple class."""
        class Point:
            x: float
            y: float

        assert extract_annotations(Point) == {"x": float, "y": float}

    def test_nested_dataclass_hint(self):
        """Nested dataclass fields resolve to their class."""
        assert extract_annotations(Outer)["inner"] is Inner

    def test_empty_class(self):
        """Test class with no annotations."""
        class Empty:
            pass

        assert extract_annotations(Empty) == {}


class TestDataclassToDict:
    """Tests for dataclass_to_dict."""

    def test_nested(self):
        """Nested dataclasses become tables, tuples become lists."""
        assert dataclass_to_dict(Outer()) == {
            "name": "run", "interval": [0.0, 1.0], "inner": {"steps": 10, "rate": 0.5}, "limit": None,
        }

    def test_drop_none(self):
        """None values can be omitted."""
        assert "limit" not in dataclass_to_dict(Outer(), drop_none=True)

    def test_numpy_scalars_become_python(self):
        """numpy scalars are converted to plain numbers."""
        result = dataclass_to_dict(Inner(steps=np.int64(3), rate=np.float64(0.25)))
        assert type(result["steps"]) is int
        assert type(result["rate"]) is float

    def test_rejects_non_dataclass(self):
        """Plain objects are rejected."""
        with pytest.raises(ValueError):
            dataclass_to_dict({"a": 1})


class TestDictToDataclass:
    """Tests for dict_to_dataclass."""

    def test_missing_keys_use_defaults(self):
        """Missing keys fall back to the dataclass defaults."""
        assert dict_to_dataclass({"name": "x"}, Outer) == Outer(name="x")

    def test_nested_table(self):
        """Nested tables build nested dataclasses and lists become tuples."""
        obj = dict_to_dataclass({"interval": [1.0, 2.0], "inner": {"steps": 4}}, Outer)
        assert obj.interval == (1.0, 2.0)
        assert obj.inner == Inner(steps=4)

    def test_unknown_key(self):
        """Unknown keys raise ConfigError naming the key."""
        with pytest.raises(ConfigError) as exc_info:
            dict_to_dataclass({"nmae": "x"}, Outer)
        assert exc_info.value.field == "nmae"

    def test_unknown_nested_key(self):
        """Unknown nested keys are reported with their dotted path."""
        with pytest.raises(ConfigError) as exc_info:
            dict_to_dataclass({"inner": {"stpes": 1}}, Outer)
        assert exc_info.value.field == "inner.stpes"

    def test_non_strict_ignores_unknown(self):
        """strict=False drops unknown keys."""
        assert dict_to_dataclass({"extra": 1}, Outer, strict=False) == Outer()

    def test_nested_value_must_be_table(self):
        """A scalar where a table is expected raises ConfigError."""
        with pytest.raises(ConfigError):
            dict_to_dataclass({"inner": 3}, Outer)

    def test_round_trip_experiment_config(self):
        """An ExperimentConfig survives conversion to a dict and back."""
        cfg = ExperimentConfig.preset('c', seed=12, shared_perturbation_seed=3)
        assert dict_to_dataclass(dataclass_to_dict(cfg), ExperimentConfig) == cfg

    def test_invalid_values_raise_config_error(self):
        """Validation errors surface as ConfigError."""
        with pytest.raises(ConfigError):
            dict_to_dataclass({"mcmc": {"thinning": 0}}, ExperimentConfig)


class TestReplace:
    """Tests for replace."""

    def test_skips_none(self):
        """None means 'not given' and keeps the current value."""
        assert replace(Outer(name="a"), name=None, limit=5) == Outer(name="a", limit=5)
