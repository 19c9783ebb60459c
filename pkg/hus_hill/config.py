"""
Analysis configuration: JSON config files merged with command-line flags
"""

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from hus_hill import constants
from hus_hill.models import Family, PeriodicCycle, ProfilePattern, ResidualProfile, Sign, Trajectory
from hus_hill.utils import evaluate_expression

logger = logging.getLogger("hus_hill.config")

Number = Union[float, int, str]


class ConfigError(Exception):
    """Invalid configuration; the message names the field or JSON line."""
    pass


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass
class SweepSpec:
    """
    Grid of values for one parameter.

    Attributes:
        param: Name of the swept parameter ("h" or a key of params)
        min: First grid value
        max: Last grid value
        count: Number of grid points
    """

    param: str
    min: float
    max: float
    count: int

    @classmethod
    def parse(cls, value: Union[str, Dict[str, Any]]) -> "SweepSpec":
        """
        Parse "name:min:max:count" or a dict with the same keys.

        Raises:
            ConfigError: If the value is malformed
        """
        try:
            if isinstance(value, str):
                name, lo, hi, count = value.split(":")
                spec = cls(param=name.strip(), min=float(lo), max=float(hi), count=int(count))
            else:
                spec = cls(
                    param=str(value["param"]),
                    min=float(value["min"]),
                    max=float(value["max"]),
                    count=int(value["count"]),
                )
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"sweep: expected 'name:min:max:count', got {value!r} ({e})") from e
        if spec.count < 1:
            raise ConfigError(f"sweep: count must be positive, got {spec.count}")
        return spec

    def points(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


@dataclass
class AnalysisConfig:
    """
    Everything one analyze/track/sweep/oracle run needs.

    Numeric entries of h, cycle and forcing may be expression strings over
    numbers, 'pi', 'h' and the names in params (e.g. "2*pi", "-1/h").
    """

    h: Number = 1.0
    cycle: List[Number] = field(default_factory=list)
    family: str = constants.DEFAULT_FAMILY
    epsilon: float = constants.DEFAULT_EPSILON
    window: Optional[int] = None
    profile: str = constants.DEFAULT_PROFILE
    profile_values: Optional[List[float]] = None
    seed: int = constants.DEFAULT_SEED
    sweep: Optional[SweepSpec] = None
    params: Dict[str, float] = field(default_factory=dict)
    forcing: Optional[List[Number]] = None
    horizon: Optional[int] = None
    budget: int = constants.DEFAULT_ORACLE_BUDGET
    bounded: bool = False
    trajectories: bool = False
    sign: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalysisConfig":
        """
        Build a config from a parsed JSON object.

        Raises:
            ConfigError: On unknown keys or values of the wrong type
        """
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"config: unknown field(s) {', '.join(unknown)}")

        values = dict(data)
        if "profile" in values and isinstance(values["profile"], list):
            values["profile_values"] = values["profile"]
            values["profile"] = ProfilePattern.EXPLICIT.value
        if values.get("sweep") is not None:
            values["sweep"] = SweepSpec.parse(values["sweep"])
        if "cycle" in values and not isinstance(values["cycle"], list):
            raise ConfigError("cycle: expected a list of numbers or expressions")

        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "AnalysisConfig":
        """
        Load a config file.

        Raises:
            ConfigError: If the file cannot be read or parsed
        """
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: line {e.lineno}: {e.msg}") from e
        except OSError as e:
            raise ConfigError(f"{path}: {e}") from e
        logger.debug(f"Loaded config from {path}")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.sweep is None:
            data["sweep"] = None
        return data

    def merge_cli(self, args: Any) -> "AnalysisConfig":
        """
        Override fields with the flags that were given on the command line.

        Raises:
            ConfigError: If a flag value is malformed
        """
        updates: Dict[str, Any] = {}
        for name in ("h", "family", "epsilon", "window", "seed", "horizon", "budget", "sign"):
            value = getattr(args, name, None)
            if value is not None:
                updates[name] = value
        if getattr(args, "cycle", None):
            updates["cycle"] = [part.strip() for part in args.cycle.split(",") if part.strip()]
        if getattr(args, "forcing", None):
            updates["forcing"] = [part.strip() for part in args.forcing.split(",") if part.strip()]
        profile = getattr(args, "profile", None)
        if profile:
            if profile.startswith(ProfilePattern.EXPLICIT.value + ":"):
                try:
                    updates["profile_values"] = [float(v) for v in profile.split(":", 1)[1].split(",")]
                except ValueError as e:
                    raise ConfigError(f"profile: {e}") from e
                updates["profile"] = ProfilePattern.EXPLICIT.value
            else:
                updates["profile"] = profile
        if getattr(args, "sweep", None):
            updates["sweep"] = SweepSpec.parse(args.sweep)
        for assignment in getattr(args, "param", None) or []:
            name, sep, value = assignment.partition("=")
            if not sep:
                raise ConfigError(f"param: expected NAME=VALUE, got {assignment!r}")
            params = dict(updates.get("params", self.params))
            params[name.strip()] = self._number("param", value, {})
            updates["params"] = params
        if getattr(args, "bounded", False):
            updates["bounded"] = True
        if getattr(args, "trajectories", False):
            updates["trajectories"] = True

        merged = replace(self, **updates)
        merged.validate()
        return merged

    def validate(self) -> None:
        """
        Check field types and ranges that do not depend on expression values.

        Raises:
            ConfigError: Naming the offending field
        """
        if not isinstance(self.family, str):
            raise ConfigError(f"family: expected a family name, got {self.family!r}")
        if self.sign is not None and not isinstance(self.sign, str):
            raise ConfigError(f"sign: expected '+' or '-', got {self.sign!r}")
        self.family_enum()
        if not (_is_number(self.h) or isinstance(self.h, str)):
            raise ConfigError(f"h: expected a number or expression, got {self.h!r}")
        self._check_values("cycle", self.cycle)
        if self.forcing is not None:
            self._check_values("forcing", self.forcing)
        if not _is_number(self.epsilon) or self.epsilon < 0:
            raise ConfigError(f"epsilon: expected a nonnegative number, got {self.epsilon!r}")
        for name in ("window", "horizon"):
            value = getattr(self, name)
            if value is not None and (not _is_integer(value) or value < 1):
                raise ConfigError(f"{name}: expected a positive integer, got {value!r}")
        if not _is_integer(self.budget) or self.budget < 1:
            raise ConfigError(f"budget: expected a positive integer, got {self.budget!r}")
        if not _is_integer(self.seed):
            raise ConfigError(f"seed: expected an integer, got {self.seed!r}")
        for name in ("bounded", "trajectories"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name}: expected true or false, got {getattr(self, name)!r}")
        if not isinstance(self.profile, str):
            raise ConfigError(f"profile: expected a pattern name or a list of numbers, got {self.profile!r}")
        try:
            ProfilePattern(self.profile)
        except ValueError:
            known = ", ".join(p.value for p in ProfilePattern)
            raise ConfigError(f"profile: unknown pattern '{self.profile}' (expected one of: {known})")
        if self.profile_values is not None and (
            not isinstance(self.profile_values, list) or not all(_is_number(v) for v in self.profile_values)
        ):
            raise ConfigError(f"profile: expected a list of numbers, got {self.profile_values!r}")
        if not isinstance(self.params, dict):
            raise ConfigError(f"params: expected an object of name: number pairs, got {self.params!r}")
        for name, value in self.params.items():
            if not _is_number(value):
                raise ConfigError(f"params.{name}: expected a number, got {value!r}")

    @staticmethod
    def _check_values(field_name: str, values: Any) -> None:
        if not isinstance(values, list):
            raise ConfigError(f"{field_name}: expected a list of numbers or expressions")
        for i, value in enumerate(values):
            if not (_is_number(value) or isinstance(value, str)):
                raise ConfigError(f"{field_name}[{i}]: expected a number or expression, got {value!r}")

    def family_enum(self) -> Family:
        """
        Family selected by `sign` (first order) or `family`.

        Raises:
            ConfigError: If either is unknown
        """
        if self.sign is not None:
            try:
                return Family.for_sign(Sign(self.sign))
            except ValueError:
                raise ConfigError(f"sign: expected '+' or '-', got {self.sign!r}")
        try:
            return Family.from_string(self.family)
        except ValueError as e:
            raise ConfigError(f"family: {e}")

    @staticmethod
    def _number(field_name: str, value: Number, names: Dict[str, float]) -> float:
        if isinstance(value, bool):
            raise ConfigError(f"{field_name}: expected a number, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return evaluate_expression(str(value), names)
        except ValueError as e:
            raise ConfigError(f"{field_name}: {e}") from e

    def names(self, overrides: Optional[Dict[str, float]] = None) -> Dict[str, float]:
        params = dict(self.params)
        if overrides:
            params.update(overrides)
        return params

    def resolve_h(self, overrides: Optional[Dict[str, float]] = None) -> float:
        names = self.names(overrides)
        if "h" in names:
            return float(names["h"])
        return self._number("h", self.h, names)

    def resolve_cycle(self, overrides: Optional[Dict[str, float]] = None, strict: bool = True) -> PeriodicCycle:
        """
        The cycle with every expression evaluated.

        Args:
            overrides: Parameter values taking precedence over params (used by sweeps)
            strict: Enforce the minimal-period check

        Raises:
            ConfigError: On a bad expression, an empty cycle or an invalid cycle
        """
        if not self.cycle:
            raise ConfigError("cycle: at least one value is required")
        h = self.resolve_h(overrides)
        names = self.names(overrides)
        names["h"] = h
        values = [self._number(f"cycle[{i}]", v, names) for i, v in enumerate(self.cycle)]
        try:
            if strict:
                return PeriodicCycle(h=h, values=tuple(values))
            return PeriodicCycle.relaxed(h, values)
        except ValueError as e:
            raise ConfigError(f"cycle: {e}") from e

    def window_for(self, n: int) -> int:
        return self.window if self.window is not None else constants.DEFAULT_WINDOW_PERIODS * n

    def residual_profile(self) -> ResidualProfile:
        """
        Residual profile from epsilon, profile and seed.

        Raises:
            ConfigError: If the explicit values exceed epsilon
        """
        pattern = ProfilePattern(self.profile)
        values = tuple(self.profile_values) if pattern is ProfilePattern.EXPLICIT and self.profile_values else None
        try:
            return ResidualProfile(epsilon=float(self.epsilon), pattern=pattern, values=values, seed=self.seed)
        except ValueError as e:
            raise ConfigError(f"profile: {e}") from e

    def forcing_trajectory(self, h: float, length: int) -> Optional[Trajectory]:
        """The periodic forcing repeated over `length` samples, None without forcing."""
        if not self.forcing:
            return None
        names = self.names()
        names["h"] = h
        period = [self._number(f"forcing[{i}]", v, names) for i, v in enumerate(self.forcing)]
        return Trajectory(h=h, start=0, samples=np.resize(np.asarray(period, dtype=float), length))
