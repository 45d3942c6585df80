import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, NotRequired, TypedDict

import numpy as np

from ..core.exceptions import ConfigError
from ..core.fields import Gauge, NCProfile
from ..core.taylor_jets import FloatArray

# Tasks in dependency order
TASKS = ("omega0", "omega2", "jacobi", "roundtrip", "counterexample", "lsz", "limits")
# Tasks that sweep the configured grid and therefore need a profile valid on it
GRID_TASKS = ("omega0", "omega2", "jacobi", "roundtrip", "limits")

MIN_JET_ORDER = 3


class ProfileConfigJson(TypedDict):
    """Profile block of a run configuration."""

    theta: float
    alpha: float
    f_poly: NotRequired[list[float]]
    gauge: NotRequired[str]


class GridJson(TypedDict):
    """Grid block of a run configuration."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int


class RunConfigJson(TypedDict):
    """
    Defines the structure of the JSON run configuration.
    Only `profile` is required; every other block falls back to its defaults.
    """

    profile: ProfileConfigJson
    grid: NotRequired[GridJson]
    jet_order: NotRequired[int]
    tolerances: NotRequired[dict[str, float]]
    tasks: NotRequired[list[str]]
    limit_theta: NotRequired[float]
    lsz_samples: NotRequired[int]
    seed: NotRequired[int]


def _number(data: Any, path: str) -> float:  # noqa: ANN401
    if isinstance(data, bool) or not isinstance(data, int | float) or not math.isfinite(data):
        raise ConfigError(path, f"expected a finite number, got {data!r}")
    return float(data)


def _integer(data: Any, path: str) -> int:  # noqa: ANN401
    if isinstance(data, bool) or not isinstance(data, int):
        raise ConfigError(path, f"expected an integer, got {data!r}")
    return data


@dataclass(frozen=True)
class GridSpec:
    """A rectangular grid of evaluation points, swept row by row (y outer, x inner)."""

    xmin: float = -3.0
    xmax: float = 3.0
    ymin: float = -3.0
    ymax: float = 3.0
    nx: int = 21
    ny: int = 21

    def __post_init__(self) -> None:
        if self.nx < 2:
            raise ConfigError("grid.nx", f"must be at least 2, got {self.nx}")
        if self.ny < 2:
            raise ConfigError("grid.ny", f"must be at least 2, got {self.ny}")
        if not self.xmax > self.xmin:
            raise ConfigError("grid.xmax", f"must exceed xmin ({self.xmax} <= {self.xmin})")
        if not self.ymax > self.ymin:
            raise ConfigError("grid.ymax", f"must exceed ymin ({self.ymax} <= {self.ymin})")

    @property
    def xs(self) -> FloatArray:
        """Grid abscissae."""
        return np.linspace(self.xmin, self.xmax, self.nx)

    @property
    def ys(self) -> FloatArray:
        """Grid ordinates."""
        return np.linspace(self.ymin, self.ymax, self.ny)

    def points(self) -> list[tuple[float, float]]:
        """All nodes in sweep order."""
        return [(float(x), float(y)) for y in self.ys for x in self.xs]

    def to_dict(self) -> GridJson:
        """
        Convert the grid into a Python dictionary.

        Returns:
            GridJson: The grid encoded in a dict.
        """
        return {
            "xmin": self.xmin,
            "xmax": self.xmax,
            "ymin": self.ymin,
            "ymax": self.ymax,
            "nx": self.nx,
            "ny": self.ny,
        }

    @staticmethod
    def from_dict(data: GridJson) -> "GridSpec":
        """
        Build a grid from its dictionary form.

        Args:
            data (GridJson): The grid in a dict format.

        Returns:
            GridSpec: The validated grid.
        """
        if not isinstance(data, dict):
            raise ConfigError("grid", "expected an object")
        defaults = GridSpec()
        unknown = set(data) - {item.name for item in fields(GridSpec)}
        if unknown:
            raise ConfigError(f"grid.{sorted(unknown)[0]}", "unknown field")
        return GridSpec(
            xmin=_number(data.get("xmin", defaults.xmin), "grid.xmin"),
            xmax=_number(data.get("xmax", defaults.xmax), "grid.xmax"),
            ymin=_number(data.get("ymin", defaults.ymin), "grid.ymin"),
            ymax=_number(data.get("ymax", defaults.ymax), "grid.ymax"),
            nx=_integer(data.get("nx", defaults.nx), "grid.nx"),
            ny=_integer(data.get("ny", defaults.ny), "grid.ny"),
        )


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds of the verification tasks."""

    jacobi: float = 1e-9
    roundtrip: float = 1e-10
    roundtrip_derivatives: float = 1e-8
    omega2_match: float = 1e-8
    omega0_match: float = 1e-10
    limits: float = 1e-7
    counterexample: float = 1e-12
    lsz: float = 1e-12
    lsz_substitution: float = 1e-13

    def __post_init__(self) -> None:
        for item in fields(self):
            value = getattr(self, item.name)
            if not value > 0.0:
                raise ConfigError(f"tolerances.{item.name}", f"must be positive, got {value}")

    def to_dict(self) -> dict[str, float]:
        """Return the tolerances keyed by name."""
        return {item.name: getattr(self, item.name) for item in fields(self)}

    @staticmethod
    def from_dict(data: dict[str, float]) -> "Tolerances":
        """
        Build tolerances from a dictionary; missing names keep their defaults.

        Args:
            data (dict[str, float]): Tolerances keyed by name.

        Returns:
            Tolerances: The validated tolerances.
        """
        if not isinstance(data, dict):
            raise ConfigError("tolerances", "expected an object")
        known = {item.name for item in fields(Tolerances)}
        values: dict[str, float] = {}
        for name, value in data.items():
            if name not in known:
                raise ConfigError(f"tolerances.{name}", "unknown tolerance")
            values[name] = _number(value, f"tolerances.{name}")
        return Tolerances(**values)


@dataclass(frozen=True)
class RunConfig:
    """A complete batch run: the profile, the grid and the tasks to verify."""

    profile: NCProfile
    gauge: Gauge = Gauge.PHI
    grid: GridSpec = field(default_factory=GridSpec)
    # Order requested from ω₀ by the ω₂ task; ω₀ values and Jacobi sums use their own minimal orders
    jet_order: int = 4
    tolerances: Tolerances = field(default_factory=Tolerances)
    tasks: tuple[str, ...] = TASKS
    limit_theta: float = 1e-9
    lsz_samples: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.jet_order < MIN_JET_ORDER:
            raise ConfigError("jet_order", f"must be at least {MIN_JET_ORDER}, got {self.jet_order}")
        unknown = [task for task in self.tasks if task not in TASKS]
        if unknown:
            raise ConfigError("tasks", f"unknown task {unknown[0]!r}, expected a subset of {', '.join(TASKS)}")
        if not self.tasks:
            raise ConfigError("tasks", "at least one task is required")
        if not self.limit_theta > 0.0:
            raise ConfigError("limit_theta", f"must be positive, got {self.limit_theta}")
        if self.lsz_samples < 1:
            raise ConfigError("lsz_samples", f"must be at least 1, got {self.lsz_samples}")
        # Keep the execution order fixed regardless of how tasks were listed
        object.__setattr__(self, "tasks", tuple(task for task in TASKS if task in self.tasks))

    def with_overrides(self, tasks: list[str] | None = None, jet_order: int | None = None) -> "RunConfig":
        """Return a copy with command-line overrides applied."""
        changes: dict[str, Any] = {}
        if tasks is not None:
            changes["tasks"] = tuple(tasks)
        if jet_order is not None:
            changes["jet_order"] = jet_order
        return replace(self, **changes)

    def to_dict(self) -> RunConfigJson:
        """
        Convert the configuration into a Python dictionary.

        Returns:
            RunConfigJson: The configuration encoded in a dict.
        """
        profile: ProfileConfigJson = {
            "theta": self.profile.theta,
            "alpha": self.profile.alpha,
            "f_poly": list(self.profile.f_poly),
            "gauge": self.gauge.name.lower(),
        }
        return {
            "profile": profile,
            "grid": self.grid.to_dict(),
            "jet_order": self.jet_order,
            "tolerances": self.tolerances.to_dict(),
            "tasks": list(self.tasks),
            "limit_theta": self.limit_theta,
            "lsz_samples": self.lsz_samples,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: RunConfigJson) -> "RunConfig":
        """
        Build a configuration from its dictionary form.

        Args:
            data (RunConfigJson): The configuration in a dict format.

        Returns:
            RunConfig: The validated configuration.

        Raises:
            ConfigError: Naming the first invalid field.
        """
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a JSON object")
        unknown = set(data) - set(RunConfigJson.__annotations__)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        if "profile" not in data or not isinstance(data["profile"], dict):
            raise ConfigError("profile", "missing or not an object")
        raw_profile = data["profile"]
        raw_poly = raw_profile.get("f_poly", [0.0, 1.0])
        if not isinstance(raw_poly, list):
            raise ConfigError("profile.f_poly", "expected a list of numbers")
        profile = NCProfile(
            theta=_number(raw_profile.get("theta"), "profile.theta"),
            alpha=_number(raw_profile.get("alpha"), "profile.alpha"),
            f_poly=tuple(_number(value, f"profile.f_poly[{index}]") for index, value in enumerate(raw_poly)),
        )
        gauge = Gauge.from_name(str(raw_profile.get("gauge", "phi")))
        tasks = data.get("tasks", list(TASKS))
        if not isinstance(tasks, list) or not all(isinstance(task, str) for task in tasks):
            raise ConfigError("tasks", "expected a list of task names")
        return RunConfig(
            profile=profile,
            gauge=gauge,
            grid=GridSpec.from_dict(data.get("grid", GridSpec().to_dict())),
            jet_order=_integer(data.get("jet_order", 4), "jet_order"),
            tolerances=Tolerances.from_dict(data.get("tolerances", {})),
            tasks=tuple(tasks),
            limit_theta=_number(data.get("limit_theta", 1e-9), "limit_theta"),
            lsz_samples=_integer(data.get("lsz_samples", 100), "lsz_samples"),
            seed=_integer(data.get("seed", 0), "seed"),
        )

    @staticmethod
    def from_json(data: str) -> "RunConfig":
        """
        Deserialize a JSON string into a RunConfig object.

        Args:
            data (str): The configuration as a JSON string.

        Returns:
            RunConfig: The validated configuration.
        """
        try:
            parsed = json.loads(data)
        except json.JSONDecodeError as error:
            raise ConfigError("<root>", f"invalid JSON: {error.msg} (line {error.lineno})") from None
        return RunConfig.from_dict(parsed)

    @staticmethod
    def from_file(path: Path) -> "RunConfig":
        """Read and validate a configuration file; I/O errors propagate as OSError."""
        return RunConfig.from_json(path.read_text(encoding="utf-8"))
