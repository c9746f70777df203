"""Domain types, the built-in material library, and tabular file I/O.

The canonical feature order (thickness, density, thermal conductivity,
specific heat capacity, solar/visual/thermal absorptance) is fixed here and
used everywhere: dataset columns, PCA loading rows, LDA coefficients.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class FeatureId(IntEnum):
    """The seven material properties, in canonical column order."""

    THICKNESS = 0               # m
    DENSITY = 1                 # kg/m3
    THERMAL_CONDUCTIVITY = 2    # W/mK
    SPECIFIC_HEAT_CAPACITY = 3  # J/(kg K)
    SOLAR_ABSORPTANCE = 4       # dimensionless, in (0, 1)
    VISUAL_ABSORPTANCE = 5      # dimensionless, in (0, 1)
    THERMAL_ABSORPTANCE = 6     # dimensionless, in (0, 1)

    @property
    def column_name(self) -> str:
        return self.name.lower()


N_FEATURES = len(FeatureId)

FEATURE_COLUMNS = tuple(f.column_name for f in FeatureId)

FEATURE_UNITS = {
    FeatureId.THICKNESS: "m",
    FeatureId.DENSITY: "kg/m3",
    FeatureId.THERMAL_CONDUCTIVITY: "W/mK",
    FeatureId.SPECIFIC_HEAT_CAPACITY: "J/kgK",
    FeatureId.SOLAR_ABSORPTANCE: "-",
    FeatureId.VISUAL_ABSORPTANCE: "-",
    FeatureId.THERMAL_ABSORPTANCE: "-",
}


class ClassLabel(IntEnum):
    """Thermal-load class, totally ordered LOW < MEDIUM < HIGH."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def csv_value(self) -> str:
        return self.name.lower()

    @classmethod
    def from_csv(cls, text: str) -> "ClassLabel":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(
                f"unknown label {text!r}: expected one of low, medium, high"
            ) from None


@dataclass(frozen=True)
class PropertyDistribution:
    """Normal distribution N(mean, std_dev^2) of one material property."""

    mean: float
    std_dev: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise ValueError(f"mean must be finite, got {self.mean}")
        if not (math.isfinite(self.std_dev) and self.std_dev >= 0.0):
            raise ValueError(f"std_dev must be finite and >= 0, got {self.std_dev}")


@dataclass(frozen=True)
class MaterialSpec:
    """A named material with one distribution per feature (all seven)."""

    name: str
    dist: Mapping[FeatureId, PropertyDistribution]

    def __post_init__(self) -> None:
        missing = [f.column_name for f in FeatureId if f not in self.dist]
        if missing or len(self.dist) != N_FEATURES:
            raise ValueError(
                f"material {self.name!r}: need exactly one distribution per "
                f"feature, missing {missing}"
            )
        object.__setattr__(self, "dist", dict(self.dist))

    def mean_vector(self) -> tuple[float, ...]:
        return tuple(self.dist[f].mean for f in FeatureId)


@dataclass(frozen=True)
class MaterialLibrary:
    """Ordered collection of materials with unique names."""

    materials: tuple[MaterialSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "materials", tuple(self.materials))
        names = [m.name for m in self.materials]
        if len(set(names)) != len(names):
            raise ValueError(f"material names must be unique, got {names}")

    def __len__(self) -> int:
        return len(self.materials)

    def __iter__(self) -> Iterator[MaterialSpec]:
        return iter(self.materials)

    def __getitem__(self, index: int) -> MaterialSpec:
        return self.materials[index]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.materials)


@dataclass(frozen=True)
class SystemConstants:
    """Fixed system design assumptions (not varied by the sampler)."""

    equipment_load: float = 10.98          # W/m2
    infiltration_rate: float = 0.0003      # m3/s m2
    lighting_density: float = 9.36         # W/m2
    people_density: float = 0.25           # ppl/m2
    ventilation_per_area: float = 0.0006   # m3/s m2
    ventilation_per_person: float = 0.005  # m3/s person
    glazing_u_value: float = 0.6           # W/m2K

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class Row:
    """One design alternative: material id, 7 features, optional load/label."""

    material_index: int
    features: tuple[float, ...]
    load: float | None = None
    label: ClassLabel | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        if len(self.features) != N_FEATURES:
            raise ValueError(
                f"expected {N_FEATURES} features, got {len(self.features)}"
            )
        for f, v in zip(FeatureId, self.features):
            if not math.isfinite(v):
                raise ValueError(f"feature {f.column_name} is not finite: {v}")
        if self.material_index < 0:
            raise ValueError(f"material_index must be >= 0, got {self.material_index}")
        if self.load is not None:
            load = float(self.load)
            if not math.isfinite(load) or load < 0.0:
                raise ValueError(f"load must be finite and >= 0, got {load}")
            object.__setattr__(self, "load", load)


@dataclass(frozen=True)
class Dataset:
    """Immutable table of rows; loads and labels are attached stage by stage."""

    rows: tuple[Row, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def feature_matrix(self) -> np.ndarray:
        return np.array([r.features for r in self.rows], dtype=np.float64).reshape(
            len(self.rows), N_FEATURES
        )

    def material_indices(self) -> np.ndarray:
        return np.array([r.material_index for r in self.rows], dtype=np.int64)

    def loads(self) -> list[float | None]:
        return [r.load for r in self.rows]

    def labels(self) -> list[ClassLabel | None]:
        return [r.label for r in self.rows]

    def has_loads(self) -> bool:
        return len(self.rows) > 0 and all(r.load is not None for r in self.rows)

    def has_labels(self) -> bool:
        return len(self.rows) > 0 and all(r.label is not None for r in self.rows)

    def with_loads(self, loads: Sequence[float]) -> "Dataset":
        if len(loads) != len(self.rows):
            raise ValueError(f"expected {len(self.rows)} loads, got {len(loads)}")
        return Dataset(
            tuple(
                Row(r.material_index, r.features, float(q), r.label)
                for r, q in zip(self.rows, loads)
            )
        )

    def with_labels(self, labels: Sequence[ClassLabel]) -> "Dataset":
        if len(labels) != len(self.rows):
            raise ValueError(f"expected {len(self.rows)} labels, got {len(labels)}")
        return Dataset(
            tuple(
                Row(r.material_index, r.features, r.load, lbl)
                for r, lbl in zip(self.rows, labels)
            )
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        if features.shape != (len(self.rows), N_FEATURES):
            raise ValueError(f"expected shape {(len(self.rows), N_FEATURES)}")
        return Dataset(
            tuple(
                Row(r.material_index, tuple(feats), r.load, r.label)
                for r, feats in zip(self.rows, features)
            )
        )

    def select(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.rows[i] for i in indices))


# Built-in library: the six wall materials and their Gaussian property
# distributions (mean, std dev), in canonical feature order per material.
_ABSORPTANCE = (0.5, 0.05)

_BUILTIN_MATERIALS: tuple[tuple[str, tuple[tuple[float, float], ...]], ...] = (
    # name, ((mean, std) for thickness, density, conductivity, specific heat,
    #        solar, visual, thermal absorptance)
    ("timber_insulated_panel_osb",
     ((0.01, 0.001), (545.0, 20.0), (0.135, 0.0075), (1740.0, 442.5),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
    ("timber_insulated_panel_insulation",
     ((0.09, 0.009), (11.0, 1.0), (0.0465, 0.005), (805.0, 17.5),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
    ("concrete",
     ((0.21, 0.021), (2000.0, 30.0), (1.13, 0.1), (1000.0, 106.0),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
    ("brick",
     ((0.16, 0.016), (1700.0, 297.5), (0.84, 0.27), (800.0, 86.0),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
    ("aluminum",
     ((0.14, 0.014), (6278.0, 2876.0), (244.0, 107.0), (544.0, 233.0),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
    ("glass",
     ((0.31, 0.031), (2509.0, 105.0), (1.294, 0.69), (820.0, 50.0),
      _ABSORPTANCE, _ABSORPTANCE, _ABSORPTANCE)),
)


def builtin_material_library() -> MaterialLibrary:
    """The six built-in wall materials with their property distributions."""
    materials = []
    for name, dists in _BUILTIN_MATERIALS:
        dist = {
            f: PropertyDistribution(mean, std)
            for f, (mean, std) in zip(FeatureId, dists)
        }
        materials.append(MaterialSpec(name, dist))
    return MaterialLibrary(tuple(materials))


def builtin_system_constants() -> SystemConstants:
    """The fixed system design assumptions."""
    return SystemConstants()


# ---------------------------------------------------------------------------
# CSV I/O
#
# Layout: header row, then per row
#   material_index, <7 features in canonical order>, load, label
# load and label cells are empty when unset. '.' decimal separator, no
# locale dependence. Floats are written with repr() so read(write(d)) == d
# bit-exactly.

CSV_HEADER = ("material_index",) + FEATURE_COLUMNS + ("load", "label")


def _format_float(v: float) -> str:
    return repr(float(v))


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as CSV; see module docs for the layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in dataset.rows:
            cells = [str(row.material_index)]
            cells.extend(_format_float(v) for v in row.features)
            cells.append("" if row.load is None else _format_float(row.load))
            cells.append("" if row.label is None else row.label.csv_value)
            writer.writerow(cells)


def read_dataset(path: str | Path) -> Dataset:
    """Read a dataset CSV. Raises ValueError naming row and column on bad input."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty file: missing header row") from None
        _check_header(header)
        has_load = len(header) >= 9
        has_label = len(header) >= 10
        rows = []
        for rownum, cells in enumerate(reader, start=1):
            if not cells:
                continue
            rows.append(_parse_row(rownum, cells, has_load, has_label))
    return Dataset(tuple(rows))


def _check_header(header: list[str]) -> None:
    expected = list(CSV_HEADER[: 1 + N_FEATURES])
    got = [h.strip() for h in header[: 1 + N_FEATURES]]
    if got != expected:
        raise ValueError(
            f"bad header: expected columns {expected}, got {got}"
        )
    tail = [h.strip() for h in header[1 + N_FEATURES :]]
    if tail not in ([], ["load"], ["load", "label"]):
        raise ValueError(f"bad header tail: expected [load[, label]], got {tail}")


def _parse_row(rownum: int, cells: list[str], has_load: bool, has_label: bool) -> Row:
    n_expected = 1 + N_FEATURES + int(has_load) + int(has_label)
    if len(cells) != n_expected:
        n_feat = len(cells) - 1 - int(has_load) - int(has_label)
        raise ValueError(f"row {rownum}: expected {N_FEATURES} features, got {n_feat}")
    try:
        material_index = int(cells[0])
    except ValueError:
        raise ValueError(
            f"row {rownum}, column material_index: not an integer: {cells[0]!r}"
        ) from None
    features = []
    for f, cell in zip(FeatureId, cells[1 : 1 + N_FEATURES]):
        try:
            value = float(cell)
        except ValueError:
            raise ValueError(
                f"row {rownum}, column {f.column_name}: not a number: {cell!r}"
            ) from None
        if not math.isfinite(value):
            raise ValueError(
                f"row {rownum}, column {f.column_name}: non-finite value {cell!r}"
            )
        features.append(value)
    load: float | None = None
    if has_load and cells[1 + N_FEATURES] != "":
        cell = cells[1 + N_FEATURES]
        try:
            load = float(cell)
        except ValueError:
            raise ValueError(
                f"row {rownum}, column load: not a number: {cell!r}"
            ) from None
    label: ClassLabel | None = None
    if has_label and cells[2 + N_FEATURES] != "":
        try:
            label = ClassLabel.from_csv(cells[2 + N_FEATURES].strip())
        except ValueError as exc:
            raise ValueError(f"row {rownum}, column label: {exc}") from None
    try:
        return Row(material_index, tuple(features), load, label)
    except ValueError as exc:
        raise ValueError(f"row {rownum}: {exc}") from None


# ---------------------------------------------------------------------------
# JSON export/import, used for config overrides.

def library_to_json(library: MaterialLibrary) -> dict:
    return {
        "materials": [
            {
                "name": m.name,
                "distributions": {
                    f.column_name: {
                        "mean": m.dist[f].mean,
                        "std_dev": m.dist[f].std_dev,
                    }
                    for f in FeatureId
                },
            }
            for m in library
        ]
    }


def library_from_json(data: Mapping) -> MaterialLibrary:
    materials = []
    for entry in data["materials"]:
        dist = {}
        for f in FeatureId:
            d = entry["distributions"][f.column_name]
            dist[f] = PropertyDistribution(float(d["mean"]), float(d["std_dev"]))
        materials.append(MaterialSpec(str(entry["name"]), dist))
    return MaterialLibrary(tuple(materials))


def constants_to_json(constants: SystemConstants) -> dict:
    return dict(constants.__dict__)


def constants_from_json(data: Mapping) -> SystemConstants:
    known = set(SystemConstants().__dict__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown system constant fields: {sorted(unknown)}")
    return SystemConstants(**{k: float(v) for k, v in data.items()})


def save_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
