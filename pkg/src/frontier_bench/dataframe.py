"""Cross-sectional observation frames and the variable catalog.

A :class:`Dataset` is one cross-section year of decision-making units (rows)
by named numeric variables (columns). It is immutable: every operation that
changes data returns a new instance.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CatalogError, DataError

CATEGORIES = ("endogenous", "partly_exogenous", "exogenous", "performance")
SIGNS = ("positive", "negative", "ambiguous")
MISSING_POLICIES = ("drop_row", "fail")

_SIGN_ALIASES = {"+": "positive", "-": "negative", "?": "ambiguous"}


@dataclass(frozen=True)
class VariableSpec:
    """Metadata for one explanatory or performance variable."""

    name: str
    category: str
    metric: str = ""
    is_dummy: bool = False
    log_scale: bool = False
    expected_sign: str = "ambiguous"

    def __post_init__(self):
        if not self.name:
            raise CatalogError("variable name must be non-empty")
        if self.category not in CATEGORIES:
            raise CatalogError(f"{self.name}: unknown category {self.category!r}")
        sign = _SIGN_ALIASES.get(self.expected_sign, self.expected_sign)
        if sign not in SIGNS:
            raise CatalogError(f"{self.name}: unknown expected_sign {self.expected_sign!r}")
        object.__setattr__(self, "expected_sign", sign)
        if self.is_dummy and self.log_scale:
            raise CatalogError(f"{self.name}: a dummy cannot be log-scaled")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "category": self.category,
            "metric": self.metric,
            "is_dummy": self.is_dummy,
            "log_scale": self.log_scale,
            "expected_sign": self.expected_sign,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "VariableSpec":
        try:
            return cls(
                name=str(obj["name"]),
                category=str(obj["category"]),
                metric=str(obj.get("metric", "")),
                is_dummy=bool(obj.get("is_dummy", False)),
                log_scale=bool(obj.get("log_scale", False)),
                expected_sign=str(obj.get("expected_sign", "ambiguous")),
            )
        except KeyError as exc:
            raise CatalogError(f"catalog entry missing key {exc}") from None


class VariableCatalog:
    """Ordered, name-unique collection of :class:`VariableSpec`."""

    def __init__(self, specs: Iterable[VariableSpec]):
        self.specs = tuple(specs)
        self._index = {}
        for i, spec in enumerate(self.specs):
            if spec.name in self._index:
                raise CatalogError(f"duplicate catalog variable {spec.name!r}")
            self._index[spec.name] = i

    def __len__(self):
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def __contains__(self, name):
        return name in self._index

    def __getitem__(self, name) -> VariableSpec:
        try:
            return self.specs[self._index[name]]
        except KeyError:
            raise CatalogError(f"variable {name!r} is not in the catalog") from None

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.specs]

    def position(self, name: str) -> int:
        return self._index[name]

    def by_category(self, category: str) -> list[str]:
        return [s.name for s in self.specs if s.category == category]

    def extended(self, extra: Iterable[VariableSpec]) -> "VariableCatalog":
        """Return a new catalog with ``extra`` appended (names already present are skipped)."""
        new = [s for s in extra if s.name not in self._index]
        return VariableCatalog(self.specs + tuple(new))

    def to_json(self) -> str:
        return json.dumps([s.to_dict() for s in self.specs], indent=2)

    @classmethod
    def from_json(cls, text: str) -> "VariableCatalog":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"catalog is not valid JSON: {exc}") from None
        if not isinstance(raw, list):
            raise CatalogError("catalog JSON must be a list of variable objects")
        return cls(VariableSpec.from_dict(obj) for obj in raw)


def load_catalog(path) -> VariableCatalog:
    return VariableCatalog.from_json(Path(path).read_text(encoding="utf-8"))


def default_catalog() -> VariableCatalog:
    """The 22 short-listed ANSP performance factors in their canonical order."""
    text = resources.files("frontier_bench.data").joinpath("default_catalog.json").read_text("utf-8")
    return VariableCatalog.from_json(text)


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated cross-section of DMU observations.

    Attributes
    ----------
    dmu_ids : tuple of str
        Unique unit identifiers, in row order.
    columns : mapping of str to ndarray
        Read-only float vectors, one per variable, each of length ``n``.
    year : int or None
        Calendar year of the cross-section.
    provenance : str
        Source path (or a short description for derived frames).
    transformed : bool
        Set once log-scaling has been applied; guards against double transforms.
    dropped_rows : int
        Rows removed by listwise deletion at load time.
    """

    dmu_ids: tuple
    columns: Mapping[str, np.ndarray]
    year: int | None = None
    provenance: str = ""
    transformed: bool = False
    dropped_rows: int = 0

    def __post_init__(self):
        ids = tuple(str(i) for i in self.dmu_ids)
        if not ids:
            raise DataError("a Dataset needs at least one DMU")
        seen = set()
        for i in ids:
            if i in seen:
                raise DataError(f"duplicate dmu_id {i!r}")
            seen.add(i)
        cols = {}
        for name, values in self.columns.items():
            arr = _freeze(values)
            if arr.ndim != 1 or arr.shape[0] != len(ids):
                raise DataError(f"column {name!r} has length {arr.size}, expected {len(ids)}")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"column {name!r} contains NaN or infinite values")
            cols[name] = arr
        object.__setattr__(self, "dmu_ids", ids)
        object.__setattr__(self, "columns", MappingProxyType(cols))

    @property
    def n(self) -> int:
        return len(self.dmu_ids)

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __contains__(self, name):
        return name in self.columns

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"unknown variable {name!r}") from None

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Stack the named columns into an ``(n, len(names))`` array."""
        if not names:
            return np.empty((self.n, 0))
        return np.column_stack([self.column(v) for v in names])

    def select_rows(self, dmu_ids: Sequence[str]) -> "Dataset":
        pos = {d: i for i, d in enumerate(self.dmu_ids)}
        missing = [d for d in dmu_ids if d not in pos]
        if missing:
            raise DataError(f"unknown dmu_id(s): {', '.join(map(str, missing))}")
        idx = np.array([pos[d] for d in dmu_ids], dtype=int)
        return replace(self, dmu_ids=tuple(dmu_ids),
                       columns={k: v[idx] for k, v in self.columns.items()})

    def with_column(self, name: str, values) -> "Dataset":
        cols = dict(self.columns)
        cols[name] = values
        return replace(self, columns=cols)


@dataclass(frozen=True)
class StatsRow:
    variable: str
    min: float
    median: float
    max: float


def _parse_cell(text: str, column: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: non-numeric cell {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {column!r}: non-finite cell {text!r}")
    return value


def check_dummies(ds: Dataset, catalog: VariableCatalog) -> None:
    for name in ds.names:
        if name in catalog and catalog[name].is_dummy:
            bad = ~np.isin(ds.columns[name], (0.0, 1.0))
            if bad.any():
                who = ds.dmu_ids[int(np.argmax(bad))]
                raise DataError(f"dummy {name!r} has a value outside {{0, 1}} (dmu {who!r})")


def load_csv(path, catalog: VariableCatalog, missing_policy: str = "drop_row",
             year: int | None = None) -> Dataset:
    """Read and validate a cross-section CSV.

    The first header must be ``dmu_id``; an optional ``year`` column may
    follow anywhere. All other headers must be catalog variables. Rows with
    empty cells are dropped (``missing_policy="drop_row"``, a warning reports
    the count) or rejected (``"fail"``). A file holding several years must be
    narrowed with ``year``.
    """
    if missing_policy not in MISSING_POLICIES:
        raise DataError(f"missing_policy must be one of {MISSING_POLICIES}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        try:
            rows = list(csv.reader(fh, strict=True))
        except csv.Error as exc:
            raise DataError(f"{path}: malformed CSV: {exc}") from None
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header[0] != "dmu_id":
        raise DataError(f"{path}: first column must be 'dmu_id', got {header[0]!r}")
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column header")
    variables = [h for h in header[1:] if h != "year"]
    unknown = [h for h in variables if h not in catalog]
    if unknown:
        raise DataError(f"{path}: unknown column(s) {', '.join(unknown)}")
    year_pos = header.index("year") if "year" in header else None

    records = []
    dropped = 0
    for lineno, raw in enumerate(rows[1:], start=2):
        if len(raw) != len(header):
            raise DataError(f"{path}: line {lineno} has {len(raw)} fields, expected {len(header)}")
        cells = [c.strip() for c in raw]
        if any(c == "" for c in cells):
            if missing_policy == "fail":
                blank = header[cells.index("")]
                raise DataError(f"{path}: line {lineno} has an empty {blank!r} cell")
            dropped += 1
            continue
        rec_year = None
        if year_pos is not None:
            try:
                rec_year = int(cells[year_pos])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad year {cells[year_pos]!r}") from None
        values = {h: _parse_cell(c, h, lineno) for h, c in zip(header, cells)
                  if h not in ("dmu_id", "year")}
        records.append((cells[0], rec_year, values))

    if year_pos is not None:
        years = sorted({r[1] for r in records})
        if year is None:
            if len(years) > 1:
                raise DataError(f"{path}: file holds years {years}; select a single year")
            year = years[0] if years else None
        else:
            records = [r for r in records if r[1] == year]
    if not records:
        raise DataError(f"{path}: no complete rows remain")
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} row(s) with missing cells", stacklevel=2)

    ds = Dataset(
        dmu_ids=tuple(r[0] for r in records),
        columns={v: [r[2][v] for r in records] for v in variables},
        year=year,
        provenance=str(path),
        dropped_rows=dropped,
    )
    check_dummies(ds, catalog)
    return ds


def write_csv(ds: Dataset, path) -> None:
    """Write ``ds`` so that :func:`load_csv` reproduces every value bit-for-bit."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["dmu_id"] + (["year"] if ds.year is not None else []) + ds.names
        writer.writerow(header)
        for i, dmu in enumerate(ds.dmu_ids):
            row = [dmu] + ([str(ds.year)] if ds.year is not None else [])
            row += [format(ds.columns[v][i], ".17g") for v in ds.names]
            writer.writerow(row)


def apply_transforms(ds: Dataset, catalog: VariableCatalog) -> Dataset:
    """Replace every log-scaled catalog variable by its natural logarithm."""
    if ds.transformed:
        raise DataError("dataset has already been transformed")
    cols = dict(ds.columns)
    for name, values in ds.columns.items():
        if name in catalog and catalog[name].log_scale:
            if np.any(values <= 0):
                who = ds.dmu_ids[int(np.argmax(values <= 0))]
                raise DataError(f"log-scaled variable {name!r} has a non-positive value (dmu {who!r})")
            cols[name] = np.log(values)
    return replace(ds, columns=cols, transformed=True)


def descriptive_stats(ds: Dataset, variables: Sequence[str]) -> list[StatsRow]:
    if not variables:
        raise DataError("descriptive_stats needs at least one variable")
    out = []
    for name in variables:
        values = ds.column(name)
        out.append(StatsRow(name, float(values.min()), float(np.median(values)), float(values.max())))
    return out
