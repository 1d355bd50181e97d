"""
CSV Ingestion and Emission
Column bindings (CsvSchema), parsing with per-cell diagnostics, and writing
datasets back out so that a re-read reproduces them exactly
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import DataError
from likelihoods.dataset import Dataset
from model.records import SubjectRecord, record_violations
from .atomic import atomic_write_text
from .keyvalue import dump_key_value, load_mapping, validate_document

_TRUE = {'1', 'true', 't', 'yes', 'y'}
_FALSE = {'0', 'false', 'f', 'no', 'n'}


class CsvSchema(BaseModel):
    """Which CSV columns hold each field of the observed-data tuple"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    time: str = "time"
    event: str = "event"
    subtype: str = "subtype"
    subtype_observed: Optional[str] = "subtype_observed"
    aux: Optional[str] = "aux"
    stratum: Optional[str] = None
    covariates: Tuple[str, ...] = Field(default=(), description="Empty means every unbound column")
    missing_token: str = ""
    n_subtypes: Optional[int] = Field(default=None, ge=1)

    @field_validator('covariates', mode='before')
    @classmethod
    def split_covariates(cls, v):
        if isinstance(v, str):
            return [part.strip() for part in v.split(',') if part.strip()]
        return v

    @field_validator('subtype_observed', 'aux', 'stratum', mode='before')
    @classmethod
    def blank_is_unbound(cls, v):
        return None if isinstance(v, str) and not v.strip() else v

    @model_validator(mode='after')
    def validate_bindings(self):
        bound = [c for c in (self.time, self.event, self.subtype, self.subtype_observed, self.aux, self.stratum) if c]
        if len(set(bound)) != len(bound):
            raise ValueError("a column is bound to more than one field")
        overlap = set(bound) & set(self.covariates)
        if overlap:
            raise ValueError(f"covariate columns also bound to other fields: {', '.join(sorted(overlap))}")
        return self

    @property
    def bound_columns(self) -> List[str]:
        return [c for c in (self.time, self.event, self.subtype, self.subtype_observed, self.aux, self.stratum) if c]

    def covariate_columns(self, header: List[str]) -> List[str]:
        if self.covariates:
            return list(self.covariates)
        return [c for c in header if c not in self.bound_columns]

    def with_stratum(self, column: Optional[str]) -> "CsvSchema":
        if not column:
            return self
        return CsvSchema.model_validate({**self.model_dump(), 'stratum': column})


def load_schema(path: str) -> CsvSchema:
    """CsvSchema from a key-value or JSON file"""
    return validate_document(CsvSchema, load_mapping(path))


@dataclass
class IngestReport:
    """Everything cmd_validate prints about one file"""
    rows: int = 0
    events: int = 0
    observed_subtypes: int = 0
    parse_failures: List[Tuple[int, str, str]] = field(default_factory=list)
    violations: List[Tuple[int, str]] = field(default_factory=list)
    warnings: List[Tuple[int, str]] = field(default_factory=list)
    missing_columns: List[str] = field(default_factory=list)

    @property
    def missing_fraction(self) -> float:
        return (self.events - self.observed_subtypes) / self.events if self.events else 0.0

    @property
    def ok(self) -> bool:
        return not (self.parse_failures or self.violations or self.missing_columns)

    def failures_by_column(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for _, column, _ in self.parse_failures:
            counts[column] = counts.get(column, 0) + 1
        return counts


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return np.nan


def _line(index: int) -> int:
    """File line of a data row (the header is line 1)"""
    return index + 2


class _ColumnParser:
    def __init__(self, frame: pd.DataFrame, missing_token: str, report: IngestReport):
        self.frame = frame
        self.missing = missing_token
        self.report = report

    def blank(self, column: str) -> np.ndarray:
        return (self.frame[column].str.strip() == self.missing).to_numpy()

    def _fail(self, column: str, rows: np.ndarray, what: str):
        for i in np.flatnonzero(rows):
            self.report.parse_failures.append((_line(i), column, f"{what}: {self.frame[column].iat[i]!r}"))

    def number(self, column: str, required: bool = True) -> np.ndarray:
        # Correctly rounded: written values re-read bit for bit
        values = np.array([_to_float(cell) for cell in self.frame[column].str.strip()], dtype=float)
        blank = self.blank(column)
        bad = ~blank & ~np.isfinite(values)
        self._fail(column, bad, "not a finite number")
        if required:
            self._fail(column, blank, "blank value")
        return values

    def integer(self, column: str, required: bool = False) -> np.ndarray:
        """Integer codes; blank cells come back as NaN"""
        values = self.number(column, required=required)
        fractional = np.isfinite(values) & (values != np.round(values))
        self._fail(column, fractional, "not an integer")
        values[fractional] = np.nan
        return values

    def flag(self, column: str, required: bool = True) -> np.ndarray:
        """Booleans (1/0, true/false, yes/no); blank is false unless required"""
        text = self.frame[column].str.strip().str.lower()
        truthy = text.isin(_TRUE).to_numpy()
        falsy = text.isin(_FALSE).to_numpy()
        blank = self.blank(column)
        self._fail(column, ~truthy & ~falsy & ~blank, "not a boolean")
        if required:
            self._fail(column, blank, "blank value")
        return truthy


def parse_csv(path: str, schema: CsvSchema, needs_aux: bool = False) -> Tuple[Optional[Dataset], IngestReport]:
    """
    Parse a CSV file against a schema

    Args:
        path: UTF-8 CSV with a header row
        schema: column bindings
        needs_aux: report event rows with a blank aux cell as warnings

    Returns:
        (dataset, report); dataset is None when the report has findings
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError:
        raise DataError(f"Data file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"Unreadable CSV file: {path}", str(e))

    report = IngestReport(rows=len(frame))
    header = list(frame.columns)
    covariate_columns = schema.covariate_columns(header)
    # subtype_observed and aux are optional in the file; everything else bound must exist
    required = [schema.time, schema.event, schema.subtype] + covariate_columns
    if schema.stratum:
        required.append(schema.stratum)
    report.missing_columns = [c for c in required if c not in header]
    if report.missing_columns:
        return None, report

    n = len(frame)
    parser = _ColumnParser(frame, schema.missing_token, report)
    time = parser.number(schema.time)
    event = parser.flag(schema.event)
    subtype = parser.integer(schema.subtype)
    has_subtype = np.isfinite(subtype)
    if schema.subtype_observed in header:
        observed = parser.flag(schema.subtype_observed, required=False)
    else:
        observed = has_subtype & event
    has_aux_column = schema.aux in header
    aux = parser.integer(schema.aux) if has_aux_column else np.full(n, np.nan)
    stratum = parser.integer(schema.stratum, required=True) if schema.stratum else np.zeros(n)
    covariates = (np.column_stack([parser.number(c) for c in covariate_columns]) if covariate_columns
                  else np.zeros((n, 0)))

    report.events = int(np.sum(event))
    report.observed_subtypes = int(np.sum(observed & event))
    if needs_aux:
        reason = "aux blank on an event row" if has_aux_column else "event row without aux (no aux column)"
        report.warnings = [(_line(i), reason) for i in np.flatnonzero(event & ~np.isfinite(aux))]

    if schema.n_subtypes is not None:
        n_subtypes = schema.n_subtypes
    else:
        n_subtypes = max(int(np.max(subtype[has_subtype])), 1) if np.any(has_subtype) else 1

    failed_lines = {line for line, _, _ in report.parse_failures}
    for i in range(n):
        if _line(i) in failed_lines:
            continue
        for problem in record_violations(
            float(time[i]), bool(event[i]), bool(observed[i]),
            int(subtype[i]) if has_subtype[i] else None,
            int(aux[i]) if np.isfinite(aux[i]) else None,
            n_subtypes=n_subtypes,
            stratum=int(stratum[i]),
        ):
            report.violations.append((_line(i), problem))

    if not report.ok:
        return None, report

    records = [
        SubjectRecord(
            time=float(time[i]),
            event=bool(event[i]),
            covariates=tuple(float(v) for v in covariates[i]),
            subtype_observed=bool(observed[i]),
            subtype=int(subtype[i]) if has_subtype[i] else None,
            aux=int(aux[i]) if np.isfinite(aux[i]) else None,
            stratum=int(stratum[i]),
        )
        for i in range(n)
    ]
    return Dataset.from_records(records, n_subtypes=n_subtypes, covariate_names=covariate_columns), report


def read_dataset(path: str, schema: CsvSchema) -> Dataset:
    """
    Parse a CSV file into a Dataset

    Raises:
        DataError: missing columns, unparseable cells or record invariant violations
    """
    dataset, report = parse_csv(path, schema)
    if dataset is not None:
        return dataset
    if report.missing_columns:
        raise DataError(f"Missing columns in {path}", ", ".join(report.missing_columns))
    findings = [f"line {line} [{column}]: {message}" for line, column, message in report.parse_failures]
    findings += [f"line {line}: {message}" for line, message in report.violations]
    rows = sorted({line for line, _, _ in report.parse_failures} | {line for line, _ in report.violations})
    raise DataError(f"{len(rows)} invalid rows in {path}", "; ".join(findings[:10]), rows)


def dataset_frame(dataset: Dataset, schema: Optional[CsvSchema] = None) -> pd.DataFrame:
    """Dataset as a frame of text cells in the schema's column names"""
    schema = schema or CsvSchema(covariates=dataset.covariate_names)
    blank = schema.missing_token
    records = dataset.to_records()
    columns = {
        schema.time: [repr(r.time) for r in records],
        schema.event: ['1' if r.event else '0' for r in records],
        schema.subtype: [str(r.subtype) if r.subtype is not None else blank for r in records],
    }
    if schema.subtype_observed:
        columns[schema.subtype_observed] = ['1' if r.subtype_observed else '0' for r in records]
    if schema.aux:
        columns[schema.aux] = [str(r.aux) if r.aux is not None else blank for r in records]
    if schema.stratum:
        columns[schema.stratum] = [str(r.stratum) for r in records]
    for j, name in enumerate(schema.covariates or dataset.covariate_names):
        columns[name] = [repr(float(r.covariates[j])) for r in records]
    return pd.DataFrame(columns)


def write_dataset(dataset: Dataset, path: str, schema: Optional[CsvSchema] = None) -> None:
    """Write a dataset as UTF-8 CSV (atomically)"""
    frame = dataset_frame(dataset, schema)
    atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def write_schema(schema: CsvSchema, path: str) -> None:
    atomic_write_text(path, dump_key_value(schema.model_dump(exclude_none=True)))
