"""
Datasets
Column-oriented, immutable view of a sample of SubjectRecords with risk-set indexing
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DataError
from model.records import SubjectRecord

# Sentinels for absent subtype / aux values in the integer columns
NO_SUBTYPE = 0
NO_AUX = -1


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _index_strata(stratum: np.ndarray, codes: Sequence[int]) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Stratum indices 0..S-1 and the code of each index.

    Given codes, `stratum` already holds indices into them. Otherwise the
    distinct values present become the codes, in increasing order. Negative
    values are left for the invariant check to report.
    """
    codes = tuple(int(c) for c in codes)
    if codes:
        if stratum.size and (stratum.min() < 0 or stratum.max() >= len(codes)):
            raise DataError("stratum index outside the stratum code table", f"{len(codes)} codes")
        return stratum, codes
    if not stratum.size or stratum.min() < 0:
        return stratum, ()
    unique, index = np.unique(stratum, return_inverse=True)
    return _frozen(index, np.int64), tuple(int(c) for c in unique)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed data (T, delta, X, O, Y*O, Q*delta, stratum) for n subjects.

    Subtypes are coded 1..K with 0 meaning absent; aux levels are 0..L-1 with
    -1 meaning absent. Stratum codes as given (any nonnegative integers) are
    stored as indices 0..S-1 into stratum_codes, which keeps the originals.
    """
    time: np.ndarray
    event: np.ndarray
    covariates: np.ndarray
    subtype_observed: np.ndarray
    subtype: np.ndarray
    aux: np.ndarray
    stratum: np.ndarray
    n_subtypes: int
    covariate_names: Tuple[str, ...] = field(default=())
    stratum_codes: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        time = _frozen(self.time, float).ravel()
        n = time.shape[0]
        covariates = np.array(self.covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates.reshape(n, -1) if n else covariates.reshape(0, 0)
        covariates.setflags(write=False)
        columns = {
            'time': time,
            'event': _frozen(self.event, bool).ravel(),
            'covariates': covariates,
            'subtype_observed': _frozen(self.subtype_observed, bool).ravel(),
            'subtype': _frozen(self.subtype, np.int64).ravel(),
            'aux': _frozen(self.aux, np.int64).ravel(),
            'stratum': _frozen(self.stratum, np.int64).ravel(),
        }
        columns['stratum'], codes = _index_strata(columns['stratum'], self.stratum_codes)
        object.__setattr__(self, 'stratum_codes', codes)
        for name, values in columns.items():
            if values.shape[0] != n:
                raise DataError(f"column '{name}' has {values.shape[0]} rows, expected {n}")
            object.__setattr__(self, name, values)

        p = covariates.shape[1]
        names = tuple(self.covariate_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise DataError(f"{len(names)} covariate names for {p} covariate columns")
        object.__setattr__(self, 'covariate_names', names)
        if self.n_subtypes < 1:
            raise DataError("n_subtypes must be at least 1")

        problems = self.invariant_violations()
        if problems:
            rows = sorted({row for row, _ in problems})
            shown = "; ".join(f"row {row}: {msg}" for row, msg in problems[:10])
            raise DataError(f"Dataset violates record invariants in {len(rows)} rows", shown, rows)

    # Construction

    @classmethod
    def from_records(
        cls,
        records: Sequence[SubjectRecord],
        n_subtypes: Optional[int] = None,
        covariate_names: Optional[Sequence[str]] = None,
    ) -> "Dataset":
        if not records:
            raise DataError("dataset has no records")
        p = len(records[0].covariates)
        if any(len(r.covariates) != p for r in records):
            raise DataError("records disagree on the number of covariates")
        subtypes = [r.subtype if r.subtype is not None else NO_SUBTYPE for r in records]
        if n_subtypes is None:
            n_subtypes = max(max(subtypes), 1)
        return cls(
            time=[r.time for r in records],
            event=[r.event for r in records],
            covariates=np.array([r.covariates for r in records], dtype=float).reshape(len(records), p),
            subtype_observed=[r.subtype_observed for r in records],
            subtype=subtypes,
            aux=[r.aux if r.aux is not None else NO_AUX for r in records],
            stratum=[r.stratum for r in records],
            n_subtypes=n_subtypes,
            covariate_names=tuple(covariate_names or ()),
        )

    def to_records(self) -> List[SubjectRecord]:
        """One record per row, strata under their original codes"""
        codes = self.stratum_code_column
        return [
            SubjectRecord(
                time=float(self.time[i]),
                event=bool(self.event[i]),
                covariates=tuple(self.covariates[i]),
                subtype_observed=bool(self.subtype_observed[i]),
                subtype=int(self.subtype[i]) if self.subtype[i] != NO_SUBTYPE else None,
                aux=int(self.aux[i]) if self.aux[i] != NO_AUX else None,
                stratum=int(codes[i]),
            )
            for i in range(self.n)
        ]

    def subset(self, mask) -> "Dataset":
        """Rows selected by a boolean mask or index array, order preserved"""
        rows = np.asarray(mask)
        return Dataset(
            time=self.time[rows],
            event=self.event[rows],
            covariates=self.covariates[rows],
            subtype_observed=self.subtype_observed[rows],
            subtype=self.subtype[rows],
            aux=self.aux[rows],
            stratum=self.stratum[rows],
            n_subtypes=self.n_subtypes,
            covariate_names=self.covariate_names,
            stratum_codes=self.stratum_codes,
        )

    def drop_missing_subtype_rows(self) -> "Dataset":
        """Complete cases only: events with unknown subtype are removed entirely"""
        return self.subset(~self.missing_subtype)

    # Validation

    def invariant_violations(self) -> List[Tuple[int, str]]:
        """(row, message) pairs for every SubjectRecord invariant that fails"""
        problems = []
        checks = [
            (~np.isfinite(self.time) | (self.time < 0), "time must be finite and nonnegative"),
            (self.subtype_observed & ~self.event, "subtype observed on a non-event record"),
            (self.subtype_observed & (self.subtype == NO_SUBTYPE), "subtype_observed is true but subtype is blank"),
            (~self.subtype_observed & (self.subtype != NO_SUBTYPE), "subtype present where subtype_observed is false"),
            (~self.event & (self.aux != NO_AUX), "aux present on a non-event record"),
            ((self.subtype < 0) | (self.subtype > self.n_subtypes), f"subtype outside 1..{self.n_subtypes}"),
            (self.aux < NO_AUX, "aux must be a nonnegative category code"),
            (self.stratum < 0, "stratum must be nonnegative"),
            (~np.all(np.isfinite(self.covariates), axis=1) if self.p else np.zeros(self.n, bool),
             "covariates must be finite"),
        ]
        for mask, message in checks:
            problems.extend((int(row), message) for row in np.flatnonzero(mask))
        return sorted(problems)

    def require_aux_on_events(self) -> None:
        rows = np.flatnonzero(self.event & (self.aux == NO_AUX))
        if rows.size:
            raise DataError("estimator requires auxiliary column",
                            f"{rows.size} event rows have no aux value (first: row {int(rows[0])})",
                            rows.tolist())

    # Summaries

    @property
    def n(self) -> int:
        return int(self.time.shape[0])

    @property
    def p(self) -> int:
        return int(self.covariates.shape[1])

    @property
    def num_strata(self) -> int:
        return max(len(self.stratum_codes), 1)

    @property
    def stratum_code_column(self) -> np.ndarray:
        """Original stratum code of every row"""
        if not self.stratum_codes:
            return self.stratum
        return np.asarray(self.stratum_codes, dtype=np.int64)[self.stratum]

    @property
    def missing_subtype(self) -> np.ndarray:
        return self.event & ~self.subtype_observed

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    @property
    def n_observed(self) -> int:
        return int(self.subtype_observed.sum())

    @property
    def missing_fraction(self) -> float:
        """Fraction of events whose subtype is missing"""
        return float(self.missing_subtype.sum() / self.n_events) if self.n_events else 0.0

    @property
    def censoring_fraction(self) -> float:
        return float(1.0 - self.event.mean()) if self.n else 0.0

    @property
    def aux_levels(self) -> int:
        return int(self.aux.max()) + 1 if np.any(self.aux != NO_AUX) else 0

    def summary(self) -> Dict[str, float]:
        return {
            'rows': self.n,
            'events': self.n_events,
            'observed_subtype': self.n_observed,
            'missing_subtype': int(self.missing_subtype.sum()),
            'missing_fraction': self.missing_fraction,
            'censoring_fraction': self.censoring_fraction,
            'strata': self.num_strata,
        }

    def observed_event_ratios(self) -> np.ndarray:
        """(num_strata, K) ratio of observed type-k to observed type-1 events per stratum"""
        ratios = np.ones((self.num_strata, self.n_subtypes))
        for s in range(self.num_strata):
            in_stratum = self.subtype_observed & (self.stratum == s)
            counts = np.bincount(self.subtype[in_stratum], minlength=self.n_subtypes + 1)[1:]
            if counts[0] > 0:
                with np.errstate(divide='ignore'):
                    ratios[s] = counts / counts[0]
        return ratios

    # Risk-set indexing

    @cached_property
    def event_order(self) -> np.ndarray:
        """All event rows sorted by (time, row); likelihood terms are reduced in this order"""
        rows = np.flatnonzero(self.event)
        return rows[np.lexsort((rows, self.time[rows]))]

    @cached_property
    def stratum_orders(self) -> Dict[int, np.ndarray]:
        """Rows of each stratum sorted by (time, row) ascending"""
        orders = {}
        for s in np.unique(self.stratum):
            rows = np.flatnonzero(self.stratum == s)
            orders[int(s)] = rows[np.lexsort((rows, self.time[rows]))]
        return orders

    def same_as(self, other: "Dataset") -> bool:
        """Field-by-field equality"""
        return (
            self.n_subtypes == other.n_subtypes
            and self.covariate_names == other.covariate_names
            and self.stratum_codes == other.stratum_codes
            and all(np.array_equal(getattr(self, name), getattr(other, name))
                    for name in ('time', 'event', 'covariates', 'subtype_observed', 'subtype', 'aux', 'stratum'))
        )

