"""
Subject Records
One observation of the observed-data tuple (time, event, covariates, O, Y, Q, stratum)
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from core.errors import DataError


def record_violations(
    time: Optional[float],
    event: Optional[bool],
    subtype_observed: Optional[bool],
    subtype: Optional[int],
    aux: Optional[int],
    n_subtypes: Optional[int] = None,
    stratum: int = 0,
) -> List[str]:
    """Return the invariant violations of one record (empty list when valid)"""
    problems = []
    if time is None or not math.isfinite(time) or time < 0:
        problems.append(f"time must be finite and nonnegative (got {time})")
    if subtype_observed and not event:
        problems.append("subtype observed on a non-event record")
    if subtype_observed and subtype is None:
        problems.append("subtype_observed is true but subtype is blank")
    if not subtype_observed and subtype is not None:
        problems.append("subtype present where subtype_observed is false")
    if not event and aux is not None:
        problems.append("aux present on a non-event record")
    if subtype is not None and (subtype < 1 or (n_subtypes is not None and subtype > n_subtypes)):
        problems.append(f"subtype {subtype} outside 1..{n_subtypes if n_subtypes is not None else 'K'}")
    if aux is not None and aux < 0:
        problems.append(f"aux must be a nonnegative category code (got {aux})")
    if stratum < 0:
        problems.append(f"stratum must be nonnegative (got {stratum})")
    return problems


@dataclass(frozen=True)
class SubjectRecord:
    """One subject: follow-up time, event flag, baseline covariates and case-only fields"""
    time: float
    event: bool
    covariates: Tuple[float, ...] = field(default_factory=tuple)
    subtype_observed: bool = False
    subtype: Optional[int] = None
    aux: Optional[int] = None
    stratum: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'covariates', tuple(float(v) for v in self.covariates))
        problems = record_violations(
            self.time, self.event, self.subtype_observed, self.subtype, self.aux, stratum=self.stratum
        )
        if problems:
            raise DataError("Invalid subject record", "; ".join(problems))

    @property
    def missing_subtype(self) -> bool:
        """Event whose subtype was not ascertained"""
        return self.event and not self.subtype_observed
