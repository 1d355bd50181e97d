"""
Shared test fixtures: a hand-built two-subtype sample with ties and missing
subtypes, random tiny samples, and small simulation scenarios
"""

import numpy as np
import pytest

from likelihoods.dataset import Dataset, NO_AUX, NO_SUBTYPE
from simulation.scenario import Scenario


def make_dataset(rows, n_subtypes=2, names=("x1", "x2")):
    """rows: (time, event, observed, subtype or None, aux or None, covariates, stratum)"""
    return Dataset(
        time=[r[0] for r in rows],
        event=[r[1] for r in rows],
        subtype_observed=[r[2] for r in rows],
        subtype=[r[3] if r[3] is not None else NO_SUBTYPE for r in rows],
        aux=[r[4] if r[4] is not None else NO_AUX for r in rows],
        covariates=np.array([r[5] for r in rows], dtype=float),
        stratum=[r[6] if len(r) > 6 else 0 for r in rows],
        n_subtypes=n_subtypes,
        covariate_names=names,
    )


SMALL_ROWS = [
    (2.0, True, True, 1, 0, (0.5, 1.0)),
    (3.0, True, False, None, 1, (-1.0, 0.0)),
    (3.0, True, True, 2, 1, (0.2, 1.0)),
    (4.5, False, False, None, None, (1.5, 0.0)),
    (5.0, True, True, 2, 0, (-0.3, 1.0)),
    (6.0, True, False, None, 0, (0.8, 0.0)),
    (7.5, True, True, 1, 1, (0.1, 1.0)),
    (8.0, False, False, None, None, (-0.6, 0.0)),
    (9.0, True, True, 2, 1, (1.1, 0.0)),
    (10.0, True, False, None, 1, (-0.4, 1.0)),
]


@pytest.fixture
def small_data():
    return make_dataset(SMALL_ROWS)


@pytest.fixture
def stratified_data():
    rows = [row + (i % 2,) for i, row in enumerate(SMALL_ROWS)]
    return make_dataset(rows)


def random_tiny_dataset(rng: np.random.Generator, n=None) -> Dataset:
    """n <= 8 subjects, two covariates, ties on a 0.5 grid, at least one observed event of each subtype"""
    n = n or int(rng.integers(6, 9))
    time = np.round(rng.uniform(0.5, 6.0, n) * 2) / 2
    event = rng.random(n) < 0.8
    observed = event & (rng.random(n) < 0.6)
    subtype = rng.integers(1, 3, n)
    # Guarantee usable events for every estimator
    event[:2] = True
    observed[:2] = True
    subtype[:2] = (1, 2)
    aux = rng.integers(0, 2, n)
    return Dataset(
        time=time,
        event=event,
        subtype_observed=observed,
        subtype=np.where(observed, subtype, NO_SUBTYPE),
        aux=np.where(event, aux, NO_AUX),
        covariates=rng.normal(size=(n, 2)),
        stratum=np.zeros(n, dtype=int),
        n_subtypes=2,
        covariate_names=("x1", "x2"),
    )


@pytest.fixture
def tiny_scenario():
    return Scenario(name="tiny", n=400, replications=3, seed=11, estimators=("cca", "lq2", "ly", "gr"))


@pytest.fixture
def always_scenario():
    return Scenario(name="always", n=600, replications=2, seed=5, mechanism={'kind': 'always'},
                    cca_drop_rows=False)
