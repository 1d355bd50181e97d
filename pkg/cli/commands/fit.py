"""
Fit Command
Fit one estimator to a CSV dataset and write the coefficient table with its JSON twin
"""

import math
import os
import sys
import time
from typing import List, Optional, Sequence

from pydantic import ValidationError

from core.errors import ConfigurationError
from core.logger import logger, context_logger
from inference.config import ESTIMATOR_CONFIGS
from inference.estimators import estimation_service
from inference.types import FitOptions, ModelSpecification
from inference.wald import coefficient_table
from model.baseline import BaselineRatioSpec
from model.missingness import MissingnessKind, MissingnessModel
from ..atomic import atomic_write_json, atomic_write_text
from ..csv_io import CsvSchema, load_schema, read_dataset
from ..exit_codes import EXIT_NUMERICAL, EXIT_OK
from ..tables import render_fit_table

MISSINGNESS_TERMS = ('intercept', 'x', 'y', 'q')
DEFAULT_TERMS = {
    'ly': ('intercept', 'y', 'x'),
    'gr': ('intercept', 'x'),
}


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="Fit an estimator to a CSV dataset")
    parser.add_argument("--data", required=True, help="CSV data file")
    parser.add_argument("--schema", help="Schema file (key-value or JSON); default column names otherwise")
    parser.add_argument("--estimator", required=True, choices=sorted(ESTIMATOR_CONFIGS))
    parser.add_argument("--alpha", default="power", help="power | piecewise:c1,c2,...")
    parser.add_argument("--strata-col", help="Column holding the stratum code")
    parser.add_argument("--aux-levels", type=int, default=2, help="Number of auxiliary covariate levels")
    parser.add_argument("--miss-terms", help=f"Missingness model terms, subset of {','.join(MISSINGNESS_TERMS)}")
    parser.add_argument("--miss-time-cuts", help="Comma-separated c for I{t > c} terms in the missingness model")
    parser.add_argument("--cca-drop-rows", action="store_true",
                        help="CCA: drop missing-subtype events entirely instead of keeping them in risk sets")
    parser.add_argument("--subtype-names", help="Comma-separated labels for subtypes 1..K")
    parser.add_argument("--level", type=float, default=0.95, help="Confidence level")
    parser.add_argument("--gr-jacobian", choices=("analytic", "numeric"), default="analytic")
    parser.add_argument("--out", default=".", help="Directory for fit_table.txt and fit.json")
    parser.set_defaults(handler=cmd_fit)


def _split(text: Optional[str]) -> List[str]:
    return [part.strip() for part in text.split(',') if part.strip()] if text else []


def parse_alpha(text: str, n_subtypes: int, num_strata: int = 1, stratum_codes=()) -> BaselineRatioSpec:
    """'power' or 'piecewise:c1,c2,...'"""
    form, _, cuts = text.partition(':')
    form = form.strip().lower()
    try:
        if form == 'power':
            if cuts.strip():
                raise ConfigurationError("the power-law alpha takes no cut points", field="--alpha")
            return BaselineRatioSpec.power_law(n_subtypes=n_subtypes, num_strata=num_strata,
                                               stratum_codes=stratum_codes)
        if form == 'piecewise':
            values = [float(c) for c in _split(cuts)]
            return BaselineRatioSpec.piecewise(values, n_subtypes=n_subtypes, num_strata=num_strata,
                                               stratum_codes=stratum_codes)
    except ValueError as e:
        raise ConfigurationError(f"Invalid --alpha '{text}'", str(e), field="--alpha")
    raise ConfigurationError(f"Unknown alpha form '{form}'", "use power or piecewise:c1,c2,...", field="--alpha")


def build_missingness(estimator: str, terms_text: Optional[str], cuts_text: Optional[str],
                      p: int, n_subtypes: int) -> Optional[MissingnessModel]:
    """The missingness model named by --miss-terms / --miss-time-cuts, or None for the estimator default"""
    if estimator not in DEFAULT_TERMS:
        if terms_text or cuts_text:
            logger.warning(f"Missingness options are ignored by {ESTIMATOR_CONFIGS[estimator]['display_name']}")
        return None
    if not terms_text and not cuts_text:
        return None

    terms = _split(terms_text) or list(DEFAULT_TERMS[estimator])
    unknown = [t for t in terms if t not in MISSINGNESS_TERMS]
    if unknown:
        raise ConfigurationError(f"Unknown missingness terms: {', '.join(unknown)}", field="--miss-terms")
    try:
        cuts = [float(c) for c in _split(cuts_text)]
    except ValueError as e:
        raise ConfigurationError("Invalid --miss-time-cuts", str(e), field="--miss-time-cuts")
    x_columns = tuple(range(p)) if 'x' in terms else ()

    try:
        if estimator == 'gr':
            if 'y' in terms or 'q' in terms:
                raise ConfigurationError("GR needs a missingness model in (t, x) only", field="--miss-terms")
            return MissingnessModel.logistic_tx(x_columns=x_columns, time_cuts=cuts, intercept='intercept' in terms)
        if 'q' in terms:
            raise ConfigurationError("LY's missingness model cannot use the auxiliary covariate",
                                     field="--miss-terms")
        return MissingnessModel(kind=MissingnessKind.LOGISTIC_TXY, intercept='intercept' in terms,
                                y_terms='y' in terms, n_subtypes=n_subtypes, x_columns=x_columns,
                                time_cuts=tuple(cuts))
    except ValidationError as e:
        raise ConfigurationError("Invalid missingness model", str(e), field="--miss-terms")


def _plain(value):
    """JSON-safe copy: NaN and infinities become null"""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, 'item'):
        return _plain(value.item())
    return value


def cmd_fit(args) -> int:
    start_time = time.time()
    schema = load_schema(args.schema) if args.schema else CsvSchema()
    schema = schema.with_stratum(args.strata_col)
    data = read_dataset(args.data, schema)
    context_logger.set_context(data=os.path.basename(args.data), estimator=args.estimator)

    n_subtypes = data.n_subtypes
    subtype_names: Sequence[str] = _split(args.subtype_names)
    missingness = build_missingness(args.estimator, args.miss_terms, args.miss_time_cuts, data.p, n_subtypes)
    try:
        model = ModelSpecification(
            alpha=parse_alpha(args.alpha, n_subtypes, data.num_strata, data.stratum_codes),
            aux_levels=args.aux_levels,
            ly_missingness=missingness if args.estimator == 'ly' else None,
            gr_missingness=missingness if args.estimator == 'gr' else None,
            cca_drop_rows=args.cca_drop_rows,
        )
        options = FitOptions(jacobian=args.gr_jacobian)
    except ValidationError as e:
        raise ConfigurationError("Invalid model options", str(e))

    fit = estimation_service.fit(args.estimator, data, model, options)
    if not fit.converged:
        print(f"{fit.estimator} did not converge after {fit.iterations} iterations: {fit.message}", file=sys.stderr)
        print(f"  gradient sup-norm / n = {fit.gradient_norm:.3e}", file=sys.stderr)
        context_logger.clear_context()
        return EXIT_NUMERICAL

    coefficients = coefficient_table(fit, args.level)
    rendered = render_fit_table(coefficients, fit.estimator, subtype_names, args.level)
    print(rendered, end="")

    os.makedirs(args.out, exist_ok=True)
    atomic_write_text(os.path.join(args.out, "fit_table.txt"), rendered)
    payload = {
        'data': args.data,
        'subjects': data.n,
        'events': data.n_events,
        'missing_fraction': data.missing_fraction,
        'alpha': args.alpha,
        'strata': list(data.stratum_codes) if args.strata_col else [],
        'subtype_names': list(subtype_names),
        'confidence_level': args.level,
        **fit.as_dict(),
        'coefficients': coefficients.to_dict(orient='records'),
    }
    atomic_write_json(_plain(payload), os.path.join(args.out, "fit.json"))
    context_logger.log_performance("cmd_fit", (time.time() - start_time) * 1000)
    context_logger.clear_context()
    return EXIT_OK
