"""
Estimation Service
Routes a named estimator to its objective, parameter layout, starting values and solver
"""

import time
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from core.errors import ConfigurationError, FitError, SubtypeModelError
from core.logger import logger, context_logger
from likelihoods.complete_case import loglik_cca
from likelihoods.dataset import Dataset
from likelihoods.goetghebeur_ryan import gr_system
from likelihoods.informative import loglik_Lstar, loglik_LstarQ2, loglik_LstarY
from model.missingness import MissingnessModel
from model.nu import NuModel
from model.parameters import ParameterLayout, ParameterVector, beta_block
from .config import ESTIMATOR_CONFIGS
from .newton import maximize, solve_gr
from .types import FitOptions, FitResult, ModelSpecification


class EstimationService:
    """Fits CCA, LQ2, LY, GR (and L*) to a Dataset"""

    def __init__(self):
        self.estimator_configs = ESTIMATOR_CONFIGS

    def resolve(self, estimator: str) -> str:
        key = estimator.strip().lower()
        if key not in self.estimator_configs:
            raise ConfigurationError(
                f"Unsupported estimator: {estimator}",
                f"choose from {', '.join(sorted(self.estimator_configs))}",
            )
        return key

    def display_name(self, estimator: str) -> str:
        return self.estimator_configs[self.resolve(estimator)]['display_name']

    def missingness_model(self, estimator: str, data: Dataset, model: ModelSpecification) -> Optional[MissingnessModel]:
        """The fitted missingness model, defaulting to intercept + subtype/covariate terms"""
        config = self.estimator_configs[self.resolve(estimator)]
        attribute = config['missingness']
        if attribute is None:
            return None
        chosen = getattr(model, attribute)
        if chosen is not None:
            return chosen
        all_columns = tuple(range(data.p))
        if attribute == 'ly_missingness':
            return MissingnessModel.logistic_txy(n_subtypes=model.n_subtypes, x_columns=all_columns, intercept=True)
        return MissingnessModel.logistic_tx(x_columns=all_columns, intercept=True)

    def nu_model(self, data: Dataset, model: ModelSpecification) -> NuModel:
        return NuModel(n_subtypes=model.n_subtypes, aux_levels=max(model.aux_levels, data.aux_levels, 2))

    def build_layout(self, estimator: str, data: Dataset, model: ModelSpecification) -> ParameterLayout:
        key = self.resolve(estimator)
        blocks = []
        for block in self.estimator_configs[key]['blocks']:
            if block == 'beta':
                for k in range(1, model.n_subtypes + 1):
                    blocks.append((beta_block(k), [f"{beta_block(k)}:{name}" for name in data.covariate_names]))
            elif block == 'eta':
                blocks.append(("eta", model.alpha.eta_labels()))
            elif block == 'psi':
                blocks.append(("psi", self.nu_model(data, model).psi_labels()))
            elif block == 'gamma':
                miss = self.missingness_model(key, data, model)
                blocks.append(("gamma", [f"gamma:{name}" for name in miss.term_names(data.covariate_names)]))
        return ParameterLayout.build(blocks)

    def initial_values(self, estimator: str, data: Dataset, model: ModelSpecification,
                       layout: ParameterLayout) -> ParameterVector:
        """beta = 0, crude event-ratio power-law scale (exponent 0), log-levels 0, psi = 0, gamma = 0"""
        blocks = {name: np.zeros(size) for name, size in layout.blocks}
        if layout.has("eta"):
            blocks["eta"] = model.alpha.initial_eta(data.observed_event_ratios())
        return ParameterVector.pack(layout, blocks)

    def _check(self, key: str, data: Dataset, model: ModelSpecification) -> None:
        if data.n_subtypes > model.n_subtypes:
            raise ConfigurationError(f"data has subtypes up to {data.n_subtypes}, model has {model.n_subtypes}")
        if data.num_strata > model.alpha.num_strata:
            raise ConfigurationError(f"data has {data.num_strata} strata, model has {model.alpha.num_strata}")
        if self.estimator_configs[key]['requires_aux']:
            data.require_aux_on_events()
        if data.n_events == 0:
            raise FitError("no usable events", "the dataset has no events")

    def objective(self, estimator: str, data: Dataset, model: ModelSpecification,
                  layout: ParameterLayout, jacobian: str = "analytic") -> Callable:
        key = self.resolve(estimator)
        spec = model.alpha
        if key == 'cca':
            subset = data.drop_missing_subtype_rows() if model.cca_drop_rows else data
            return lambda values: loglik_cca(subset, spec, ParameterVector(values, layout))
        if key == 'lq2':
            nu = self.nu_model(data, model)
            return lambda values: loglik_LstarQ2(data, spec, nu, ParameterVector(values, layout))
        if key == 'lstar':
            return lambda values: loglik_Lstar(data, spec, ParameterVector(values, layout))
        miss = self.missingness_model(key, data, model)
        if key == 'ly':
            return lambda values: loglik_LstarY(data, spec, miss, ParameterVector(values, layout))
        return lambda values: gr_system(data, spec, miss, ParameterVector(values, layout), jacobian=jacobian)

    def fit(self, estimator: str, data: Dataset, model: ModelSpecification,
            options: Optional[FitOptions] = None) -> FitResult:
        """
        Fit one estimator

        Args:
            estimator: registry key (cca, lq2, ly, gr, lstar)
            data: the sample
            model: baseline ratio form, auxiliary levels, missingness models
            options: numeric knobs; initial_values may use any block order

        Returns:
            FitResult with sandwich covariance

        Raises:
            ConfigurationError / DataError: the estimator cannot be applied to this data
            FitError: the objective cannot be evaluated at the start, or the model is not identified
        """
        key = self.resolve(estimator)
        config = self.estimator_configs[key]
        options = options or FitOptions()
        try:
            start_time = time.time()
            self._check(key, data, model)

            layout = self.build_layout(key, data, model)
            start = self.initial_values(key, data, model, layout)
            if options.initial_values is not None:
                start = options.initial_values.reordered(layout)
            run_options = options.model_copy(update={'initial_values': None})
            guard = np.concatenate([layout.indices(beta_block(k)) for k in range(1, model.n_subtypes + 1)])
            objective = self.objective(key, data, model, layout, jacobian=options.jacobian)

            context_logger.debug("Starting fit", estimator=config['display_name'], parameters=layout.size,
                                 subjects=data.n, events=data.n_events)
            if config['solver'] == 'root':
                result = solve_gr(objective, start, run_options, guard=guard, estimator=config['display_name'])
            else:
                result = maximize(objective, start, run_options, guard=guard, estimator=config['display_name'])

            duration = (time.time() - start_time) * 1000
            context_logger.log_fit(config['display_name'], result.converged, result.iterations,
                                   gradient_norm=result.gradient_norm, duration=duration,
                                   detail=result.message or None)
            return replace(result, n_subtypes=model.n_subtypes, covariate_names=data.covariate_names)

        except SubtypeModelError:
            raise
        except Exception as e:
            logger.error(f"Unexpected error while fitting {config['display_name']}: {str(e)}")
            raise FitError("Internal estimation error", str(e), "INTERNAL_ERROR")


# Global estimation service instance
estimation_service = EstimationService()
