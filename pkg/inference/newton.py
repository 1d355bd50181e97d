"""
Newton-Raphson
Step-halving maximization of a log-likelihood and damped Newton root finding
for stacked estimating equations
"""

import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, lstsq, solve

from core.errors import DomainError, FitError, NonIdentifiedError
from core.logger import context_logger
from likelihoods.types import EstimatingEquations, ObjectiveEvaluation
from model.parameters import ParameterVector
from .sandwich import sandwich_covariance, standard_errors
from .types import FitOptions, FitResult

Objective = Callable[[np.ndarray], ObjectiveEvaluation]
EstimatingSystem = Callable[[np.ndarray], EstimatingEquations]

# Relative slack when comparing objective values across a step
VALUE_SLACK = 1e3 * np.finfo(float).eps

# Largest relative Newton step accepted at convergence
STEP_TOLERANCE = 1e-4


def _solve(matrix: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('error', LinAlgWarning)
            step = solve(matrix, rhs)
    except (LinAlgError, LinAlgWarning, ValueError):
        return None
    return step if np.all(np.isfinite(step)) else None


def newton_direction(hessian: np.ndarray, gradient: np.ndarray, ridge: float) -> np.ndarray:
    """Solve (-H) step = g, adding a growing ridge when -H is singular or the step is not an ascent direction"""
    information = -hessian
    step = _solve(information, gradient)
    if step is not None and gradient @ step > 0:
        return step

    P = gradient.size
    scale = max(1.0, float(np.max(np.abs(np.diag(information))))) if P else 1.0
    penalty = max(ridge, np.finfo(float).eps) * scale
    for _ in range(40):
        step = _solve(information + penalty * np.eye(P), gradient)
        if step is not None and gradient @ step > 0:
            context_logger.debug("Ridge added to Newton system", ridge=f"{penalty:.3e}")
            return step
        penalty *= 10.0
    return gradient / scale


def _safe_call(fn, values):
    """Evaluate a candidate point; domain violations count as a rejected step"""
    try:
        return fn(values)
    except DomainError:
        return None


def _guard_value(values: np.ndarray, guard: Optional[Sequence[int]]) -> float:
    if guard is None or len(guard) == 0:
        return 0.0
    return float(np.max(np.abs(values[np.asarray(guard)])))


def _guard_tripped(values: np.ndarray, guard: Optional[Sequence[int]], bound: float) -> bool:
    return _guard_value(values, guard) > bound


def _covariance(information_hessian, scores, options: FitOptions, converged: bool, information=None):
    """Sandwich covariance; a non-identified model is fatal only for a converged fit"""
    try:
        return sandwich_covariance(information_hessian, scores, options.ridge_on_singular, information)
    except NonIdentifiedError:
        if converged:
            raise
        P = scores.shape[1]
        return np.full((P, P), np.nan)


def maximize(objective: Objective, initial: ParameterVector, options: Optional[FitOptions] = None,
             guard: Optional[Sequence[int]] = None, estimator: str = "objective") -> FitResult:
    """Newton-Raphson with step halving.

    Args:
        objective: values -> ObjectiveEvaluation (value, gradient, Hessian, per-subject scores)
        initial: starting point and layout
        options: numeric knobs; options.initial_values overrides `initial`
        guard: indices checked against options.beta_guard (monotone likelihood)
        estimator: label used in logs and on the result

    Returns:
        FitResult; converged=False (never an exception) when iterations run out,
        step halving fails, the guard trips or the information is singular
        where the gradient vanishes

    Raises:
        FitError: the objective is not finite at the starting point
    """
    options = options or FitOptions()
    start = options.initial_values if options.initial_values is not None else initial
    layout = start.layout
    theta = np.array(start.values, dtype=float)

    current = _safe_call(objective, theta)
    if current is None or current.value is None or not current.is_finite or not np.isfinite(current.value):
        raise FitError("objective is not finite at the initial point", f"estimator={estimator}")

    n = max(current.per_subject_scores.shape[0], 1)
    history = [current.value]
    iterations = 0
    converged = False
    message = ""

    while True:
        gradient_norm = float(np.max(np.abs(current.gradient))) / n if current.gradient.size else 0.0
        step = None
        if gradient_norm < options.gradient_tolerance:
            # A small gradient alone is not enough under separation: the
            # information must be nonsingular and the Newton step must vanish
            if current.gradient.size == 0:
                converged = True
                break
            exact = _solve(-current.hessian, current.gradient)
            if exact is None:
                message = (f"information matrix singular where the gradient vanishes "
                           f"(monotone likelihood or non-identified model, max |beta| = "
                           f"{_guard_value(theta, guard):.3g})")
                context_logger.warning("Singular information at a stationary point", estimator=estimator)
                break
            if np.max(np.abs(exact) / np.maximum(1.0, np.abs(theta))) < STEP_TOLERANCE:
                converged = True
                break
            step = exact
        if iterations >= options.max_iterations:
            message = f"no convergence after {options.max_iterations} iterations"
            break

        if step is None:
            step = newton_direction(current.hessian, current.gradient, options.ridge_on_singular)
        scale = 1.0
        accepted = None
        for _ in range(options.step_halving_max + 1):
            candidate = theta + scale * step
            evaluation = _safe_call(objective, candidate)
            if (evaluation is not None and evaluation.is_finite and np.isfinite(evaluation.value)
                    and evaluation.value >= current.value - VALUE_SLACK * max(1.0, abs(current.value))):
                accepted = (candidate, evaluation)
                break
            scale *= 0.5
        if accepted is None:
            message = "step halving exhausted without increasing the objective"
            break

        theta, current = accepted
        iterations += 1
        history.append(current.value)
        context_logger.debug(f"Newton iteration {iterations}", estimator=estimator,
                             value=f"{current.value:.10g}", step_scale=scale)

        if _guard_tripped(theta, guard, options.beta_guard):
            gradient_norm = float(np.max(np.abs(current.gradient))) / n
            message = (f"monotone likelihood: |beta| exceeded {options.beta_guard:g} "
                       f"(gradient not vanishing, sup-norm/n = {gradient_norm:.3e})")
            context_logger.warning("Monotone likelihood guard tripped", estimator=estimator)
            break

    covariance = _covariance(current.hessian, current.per_subject_scores, options, converged)
    return FitResult(
        estimate=ParameterVector(theta, layout),
        covariance=covariance,
        standard_errors=standard_errors(covariance) if np.all(np.isfinite(covariance)) else np.full(layout.size, np.nan),
        log_likelihood=float(current.value),
        iterations=iterations,
        converged=converged,
        gradient_norm=gradient_norm,
        message=message,
        estimator=estimator,
        history=tuple(history),
        information=-current.hessian,
        per_subject_scores=current.per_subject_scores,
    )


def _root_step(jacobian: np.ndarray, residual: np.ndarray) -> np.ndarray:
    step = _solve(jacobian, -residual)
    if step is not None:
        return step
    solution, *_ = lstsq(jacobian, -residual)
    return solution


def solve_gr(system: EstimatingSystem, initial: ParameterVector, options: Optional[FitOptions] = None,
             guard: Optional[Sequence[int]] = None, estimator: str = "GR") -> FitResult:
    """Damped Newton root finding: theta <- theta - t J^{-1} U with backtracking on ||U||^2"""
    options = options or FitOptions()
    start = options.initial_values if options.initial_values is not None else initial
    layout = start.layout
    theta = np.array(start.values, dtype=float)

    current = _safe_call(system, theta)
    if current is None or not current.is_finite:
        raise FitError("estimating equations are not finite at the initial point", f"estimator={estimator}")

    n = max(current.per_subject_scores.shape[0], 1)
    iterations = 0
    converged = False
    message = ""
    history = [float(current.residual @ current.residual)]

    while True:
        residual_norm = float(np.max(np.abs(current.residual))) / n if current.residual.size else 0.0
        if residual_norm < options.gradient_tolerance:
            converged = True
            break
        if iterations >= options.max_iterations:
            message = f"no convergence after {options.max_iterations} iterations"
            break

        step = _root_step(current.jacobian, current.residual)
        merit = history[-1]
        scale = 1.0
        accepted = None
        for _ in range(options.step_halving_max + 1):
            candidate = theta + scale * step
            evaluation = _safe_call(system, candidate)
            if evaluation is not None and evaluation.is_finite:
                new_merit = float(evaluation.residual @ evaluation.residual)
                if new_merit <= (1.0 - 1e-4 * scale) * merit:
                    accepted = (candidate, evaluation, new_merit)
                    break
            scale *= 0.5
        if accepted is None:
            message = "step halving exhausted without reducing the residual"
            break

        theta, current, merit = accepted
        iterations += 1
        history.append(merit)
        context_logger.debug(f"Root-finding iteration {iterations}", estimator=estimator,
                             residual=f"{np.sqrt(merit):.6e}", step_scale=scale)

        if _guard_tripped(theta, guard, options.beta_guard):
            message = f"monotone likelihood: |beta| exceeded {options.beta_guard:g}"
            context_logger.warning("Monotone likelihood guard tripped", estimator=estimator)
            break

    covariance = _covariance(None, current.per_subject_scores, options, converged, information=-current.jacobian)
    return FitResult(
        estimate=ParameterVector(theta, layout),
        covariance=covariance,
        standard_errors=standard_errors(covariance) if np.all(np.isfinite(covariance)) else np.full(layout.size, np.nan),
        log_likelihood=None,
        iterations=iterations,
        converged=converged,
        gradient_norm=residual_norm,
        message=message,
        estimator=estimator,
        history=tuple(history),
        information=-current.jacobian,
        per_subject_scores=current.per_subject_scores,
    )
