"""
Full-order optimal incentive.

Minimizes the total budget I(T) subject to ℰ(T) <= Ē and 0 <= u(t) <= C_2^P(t)
on the age-structured fleet. Gradients come from a backward adjoint sweep.
The terminal cap is handled by bisection on its multiplier ν (€ per tonne);
for each ν the Lagrangian I(T) + ν ℰ(T) is minimized by projected gradient
descent with Barzilai-Borwein steps and Armijo backtracking.
"""

from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from fleet import units
from fleet.choice import thermal_share, thermal_share_slope
from fleet.dynamics import StepTable, age_stocks, run_table
from fleet.exceptions import ConvergenceError, DataError, InfeasibleTargetError
from fleet.types import ELECTRIC, THERMAL, PolicyTrajectory

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_GT = 1e-4
DEFAULT_TOLERANCE_GRAD = 1e-6
DEFAULT_MAX_OUTER = 80
DEFAULT_MAX_INNER = 400
DEFAULT_INITIAL_INCENTIVE = 5000.0  # €
INITIAL_MULTIPLIER = 100.0  # € per tonne CO2

ARMIJO = 1e-4
MAX_BACKTRACKS = 60
FIRST_STEP = 0.05
STEP_RANGE = (1e-10, 1e10)


@dataclass(frozen=True)
class OcpProblem:
    """Initial fleet, inputs, parameters, horizon end and target Ē in tonnes."""
    initial: object
    exo: object
    params: object
    target: float
    end_year: int

    def __post_init__(self):
        if self.end_year <= self.initial.year:
            raise DataError('the horizon must end after the initial year')
        if self.target <= 0:
            raise DataError('the emissions target must be positive')
        if self.initial.age_classes != self.params.age_classes:
            raise DataError('initial fleet and parameters disagree on age classes')

    @property
    def start_year(self):
        return self.initial.year

    @property
    def years(self):
        """Controlled years t0+1..T."""
        return np.arange(self.start_year + 1, self.end_year + 1)

    @property
    def upper(self):
        return self.exo.electric_price(self.years)

    @property
    def target_gt(self):
        return units.tonnes_to_gt(self.target)

    def with_target(self, target_gt):
        return replace(self, target=units.gt_to_tonnes(target_gt))

    def step_table(self):
        return StepTable.build(self.start_year, self.end_year, self.exo, self.params)


@dataclass(frozen=True)
class AdjointField:
    """λ_va(t) with shape (n, 2, A+1) over t0..T, and the constant ν."""
    years: np.ndarray
    lam: np.ndarray
    nu: float

    def at(self, year):
        return self.lam[int(year) - int(self.years[0])]


@dataclass(frozen=True)
class SolveReport:
    policy: PolicyTrajectory
    total_budget: float
    cum_emissions: float
    target: float
    nu: float
    iterations: int
    outer_iterations: int
    max_stationarity: float
    constraint_residual: float
    converged: bool = True

    @property
    def budget_geur(self):
        return units.eur_to_geur(self.total_budget)

    @property
    def cum_emissions_gt(self):
        return units.tonnes_to_gt(self.cum_emissions)

    @property
    def constraint_residual_gt(self):
        return units.tonnes_to_gt(self.constraint_residual)


def hamiltonian(year, state_prev, incentive, adjoint, exo, params):
    """
    H(t) written out term by term: budget, new-sales adjoints, ageing
    adjoints, then ν times cumulative emissions carried plus emitted.
    """
    if year != state_prev.year + 1:
        raise DataError(f'state of {state_prev.year} does not precede {year}')
    table = StepTable.build(state_prev.year, year, exo, params)
    k = 1
    lam = adjoint.at(year)
    nu = adjoint.nu
    stocks = np.asarray(state_prev.stocks)
    eta = params.survival
    age_classes = params.age_classes
    mileage = table.mileage[k]
    factors = table.emission_factors[k]

    share = float(thermal_share(table.factors_at(k), incentive))
    sales = table.vehicles_required[k] - age_stocks(stocks, eta).sum()

    value = incentive * (1.0 - share) * sales
    value += lam[THERMAL, 0] * share * sales + lam[ELECTRIC, 0] * (1.0 - share) * sales
    for v in (THERMAL, ELECTRIC):
        for a in range(1, age_classes):
            value += lam[v, a] * eta[a - 1] * stocks[v, a - 1]
        value += lam[v, age_classes] * eta[-1] * (stocks[v, age_classes - 1] + stocks[v, age_classes])

    emitted = mileage * factors[0] * share * sales
    for a in range(1, age_classes):
        emitted += mileage * factors[a] * eta[a - 1] * stocks[THERMAL, a - 1]
    emitted += mileage * factors[age_classes] * eta[-1] * (
        stocks[THERMAL, age_classes - 1] + stocks[THERMAL, age_classes]
    )
    return value + nu * (state_prev.cum_emissions + units.grams_to_tonnes(emitted))


def _successor_classes(age_classes):
    """Class reached one year later from each class 0..A."""
    return np.minimum(np.arange(age_classes + 1) + 1, age_classes)


def _sweep(table, trajectory, nu):
    n, _, width = trajectory.stocks.shape
    age_classes = width - 1
    successor = _successor_classes(age_classes)
    eta = table.survival[successor - 1]
    tonnes_per_vehicle = units.grams_to_tonnes(table.mileage[:, None] * table.emission_factors)

    lam = np.zeros((n, 2, width))
    for k in range(n - 1, 0, -1):
        share = trajectory.thermal_share[k]
        u = trajectory.incentive[k]
        # ∂H(t)/∂N(t): every surviving car displaces one sale
        bracket = (
            u * (1.0 - share)
            + lam[k, THERMAL, 0] * share
            + lam[k, ELECTRIC, 0] * (1.0 - share)
            + nu * tonnes_per_vehicle[k, 0] * share
        )
        lam[k - 1, THERMAL] = eta * (-bracket + lam[k, THERMAL, successor] + nu * tonnes_per_vehicle[k, successor])
        lam[k - 1, ELECTRIC] = eta * (-bracket + lam[k, ELECTRIC, successor])
    return lam


def adjoint_sweep(problem, policy, trajectory, nu):
    """Backward recursion λ_va(t-1) = ∂H(t)/∂S_va(t-1) from λ(T) = 0, ν constant."""
    if trajectory.years[0] != problem.start_year or trajectory.years[-1] != problem.end_year:
        raise DataError('trajectory does not span the problem horizon')
    if not np.array_equal(trajectory.incentive[1:], policy.values):
        raise DataError('trajectory was not simulated under this policy')
    lam = _sweep(problem.step_table(), trajectory, nu)
    return AdjointField(trajectory.years, lam, float(nu))


def _gradient(table, trajectory, lam, nu):
    share = trajectory.thermal_share[1:]
    sales = trajectory.sales[1:].sum(axis=1)
    u = trajectory.incentive[1:]
    slope = thermal_share_slope(share, table.factors.log_r[1:])
    tonnes_new = units.grams_to_tonnes(table.mileage[1:] * table.emission_factors[1:, 0])
    shadow = nu * tonnes_new + lam[1:, THERMAL, 0] - lam[1:, ELECTRIC, 0]
    return sales * ((1.0 - share) + slope * (shadow - u))


def gradient_u(problem, policy, trajectory, adjoint):
    """∂H(t)/∂u(t) = N[(1 - P_1) + ∂P_1/∂u (νMε_10 + λ_10 - λ_20 - u)] for t0+1..T."""
    return _gradient(problem.step_table(), trajectory, adjoint.lam, adjoint.nu)


def lagrangian(problem, policy, nu):
    """(I(T) + ν ℰ(T) in €, trajectory)."""
    trajectory = run_table(problem.step_table(), np.asarray(problem.initial.stocks), policy.values)
    return trajectory.total_budget + nu * trajectory.final_cum_emissions, trajectory


def achievable_range(problem):
    """(ℰ(T) under u = C_2^P, ℰ(T) under u = 0) in tonnes."""
    table = problem.step_table()
    stocks = np.asarray(problem.initial.stocks)
    upper = problem.upper
    floor = run_table(table, stocks, upper).final_cum_emissions
    ceiling = run_table(table, stocks, np.zeros_like(upper)).final_cum_emissions
    return floor, ceiling


@dataclass
class _Inner:
    incentives: np.ndarray
    trajectory: object
    gradient: np.ndarray
    iterations: int
    stalled: bool


class _Lagrangian:
    """Evaluations of I(T) + ν ℰ(T) in the scaled control x = u / C_2^P."""

    def __init__(self, problem):
        self.table = problem.step_table()
        self.stocks = np.asarray(problem.initial.stocks)
        self.upper = problem.upper

    def value(self, x, nu):
        trajectory = run_table(self.table, self.stocks, x * self.upper)
        return trajectory.total_budget + nu * trajectory.final_cum_emissions, trajectory

    def gradient(self, trajectory, nu):
        """dL/dx."""
        lam = _sweep(self.table, trajectory, nu)
        return _gradient(self.table, trajectory, lam, nu) * self.upper


def _projected_step(x, direction):
    return np.linalg.norm(np.clip(x - direction, 0.0, 1.0) - x)


def _minimize(objective, nu, start, tol_grad, max_iterations):
    x = np.clip(start / objective.upper, 0.0, 1.0)
    value, trajectory = objective.value(x, nu)
    gradient = objective.gradient(trajectory, nu)
    scale = max(float(np.abs(gradient).max()), np.finfo(float).tiny)
    initial_norm = _projected_step(x, gradient / scale)
    norm = initial_norm
    step = FIRST_STEP / scale
    iterations = 0
    stalled = False

    while norm > tol_grad * initial_norm and iterations < max_iterations:
        iterations += 1
        alpha = step
        for _ in range(MAX_BACKTRACKS):
            candidate = np.clip(x - alpha * gradient, 0.0, 1.0)
            candidate_value, candidate_trajectory = objective.value(candidate, nu)
            if candidate_value <= value + ARMIJO * np.dot(gradient, candidate - x):
                break
            alpha *= 0.5
        else:
            stalled = True
            logger.warning('Line search stalled at nu=%.6g after %d iterations', nu, iterations)
            break

        candidate_gradient = objective.gradient(candidate_trajectory, nu)
        s = candidate - x
        y = candidate_gradient - gradient
        sy = float(np.dot(s, y))
        step = float(np.dot(s, s)) / sy if sy > 0 else 2.0 * alpha
        step = min(max(step, STEP_RANGE[0] / scale), STEP_RANGE[1] / scale)

        x, value, trajectory, gradient = candidate, candidate_value, candidate_trajectory, candidate_gradient
        norm = _projected_step(x, gradient / scale)
        logger.debug(
            'nu=%.6g iteration %d: L=%.9g projected step %.3e', nu, iterations, value, norm / initial_norm,
        )

    if not stalled and norm > tol_grad * initial_norm:
        logger.info('nu=%.6g: iteration cap %d reached at projected step %.3e', nu, max_iterations, norm / initial_norm)

    return _Inner(x * objective.upper, trajectory, gradient / objective.upper, iterations, stalled)


def _stationarity(inner, upper):
    """Largest |∂H/∂u| / N over components strictly inside the bounds."""
    u = inner.incentives
    sales = inner.trajectory.sales[1:].sum(axis=1)
    inside = (u > 1e-9 * upper) & (u < (1.0 - 1e-9) * upper) & (sales > 0)
    if not inside.any():
        return 0.0
    return float(np.max(np.abs(inner.gradient[inside]) / sales[inside]))


def _report(problem, inner, nu, iterations, outer, converged=True):
    trajectory = inner.trajectory
    return SolveReport(
        policy=PolicyTrajectory(problem.years, np.clip(inner.incentives, 0.0, problem.upper)),
        total_budget=trajectory.total_budget,
        cum_emissions=trajectory.final_cum_emissions,
        target=problem.target,
        nu=nu,
        iterations=iterations,
        outer_iterations=outer,
        max_stationarity=_stationarity(inner, problem.upper),
        constraint_residual=trajectory.final_cum_emissions - problem.target,
        converged=converged,
    )


def _fixed(objective, incentives, nu):
    trajectory = run_table(objective.table, objective.stocks, incentives)
    gradient = _gradient(objective.table, trajectory, _sweep(objective.table, trajectory, nu), nu)
    return _Inner(incentives, trajectory, gradient, 0, False)


def solve(problem, tol_emissions=None, tol_grad=DEFAULT_TOLERANCE_GRAD,
          max_outer=DEFAULT_MAX_OUTER, max_inner=DEFAULT_MAX_INNER,
          initial_incentive=DEFAULT_INITIAL_INCENTIVE):
    """
    Cost-minimal incentive meeting ℰ(T) <= Ē.

    tol_emissions is in tonnes. Every inner minimization starts from
    u = initial_incentive (clipped to the bounds).
    """
    tol_emissions = units.gt_to_tonnes(DEFAULT_TOLERANCE_GT) if tol_emissions is None else tol_emissions
    objective = _Lagrangian(problem)
    upper = objective.upper
    zero = np.zeros_like(upper)

    floor, ceiling = achievable_range(problem)
    if problem.target >= ceiling - tol_emissions:
        logger.info('Target %.6g Gt is not binding; no incentive needed', problem.target_gt)
        return _report(problem, _fixed(objective, zero, 0.0), 0.0, 0, 0)
    if problem.target < floor:
        raise InfeasibleTargetError(problem.target_gt, units.tonnes_to_gt(floor), units.tonnes_to_gt(ceiling))
    if problem.target <= floor + tol_emissions:
        logger.info('Target %.6g Gt requires the full-price incentive', problem.target_gt)
        return _report(problem, _fixed(objective, upper.copy(), 0.0), math.inf, 0, 0)

    start = np.full_like(upper, float(initial_incentive))
    iterations = 0
    outer = 0

    def inner_solve(nu):
        nonlocal iterations, outer
        outer += 1
        result = _minimize(objective, nu, start, tol_grad, max_inner)
        iterations += result.iterations
        emitted = result.trajectory.final_cum_emissions
        logger.debug('outer %d: nu=%.6g E(T)=%.9g Gt', outer, nu, units.tonnes_to_gt(emitted))
        return result, emitted

    low, high = 0.0, INITIAL_MULTIPLIER
    best, emitted = inner_solve(high)
    while emitted > problem.target + tol_emissions:
        if outer >= max_outer:
            raise ConvergenceError(
                f'no multiplier up to {high:.6g} EUR/t meets the target',
                constraint_residual_gt=units.tonnes_to_gt(emitted - problem.target),
            )
        low, high = high, 2.0 * high
        best, emitted = inner_solve(high)

    while abs(emitted - problem.target) > tol_emissions:
        if outer >= max_outer:
            raise ConvergenceError(
                f'multiplier bisection did not close after {outer} solves',
                constraint_residual_gt=units.tonnes_to_gt(emitted - problem.target),
                stationarity=_stationarity(best, upper),
            )
        middle = 0.5 * (low + high)
        result, value = inner_solve(middle)
        if value > problem.target + tol_emissions:
            low = middle
        else:
            high, best, emitted = middle, result, value

    report = _report(problem, best, high, iterations, outer, converged=not best.stalled)
    logger.info(
        'Solved target %.6g Gt: I(T)=%.6g GEUR, E(T)=%.6g Gt, nu=%.6g EUR/t, %d outer / %d inner iterations',
        problem.target_gt, report.budget_geur, report.cum_emissions_gt, high, outer, iterations,
    )
    return report
