"""
Scenario runs: reference policies, single-target backcasts and Pareto sweeps.

Results are written as CSV tables (6 significant digits) with a JSON
summary per run.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
from typing import Optional

import pandas as pd

from fleet import units
from fleet.dynamics import simulate
from fleet.exceptions import BackcastError, DataError
from fleet.io import (
    format_errors,
    load_exogenous,
    load_initial_fleet,
    load_model_params,
    write_frame,
    write_json,
)
from fleet.types import ELECTRIC, PolicyTrajectory

from .ocp import OcpProblem, solve
from .reduced import ReducedParams, shoot_nu0
from .serializers import (
    REFERENCE_KINDS,
    FrontierPointSerializer,
    ScenarioSpecSerializer,
    ScenarioSummarySerializer,
)
from .sweep import ScenarioInputs, frontier_is_monotone, solve_target

logger = logging.getLogger(__name__)

METHODS = ('full', 'reduced')
FRONTIER_COLUMNS = ['target_gt', 'cum_emissions_gt', 'budget_geur', 'nu', 'status']


@dataclass(frozen=True)
class ScenarioSpec:
    """
    A run request. kind is I0, IC (constant `amount` €), IP, BI, optimal
    (cap `target_gt`) or pareto (caps `targets_gt`). An optimal run with
    `reference_amount` also reports its saving against IC at that amount.
    """
    kind: str
    amount: float = 0.0
    target_gt: Optional[float] = None
    targets_gt: tuple = ()
    reference_amount: Optional[float] = None


@dataclass
class RunOutcome:
    summary: dict
    files: list = field(default_factory=list)
    result: object = None
    frontier: Optional[list] = None


def load_inputs(cfg):
    """Load parameters, exogenous series and the initial fleet named by a RunConfig."""
    params = load_model_params(cfg.model_params_path)
    exo = load_exogenous(cfg.fixtures_dir, cfg.start_year, cfg.end_year, params)
    initial = load_initial_fleet(cfg.fixtures_dir / 'initial_fleet.csv', cfg.start_year, params.age_classes)
    logger.info(
        'Loaded fixtures from %s: %d age classes, %.6g M vehicles in %d',
        cfg.fixtures_dir, params.age_classes, initial.total / 1e6, initial.year,
    )
    return ScenarioInputs(initial, exo, params, cfg.end_year)


def simulate_reference(kind, inputs, amount=0.0):
    """ScenarioResult of a reference policy: I0, IC(amount), IP or BI."""
    years = inputs.years
    thermal_ban = False
    if kind == 'I0':
        policy = PolicyTrajectory.zero(years)
    elif kind == 'IC':
        policy = PolicyTrajectory.constant(years, amount)
    elif kind == 'IP':
        policy = PolicyTrajectory.full_price(years, inputs.exo)
    elif kind == 'BI':
        # All sales electric from the first controlled year
        policy = PolicyTrajectory.zero(years)
        thermal_ban = True
    else:
        raise BackcastError(f'unknown reference scenario {kind!r}')
    return simulate(inputs.initial, policy, inputs.exo, inputs.params, thermal_ban=thermal_ban, label=kind)


def summarize(label, result, **extra):
    summary = {
        'scenario': label,
        'cum_emissions_gt': result.cum_emissions_gt,
        'budget_geur': result.budget_geur,
        'ev_stock_final_millions': float(result.stock_by_type()[-1, ELECTRIC]) / 1e6,
    }
    summary.update(extra)
    return dict(ScenarioSummarySerializer(summary).data)


def _write(cfg, label, result, summary):
    return [
        write_frame(result.to_frame(), cfg.out_dir / f'{label}.csv'),
        write_json(summary, cfg.out_dir / f'{label}_summary.json'),
    ]


def backcast(inputs, target_gt, cfg, method='full'):
    """
    Cost-minimal incentive for a cap on ℰ(T). Returns the solver report and
    the full-fleet ScenarioResult under the solved policy.
    """
    if method == 'reduced':
        rp = ReducedParams.from_fleet(inputs.initial, inputs.exo, inputs.params, target_gt, inputs.end_year)
        report = shoot_nu0(rp, tolerance=cfg.tol_emissions)
    elif method == 'full':
        problem = OcpProblem(
            inputs.initial, inputs.exo, inputs.params, units.gt_to_tonnes(target_gt), inputs.end_year,
        )
        report = solve(problem, **cfg.solver_options())
    else:
        raise BackcastError(f'method must be one of {", ".join(METHODS)}')
    result = simulate(inputs.initial, report.policy, inputs.exo, inputs.params, label='optimal')
    if method == 'reduced' and model_mismatch(result, target_gt, cfg):
        logger.warning(
            'Reduced-model policy gives %.6g Gt and %.6g GEUR on the full fleet against a %.6g Gt cap',
            result.cum_emissions_gt, result.budget_geur, target_gt,
        )
    return report, result


def model_mismatch(result, target_gt, cfg):
    """Full-fleet emissions miss the cap by more than the emissions tolerance."""
    return abs(result.final_cum_emissions - units.gt_to_tonnes(target_gt)) > cfg.tol_emissions


def pareto_sweep(inputs, targets_gt, cfg):
    """
    One solve per target, concurrently up to cfg.workers processes. The
    frontier comes back ordered by target, loosest first.
    """
    options = cfg.solver_options()
    targets = sorted({float(t) for t in targets_gt}, reverse=True)
    if cfg.workers > 1 and len(targets) > 1:
        count = len(targets)
        with ProcessPoolExecutor(max_workers=min(cfg.workers, count)) as pool:
            points = list(pool.map(solve_target, [inputs] * count, targets, [options] * count))
    else:
        points = [solve_target(inputs, target, options) for target in targets]

    for point in points:
        if point.status != 'ok':
            logger.warning('Pareto target %.6g Gt: %s', point.target_gt, point.status)
    if not frontier_is_monotone(points):
        logger.warning('Pareto frontier is not strictly monotone')
    return points


def frontier_frame(points):
    rows = [FrontierPointSerializer(point).data for point in points]
    return pd.DataFrame(rows, columns=FRONTIER_COLUMNS)


def validate_spec(spec):
    data = {'kind': spec.kind, 'amount': spec.amount}
    if spec.target_gt is not None:
        data['target_gt'] = spec.target_gt
    if spec.targets_gt:
        data['targets_gt'] = list(spec.targets_gt)
    serializer = ScenarioSpecSerializer(data=data)
    if not serializer.is_valid():
        raise DataError(f'invalid scenario: {format_errors(serializer.errors)}')
    return serializer.validated_data


def run_scenario(spec, cfg, inputs=None, method='full'):
    """Run one scenario and write its files under cfg.out_dir."""
    validate_spec(spec)
    inputs = inputs or load_inputs(cfg)

    if spec.kind in REFERENCE_KINDS:
        result = simulate_reference(spec.kind, inputs, spec.amount)
        summary = summarize(spec.kind, result)
        return RunOutcome(summary, _write(cfg, spec.kind, result, summary), result)

    if spec.kind == 'optimal':
        report, result = backcast(inputs, spec.target_gt, cfg, method)
        extra = {'target_gt': spec.target_gt}
        if method == 'full':
            extra.update(
                nu=report.nu,
                iterations=report.iterations,
                max_stationarity=report.max_stationarity,
                converged=report.converged,
            )
        else:
            extra.update(
                nu=report.nu0,
                iterations=report.iterations,
                reduced_cum_emissions_gt=report.cum_emissions_gt,
                reduced_budget_geur=report.budget_geur,
                model_mismatch=model_mismatch(result, spec.target_gt, cfg),
            )
        if spec.reference_amount:
            reference = simulate_reference('IC', inputs, spec.reference_amount)
            extra['reference_budget_geur'] = reference.budget_geur
            extra['saving_percent'] = 100.0 * (1.0 - result.budget_geur / reference.budget_geur)
        summary = summarize('optimal', result, **extra)
        return RunOutcome(summary, _write(cfg, 'optimal', result, summary), result)

    if spec.kind == 'pareto':
        points = pareto_sweep(inputs, spec.targets_gt, cfg)
        path = write_frame(frontier_frame(points), cfg.out_dir / 'pareto_frontier.csv')
        summary = {
            'scenario': 'pareto',
            'points': len(points),
            'solved': sum(point.status == 'ok' for point in points),
            'monotone': frontier_is_monotone(points),
        }
        return RunOutcome(summary, [path], frontier=points)
