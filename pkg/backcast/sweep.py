"""
Pareto sweep workers.

Kept free of Django imports so worker processes can import it without
configuring settings.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from fleet import units
from fleet.exceptions import ConvergenceError, InfeasibleTargetError

from .ocp import OcpProblem, solve


@dataclass(frozen=True)
class ScenarioInputs:
    """Initial fleet, exogenous series and parameters shared by every run."""
    initial: object
    exo: object
    params: object
    end_year: int

    @property
    def years(self):
        return np.arange(self.initial.year + 1, self.end_year + 1)


@dataclass(frozen=True)
class FrontierPoint:
    target_gt: float
    cum_emissions_gt: Optional[float] = None
    budget_geur: Optional[float] = None
    nu: Optional[float] = None
    status: str = 'ok'

    @property
    def solved(self):
        return self.budget_geur is not None


def solve_target(inputs, target_gt, options):
    """Solve one target; infeasible and unconverged targets become statuses."""
    problem = OcpProblem(
        inputs.initial, inputs.exo, inputs.params, units.gt_to_tonnes(target_gt), inputs.end_year,
    )
    try:
        report = solve(problem, **options)
    except InfeasibleTargetError as exc:
        low, high = exc.achievable
        return FrontierPoint(target_gt, status=f'infeasible: achievable [{low:.6g}, {high:.6g}] Gt')
    except ConvergenceError as exc:
        return FrontierPoint(target_gt, status=f'not converged: {exc}')
    status = 'ok' if report.converged else 'stalled'
    return FrontierPoint(target_gt, report.cum_emissions_gt, report.budget_geur, report.nu, status)


def frontier_is_monotone(points):
    """Budgets strictly decrease as ℰ(T) increases across solved points."""
    solved = sorted((p for p in points if p.solved), key=lambda p: p.cum_emissions_gt)
    budgets = [p.budget_geur for p in solved]
    return all(earlier > later for earlier, later in zip(budgets, budgets[1:]))
