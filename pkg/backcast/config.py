"""
Run configuration.

Values come from settings.BACKCAST, then an optional JSON config file, then
command-line flags, the later overriding the earlier.
"""

from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Optional

from django.conf import settings

from fleet import units
from fleet.exceptions import FixtureError
from fleet.io import format_errors

from .serializers import CONFIG_SCHEMA_VERSION, RunConfigSerializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    fixtures_dir: Path
    params_file: Optional[Path]
    start_year: int
    end_year: int
    out_dir: Path
    workers: int
    tol_emissions_gt: float
    tol_grad: float
    max_outer_iterations: int
    max_inner_iterations: int
    initial_incentive: float
    ic_amount: float

    @property
    def tol_emissions(self):
        """Emissions tolerance in tonnes."""
        return units.gt_to_tonnes(self.tol_emissions_gt)

    @property
    def model_params_path(self):
        return self.params_file or self.fixtures_dir / 'model_params.json'

    def solver_options(self):
        return {
            'tol_emissions': self.tol_emissions,
            'tol_grad': self.tol_grad,
            'max_outer': self.max_outer_iterations,
            'max_inner': self.max_inner_iterations,
            'initial_incentive': self.initial_incentive,
        }


def _defaults():
    backcast = settings.BACKCAST
    return {
        'schema_version': CONFIG_SCHEMA_VERSION,
        'fixtures_dir': str(backcast['FIXTURES_DIR']),
        'params_file': None,
        'start_year': backcast['START_YEAR'],
        'end_year': backcast['END_YEAR'],
        'out_dir': str(backcast['OUT_DIR']),
        'workers': backcast['WORKERS'],
        'tol_emissions_gt': backcast['TOL_EMISSIONS_GT'],
        'tol_grad': backcast['TOL_GRAD'],
        'max_outer_iterations': backcast['MAX_OUTER_ITERATIONS'],
        'max_inner_iterations': backcast['MAX_INNER_ITERATIONS'],
        'initial_incentive': backcast['INITIAL_INCENTIVE'],
        'ic_amount': backcast['IC_AMOUNT'],
    }


def _read_config_file(path):
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise FixtureError(path, None, 'config file not found')
    except json.JSONDecodeError as exc:
        raise FixtureError(path, exc.lineno, f'invalid JSON ({exc.msg})')
    if not isinstance(payload, dict):
        raise FixtureError(path, 1, 'config must be a JSON object')
    if 'schema_version' not in payload:
        raise FixtureError(path, None, 'schema_version is required')
    return payload


def load_run_config(config_path=None, **overrides):
    """Build a RunConfig; overrides with value None are ignored."""
    values = _defaults()
    if config_path:
        payload = _read_config_file(config_path)
        base_dir = Path(config_path).resolve().parent
        unknown = sorted(set(payload) - set(values))
        if unknown:
            raise FixtureError(config_path, None, f'unknown key(s) {", ".join(unknown)}')
        # Relative paths in a config file are relative to the file
        for key in ('fixtures_dir', 'params_file', 'out_dir'):
            if payload.get(key):
                payload[key] = str(base_dir / payload[key])
        values.update(payload)
    values.update({key: value for key, value in overrides.items() if value is not None})

    serializer = RunConfigSerializer(data=values)
    if not serializer.is_valid():
        raise FixtureError(config_path or 'settings.BACKCAST', None, format_errors(serializer.errors))
    data = serializer.validated_data

    config = RunConfig(
        fixtures_dir=Path(data['fixtures_dir']),
        params_file=Path(data['params_file']) if data.get('params_file') else None,
        start_year=data['start_year'],
        end_year=data['end_year'],
        out_dir=Path(data['out_dir']),
        workers=data['workers'],
        tol_emissions_gt=data['tol_emissions_gt'],
        tol_grad=data['tol_grad'],
        max_outer_iterations=data['max_outer_iterations'],
        max_inner_iterations=data['max_inner_iterations'],
        initial_incentive=data['initial_incentive'],
        ic_amount=data['ic_amount'],
    )
    logger.debug('Run configuration: %s', config)
    return config
