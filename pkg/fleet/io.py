"""
Reading fixture files and writing result tables.

CSV files are read with pandas and every row is validated by a serializer;
the first invalid row is reported with its file and 1-based line number
(the header is line 1).
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import units
from .choice import bass_curve
from .exceptions import DataError, FixtureError
from .serializers import (
    CostRowSerializer,
    FleetRowSerializer,
    FractionYearValueRowSerializer,
    ModelParamsSerializer,
    NonNegativeYearValueRowSerializer,
    PositiveYearValueRowSerializer,
    SurvivalRowSerializer,
)
from .types import ExogenousSeries, FleetState, ModelParams, VehicleType

logger = logging.getLogger(__name__)

# Adoption generated from the Bass coefficients starts at the first year of the fit window
BASS_FIRST_YEAR = 2018

CSV_FLOAT_FORMAT = '%.6g'


def format_errors(errors):
    if isinstance(errors, dict):
        return '; '.join(f'{key}: {format_errors(value)}' for key, value in errors.items())
    if isinstance(errors, list):
        return ' '.join(format_errors(item) for item in errors)
    return str(errors)


def _first_row_error(errors):
    """
    (0-based row, errors) of the first failing row. Older DRF releases
    return one entry per row, newer ones a dict keyed by row index.
    """
    if isinstance(errors, dict):
        rows = sorted((int(key), value) for key, value in errors.items() if str(key).isdigit())
        if not rows:
            return None, errors
    else:
        rows = list(enumerate(errors))
    for position, row_errors in rows:
        if row_errors:
            return position, row_errors
    return None, errors


def read_table(path, serializer_class):
    """Read a CSV file and validate each row, returning a DataFrame of typed values."""
    path = Path(path)
    if not path.is_file():
        raise FixtureError(path, None, 'file not found')
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FixtureError(path, None, f'unreadable CSV ({exc})')

    expected = list(serializer_class().fields)
    missing = [name for name in expected if name not in frame.columns]
    if missing:
        raise FixtureError(path, 1, f'missing column(s) {", ".join(missing)}')
    if frame.empty:
        raise FixtureError(path, None, 'no data rows')

    serializer = serializer_class(data=frame[expected].to_dict('records'), many=True)
    if not serializer.is_valid():
        position, errors = _first_row_error(serializer.errors)
        raise FixtureError(path, None if position is None else position + 2, format_errors(errors))
    return pd.DataFrame(list(serializer.validated_data), columns=expected)


def _indexed(frame, key, path):
    duplicated = frame[key].duplicated()
    if duplicated.any():
        position = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise FixtureError(path, position + 2, f'duplicate {key} {frame[key].iloc[position]}')
    return frame.set_index(key).sort_index()


def _covering(frame, first, last, path):
    wanted = range(first, last + 1)
    absent = [year for year in wanted if year not in frame.index]
    if absent:
        raise FixtureError(path, None, f'no rows for year(s) {absent[0]}..{absent[-1]}')
    return frame.loc[first:last]


def load_year_series(path, first, last, serializer_class=NonNegativeYearValueRowSerializer):
    """Values of a `year,value` file for every year of [first, last]."""
    frame = _indexed(read_table(path, serializer_class), 'year', path)
    return _covering(frame, first, last, path)['value'].to_numpy(dtype=float)


def load_cost_table(path, first, last):
    """(n, 2) array of thermal and electric costs."""
    frame = _indexed(read_table(path, CostRowSerializer), 'year', path)
    return _covering(frame, first, last, path)[['thermal', 'electric']].to_numpy(dtype=float)


def load_survival(path):
    frame = _indexed(read_table(path, SurvivalRowSerializer), 'age', path)
    ages = frame.index.to_numpy()
    if ages[0] != 1 or np.any(np.diff(ages) != 1):
        raise FixtureError(path, None, 'survival rates must cover ages 1..A without gaps')
    return frame['value'].to_numpy(dtype=float)


def load_emission_factors(path):
    """(model years, g/km) of new thermal cars."""
    frame = _indexed(read_table(path, NonNegativeYearValueRowSerializer), 'year', path)
    years = frame.index.to_numpy()
    if np.any(np.diff(years) != 1):
        raise FixtureError(path, None, 'model years must be contiguous')
    return years, frame['value'].to_numpy(dtype=float)


def load_model_params(path):
    """Read a model_params.json file, resolving referenced CSVs next to it."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise FixtureError(path, None, 'file not found')
    except json.JSONDecodeError as exc:
        raise FixtureError(path, exc.lineno, f'invalid JSON ({exc.msg})')

    serializer = ModelParamsSerializer(data=payload)
    if not serializer.is_valid():
        raise FixtureError(path, None, format_errors(serializer.errors))
    data = serializer.validated_data

    if 'survival' in data:
        survival = np.asarray(data['survival'], dtype=float)
    else:
        survival = load_survival(path.parent / data['survival_file'])
    if 'emission_factor_new' in data:
        table = dict(sorted(data['emission_factor_new'].items()))
        factor_years = np.fromiter(table.keys(), dtype=int)
        factor_values = np.fromiter(table.values(), dtype=float)
    else:
        factor_years, factor_values = load_emission_factors(path.parent / data['emission_factor_file'])

    logit, bass = data['logit'], data['bass']
    try:
        return ModelParams(
            survival=survival,
            emission_factor_years=factor_years,
            emission_factor_values=factor_values,
            p_purchase=logit['purchase'],
            p_operating=logit['operating'],
            p_infrastructure=logit['infrastructure'],
            scale=logit['scale'],
            bass_p=bass['p'],
            bass_q=bass['q'],
        )
    except DataError as exc:
        raise FixtureError(path, None, str(exc))


def load_exogenous(fixtures_dir, first, last, params):
    """
    Exogenous series over [first, last] from a fixtures directory.

    Demand is read in million vehicle-km. Without adoption.csv the adoption
    coefficient is generated from the Bass coefficients of `params`.
    """
    fixtures_dir = Path(fixtures_dir)
    adoption_path = fixtures_dir / 'adoption.csv'
    if adoption_path.is_file():
        adoption = load_year_series(adoption_path, first, last)
    else:
        if first < BASS_FIRST_YEAR:
            raise FixtureError(adoption_path, None, f'Bass adoption starts in {BASS_FIRST_YEAR}')
        adoption = bass_curve(params.bass_p, params.bass_q, last - BASS_FIRST_YEAR + 1)[first - BASS_FIRST_YEAR:]
        logger.info('Adoption generated from Bass p=%s q=%s', params.bass_p, params.bass_q)

    demand = load_year_series(fixtures_dir / 'demand.csv', first, last, PositiveYearValueRowSerializer)
    return ExogenousSeries(
        years=np.arange(first, last + 1),
        demand=units.mvkm_to_vkm(demand),
        mileage=load_year_series(fixtures_dir / 'mileage.csv', first, last, PositiveYearValueRowSerializer),
        purchase_cost=load_cost_table(fixtures_dir / 'purchase_cost.csv', first, last),
        operating_cost=load_cost_table(fixtures_dir / 'operating_cost.csv', first, last),
        infrastructure=load_year_series(
            fixtures_dir / 'infrastructure.csv', first, last, FractionYearValueRowSerializer,
        ),
        adoption=adoption,
    )


def load_initial_fleet(path, year, age_classes):
    """FleetState of `year` from a `type,age,count` file; absent rows are zero."""
    frame = read_table(path, FleetRowSerializer)
    keys = frame[['type', 'age']].apply(tuple, axis=1)
    duplicated = keys.duplicated()
    if duplicated.any():
        position = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise FixtureError(path, position + 2, 'duplicate type and age')
    too_old = frame['age'] > age_classes
    if too_old.any():
        position = int(np.flatnonzero(too_old.to_numpy())[0])
        raise FixtureError(path, position + 2, f'age beyond the absorbing class {age_classes}')

    stocks = np.zeros((2, age_classes + 1))
    for label, age, count in zip(frame['type'], frame['age'], frame['count']):
        stocks[VehicleType.from_label(label).index, age] = count
    return FleetState(year, stocks, 0.0)


def write_frame(frame, path):
    """Write a table as CSV with 6 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return path


def write_json(payload, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path
