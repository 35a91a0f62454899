from io import StringIO
import json
from pathlib import Path
import shutil
import tempfile

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from fleet.io import load_model_params, load_survival
from fleet.tests.helpers import FIXTURES_DIR


class CalibrateCommandTests(SimpleTestCase):

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.out = self.tmp / 'calibration'

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def call(self, **options):
        out = StringIO()
        call_command('calibrate', out_dir=str(self.tmp), stdout=out, **options)
        return out.getvalue()

    def test_writes_loadable_parameters(self):
        output = self.call()
        self.assertIn('Calibration completed.', output)

        params = load_model_params(self.out / 'model_params.json')
        self.assertEqual(params.age_classes, 30)
        self.assertEqual(params.scale, 6.75)
        np.testing.assert_allclose(params.survival, load_survival(FIXTURES_DIR / 'survival.csv'), rtol=1e-5)
        self.assertEqual(params.emission_factor_new(1993), 176.0)
        self.assertAlmostEqual(params.emission_factor_new(2030), 96.5)

        payload = json.loads((self.out / 'model_params.json').read_text(encoding='utf-8'))
        self.assertAlmostEqual(payload['mileage_km'], 13500.0, delta=0.03 * 13500.0)
        self.assertGreater(payload['bass']['q'], payload['bass']['p'])

    def test_mileage_history(self):
        self.call()
        lines = (self.out / 'mileage_history.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'year,value')
        self.assertEqual(len(lines), 13)
        self.assertTrue(lines[1].startswith('2011,'))

    def test_default_logit_without_parameter_file(self):
        fixtures = self.tmp / 'fixtures'
        shutil.copytree(FIXTURES_DIR, fixtures, ignore=shutil.ignore_patterns('model_params.json'))
        output = self.call(fixtures_dir=str(fixtures))
        self.assertIn('using default logit weights', output)
        payload = json.loads((self.out / 'model_params.json').read_text(encoding='utf-8'))
        self.assertEqual(payload['logit']['purchase'], -0.3)

    def test_non_consecutive_snapshot_exits_3(self):
        with self.assertRaises(CommandError) as cm:
            self.call(snapshot=[2020, 2022])
        self.assertEqual(cm.exception.returncode, 3)
        self.assertFalse((self.out / 'model_params.json').exists())

    def test_bad_row_exits_3(self):
        fixtures = self.tmp / 'fixtures'
        shutil.copytree(FIXTURES_DIR, fixtures)
        path = fixtures / 'ev_sales_share.csv'
        path.write_text(path.read_text(encoding='utf-8') + '2023,1.5\n', encoding='utf-8')
        with self.assertRaises(CommandError) as cm:
            self.call(fixtures_dir=str(fixtures))
        self.assertEqual(cm.exception.returncode, 3)
        self.assertIn('ev_sales_share.csv:7', str(cm.exception))
