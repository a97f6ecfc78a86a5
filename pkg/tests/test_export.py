import unittest
from unittest.mock import patch
import io
import json
import os
import sys
import tempfile

import numpy as np

# Add the project root to the Python path to allow importing dunkl_oscillator
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

from dunkl_oscillator import export


class TestFormatting(unittest.TestCase):

    def test_round_trip_digits(self):
        self.assertEqual(export.format_float(0.1), '0.10000000000000001')
        self.assertEqual(float(export.format_float(np.pi)), np.pi)
        self.assertEqual(export.format_float(2.0), '2')
        self.assertEqual(export.format_float(float('nan')), 'nan')
        self.assertEqual(export.format_float(None), '')

    def test_integers_stay_integers(self):
        with patch('sys.stdout', new_callable=io.StringIO) as out:
            export.write_csv(['i', 'x'], [(np.int64(3), np.float64(0.5)), (4, 'label')])
        self.assertEqual(out.getvalue(), 'i,x\n3,0.5\n4,label\n')


class TestWriters(unittest.TestCase):

    def test_csv_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'table.csv')
            export.write_csv(['k', 'c_k'], export.coeff_rows([1.0, 0.25]), path)
            with open(path) as f:
                self.assertEqual(f.read(), 'k,c_k\n0,1\n1,0.25\n')

    def test_json_is_strict(self):
        """Non-finite values become null and numpy types are converted."""
        payload = {'a': np.array([1.0, np.inf]), 'b': np.float64(np.nan), 'c': np.int32(7), 'd': (1, 2)}
        with patch('sys.stdout', new_callable=io.StringIO) as out:
            export.write_json(payload)
        decoded = json.loads(out.getvalue())
        self.assertEqual(decoded, {'a': [1.0, None], 'b': None, 'c': 7, 'd': [1, 2]})

    def test_json_key_order_is_stable(self):
        with patch('sys.stdout', new_callable=io.StringIO) as out:
            export.write_json({'z': 1, 'a': 2})
        self.assertLess(out.getvalue().index('"a"'), out.getvalue().index('"z"'))

    def test_table_payload(self):
        payload = export.table_payload(['x', 'y'], [(1, 2.0), (3, 4.0)])
        self.assertEqual(payload, {'x': [1, 3], 'y': [2.0, 4.0]})


if __name__ == '__main__':
    unittest.main()
