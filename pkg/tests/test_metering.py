"""
Test cases for operation counting
"""
import unittest
import numpy as np
from src.config import Config
from src.models.generators import gen_chain_md, gen_example_tree, random_model
from src.models.kinematic_tree import random_configuration
from src.tools.metering import OpCountReport, count_all, count_ops, format_table, normalize_algorithm, reports_frame
from src.utils.errors import SpecError


class TestCountOps(unittest.TestCase):
    """Test cases for count_ops"""

    def setUp(self):
        self.tree, self.cons = gen_example_tree()

    def test_report_fields(self):
        """Reports carry sizes and a consistent total"""
        report = count_ops('pv-osimr', self.tree, self.cons)
        self.assertEqual(report.algorithm, 'pv_osimr')
        self.assertEqual((report.n_b, report.n, report.m, report.d), (6, 11, 18, 5))
        self.assertEqual(report.total, report.mul + report.add_sub + report.div + report.sqrt)
        self.assertGreater(report.total, 0)

    def test_deterministic_across_runs_and_configurations(self):
        """Counts depend on topology only"""
        rng = np.random.default_rng(0)
        for name in Config.ALGORITHMS:
            baseline = count_ops(name, self.tree, self.cons)
            self.assertEqual(count_ops(name, self.tree, self.cons), baseline)
            q = random_configuration(self.tree, rng)
            self.assertEqual(count_ops(name, self.tree, self.cons, q), baseline)

    def test_random_models_deterministic(self):
        """The same seeded model reports the same counts"""
        first = count_all(*random_model(np.random.default_rng(3), 12, 3))
        second = count_all(*random_model(np.random.default_rng(3), 12, 3))
        self.assertEqual(first, second)

    def test_counts_grow_with_size(self):
        """Bigger chains cost more for every algorithm"""
        small = {r.algorithm: r.total for r in count_all(*gen_chain_md(3))}
        large = {r.algorithm: r.total for r in count_all(*gen_chain_md(4))}
        for name in Config.ALGORITHMS:
            self.assertLess(small[name], large[name])

    def test_only_roots_use_square_roots(self):
        """Recursive algorithms need no square roots on revolute chains"""
        for report in count_all(*gen_chain_md(3), ['pv_osim', 'efpa', 'pv_osimr']):
            self.assertEqual(report.sqrt, 0)

    def test_unknown_algorithm(self):
        """Unknown tags raise SpecError"""
        with self.assertRaises(SpecError):
            count_ops('kjr', self.tree, self.cons)
        self.assertEqual(normalize_algorithm(' PV-OSIM '), 'pv_osim')


class TestReports(unittest.TestCase):
    """Test cases for report rendering"""

    def setUp(self):
        self.reports = count_all(*gen_example_tree())

    def test_csv_row_order(self):
        """CSV rows follow the bench schema"""
        row = self.reports[0].to_csv_row('custom', 1)
        self.assertEqual(list(row), Config.CSV_COLUMNS)
        self.assertEqual(row['family'], 'custom')

    def test_frame_and_table(self):
        """One row per algorithm in the frame and the table"""
        frame = reports_frame(self.reports)
        self.assertEqual(list(frame['algorithm']), Config.ALGORITHMS)
        self.assertEqual(list(frame.columns), list(OpCountReport.__dataclass_fields__))
        table = format_table(self.reports)
        for name in Config.ALGORITHMS:
            self.assertIn(name, table)
        self.assertEqual(format_table([]), '(no reports)')


if __name__ == '__main__':
    unittest.main()
