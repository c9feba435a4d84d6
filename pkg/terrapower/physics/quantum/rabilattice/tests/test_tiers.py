# Copyright 2024 TerraPower, LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Tests for the point evaluators and their factory."""
import unittest

from numpy import testing

from terrapower.physics.quantum.rabilattice import tiers
from terrapower.physics.quantum.rabilattice.errors import ConfigurationError
from terrapower.physics.quantum.rabilattice.params import ModelParams
from terrapower.physics.quantum.rabilattice.rabiFactory import RabiFactory, rabiFactory
from terrapower.physics.quantum.rabilattice.sweep import SweepOptions

POINT = ModelParams.fromDimensionless(0.6, 0.2857, 0.38, chi=0.3)


class TestOutputColumns(unittest.TestCase):
    def test_groups(self):
        self.assertEqual(
            tiers.outputColumns(["means", "sum_qp"], 1),
            ["x_mean", "p_mean", "sum_qp", "sql_bound", "beats_sql"],
        )
        self.assertEqual(len(tiers.outputColumns(["means"], 3)), 6)

    def test_unknownGroup(self):
        with self.assertRaises(ConfigurationError):
            tiers.outputColumns(["entropy"], 1)


class TestEvaluators(unittest.TestCase):
    def setUp(self):
        self.options = SweepOptions("tiers")

    def test_decomposition(self):
        values = tiers.ClosedFormEvaluator(self.options).evaluate(POINT, ["decomposition"])
        self.assertEqual(sorted(values), ["alpha", "delta", "n_th", "phi", "r"])
        self.assertGreater(values["r"], 0.0)

    def test_closedFormAgainstLyapunov(self):
        outputs = ["means", "qfim", "crb", "crb_ratio"]
        closed = tiers.ClosedFormEvaluator(self.options).evaluate(POINT, outputs)
        lyapunov = tiers.LyapunovEvaluator(self.options).evaluate(POINT, outputs)
        self.assertEqual(sorted(closed), sorted(lyapunov))
        for column, value in closed.items():
            testing.assert_allclose(lyapunov[column], value, rtol=1e-5, atol=1e-9)

    def test_undrivenQfim(self):
        values = tiers.ClosedFormEvaluator(self.options).evaluate(
            POINT.withChanges(F=0.0), ["crb", "sum_qp"]
        )
        self.assertIsNone(values["dF"])
        self.assertIsNotNone(values["sum_qp"])

    def test_closedFormRejectsLongChains(self):
        chain = POINT.withChanges(nSites=3)
        with self.assertRaises(ConfigurationError):
            tiers.ClosedFormEvaluator(self.options).evaluate(chain, ["means"])
        values = tiers.LyapunovEvaluator(self.options).evaluate(chain, ["means"])
        self.assertEqual(len(values), 6)

    def test_fullRabiWeakCoupling(self):
        self.options.fockCutoff = 10
        p = ModelParams.fromDimensionless(0.3, 0.5, 0.3, chi=0.6)
        exact = tiers.FullRabiEvaluator(self.options).evaluate(p, ["means"])
        closed = tiers.ClosedFormEvaluator(self.options).evaluate(p, ["means"])
        for column in ("x_mean", "p_mean"):
            testing.assert_allclose(exact[column], closed[column], rtol=0.05, atol=5e-3)


class TestRabiFactory(unittest.TestCase):
    def test_defaults(self):
        self.assertEqual(rabiFactory.evaluatorTiers(), ["ClosedForm", "FullRabi", "Lyapunov"])

    def test_unknownNames(self):
        factory = RabiFactory()
        with self.assertRaises(ConfigurationError):
            factory.makeEvaluator("Exact", SweepOptions("tiers"))
        with self.assertRaises(ConfigurationError):
            factory.makeWriter("xlsx", [], None, None)

    def test_registrationWins(self):
        class FasterClosedForm(tiers.ClosedFormEvaluator):
            pass

        factory = RabiFactory()
        factory.registerEvaluator(tiers.CLOSED_FORM, FasterClosedForm)
        evaluator = factory.makeEvaluator(tiers.CLOSED_FORM, SweepOptions("tiers"))
        self.assertIsInstance(evaluator, FasterClosedForm)


if __name__ == "__main__":
    unittest.main()
