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

"""Tests for the figure presets."""
import os
import unittest

import numpy as np

from armi.utils.directoryChangers import TemporaryDirectoryChanger

from terrapower.physics.quantum.rabilattice import figures
from terrapower.physics.quantum.rabilattice.errors import ConfigurationError, ValidationFailure
from terrapower.physics.quantum.rabilattice.params import DimensionlessParams, criticalStructure
from terrapower.physics.quantum.rabilattice.sweep import SweepOptions


def _serialOptions(label):
    options = SweepOptions(label)
    options.workers = 1
    return options


class TestGrids(unittest.TestCase):
    def test_hoppingGrid(self):
        grid = figures.hoppingGrid(-0.8136, 50)
        self.assertEqual(len(grid), 50)
        self.assertEqual(grid[0], 0.0)
        self.assertAlmostEqual(grid[-1], -0.8136 + figures.CRITICAL_MARGIN)
        self.assertAlmostEqual(figures.hoppingGrid(None, 5)[-1], -0.99)

    def test_hoppingRatioSegments(self):
        d = DimensionlessParams(figures.FIG4_COUPLING, figures.FIG4_DECAY, figures.FIG4_FORCE)
        structure = criticalStructure(d)
        self.assertAlmostEqual(structure.kappaPlus, -0.7574, places=3)
        self.assertAlmostEqual(structure.kappaMinus, -0.8945, places=3)
        segments = figures.hoppingRatioSegments(structure.kappaPlus, structure.kappaMinus, 40)
        self.assertEqual(sorted(segments), ["lower", "upper"])
        self.assertGreater(min(segments["upper"]), structure.kappaPlus)
        self.assertLess(max(segments["lower"]), structure.kappaMinus)
        self.assertEqual(len(segments["lower"]), 20)

    def test_noCriticalHopping(self):
        segments = figures.hoppingRatioSegments(None, None, 10)
        self.assertEqual(list(segments), ["all"])


class TestCheckOverlay(unittest.TestCase):
    def test_withinBand(self):
        closed = np.array([1.0, -2.0, np.nan])
        exact = np.array([1.05, -2.0, 0.3])
        self.assertAlmostEqual(figures.checkOverlay(closed, exact), 0.025)

    def test_outsideBand(self):
        with self.assertRaises(ValidationFailure):
            figures.checkOverlay(np.array([1.0, 2.0]), np.array([1.0, 2.3]))

    def test_noCommonPoints(self):
        with self.assertRaises(ValidationFailure):
            figures.checkOverlay(np.array([1.0, np.nan]), np.array([np.nan, 2.0]))


class TestMakeFigure(unittest.TestCase):
    def test_unknownFigure(self):
        with self.assertRaises(ConfigurationError):
            figures.makeFigure(7)

    def test_figure2(self):
        with TemporaryDirectoryChanger():
            written = figures.makeFigure(2, "fig2", _serialOptions("fig2"), exact=False)
            self.assertEqual(len(written), 4)
            self.assertTrue(all(os.path.exists(path) for path in written))
            with open(os.path.join("fig2", "fig2.gp")) as script:
                text = script.read()
        self.assertIn("fig2_data_a.csv", text)
        self.assertIn("fig2_data_b_opt.csv", text)

    def test_figure4(self):
        with TemporaryDirectoryChanger():
            written = figures.makeFigure(4, ".", _serialOptions("fig4"), exact=False)
            names = sorted(os.path.basename(path) for path in written)
        self.assertEqual(
            names,
            [
                "fig4.gp",
                "fig4_data_a_lower.csv",
                "fig4_data_a_upper.csv",
                "fig4_data_b_kappa-0.45.csv",
                "fig4_data_b_kappa0.csv",
            ],
        )


if __name__ == "__main__":
    unittest.main()
