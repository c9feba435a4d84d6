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

"""Tests for the sweep table and plot-script writers."""
import csv
import os
import unittest

from armi.utils.directoryChangers import TemporaryDirectoryChanger

from terrapower.physics.quantum.rabilattice import writers
from terrapower.physics.quantum.rabilattice.meta import __version__
from terrapower.physics.quantum.rabilattice.params import ModelParams
from terrapower.physics.quantum.rabilattice.sweep import ResultRow, SweepOptions, SweepSpec

SPEC = SweepSpec(
    ModelParams.fromDimensionless(0.5, 0.2857, 0.38), "lambda", (0.1, 1.04), ("crb",)
)
ROWS = [ResultRow(0.1, (0.1 + 0.2, 2.5)), ResultRow(1.04, (None, float("nan")))]


def _readTable(path):
    with open(path, newline="") as stream:
        lines = stream.read().splitlines()
    comments = [line for line in lines if line.startswith("#")]
    table = list(csv.reader(line for line in lines if not line.startswith("#")))
    return comments, table


class TestFormatCell(unittest.TestCase):
    def test_cells(self):
        self.assertEqual(writers.formatCell(None), "")
        self.assertEqual(writers.formatCell(float("inf")), "")
        self.assertEqual(writers.formatCell(0.1 + 0.2), "0.30000000000000004")
        self.assertEqual(float(writers.formatCell(1.0 / 3.0)), 1.0 / 3.0)


class TestCsvSweepWriter(unittest.TestCase):
    def test_write(self):
        with TemporaryDirectoryChanger():
            options = SweepOptions("writerTest")
            options.outputFile = os.path.join("out", "sweep.csv")
            path = writers.writeSweep(ROWS, SPEC, options)
            self.assertEqual(path, options.outputFile)
            comments, table = _readTable(path)

        self.assertEqual(comments[0], f"# rabilattice {__version__}")
        self.assertIn(f"# config_hash: {SPEC.configHash()}", comments)
        self.assertIn("# model_tier: ClosedForm", comments)
        self.assertEqual(table[0], ["lambda", "dF", "dchi"])
        self.assertEqual(table[1], ["0.10000000000000001", "0.30000000000000004", "2.5"])
        self.assertEqual(table[2], ["1.04", "", ""])


class TestPlotScriptWriter(unittest.TestCase):
    def test_render(self):
        options = SweepOptions("writerTest")
        with TemporaryDirectoryChanger():
            options.outputFile = "sweep.csv"
            path = writers.writeSweep(ROWS, SPEC, options, fmt="gnuplot")
            self.assertEqual(path, "sweep.gp")
            with open(path) as script:
                text = script.read()

        self.assertIn('set output "sweep.png"', text)
        self.assertIn('"sweep.csv" using 1:2 with linespoints title "dF"', text)
        self.assertIn('"sweep.csv" using 1:3 with linespoints title "dchi"', text)
        self.assertIn(SPEC.configHash(), text)


class TestFigureScriptWriter(unittest.TestCase):
    def test_panels(self):
        panels = [
            writers.PlotPanel(
                "a",
                "CRB against the phase",
                "chi",
                "dF",
                [writers.PlotSeries(os.path.join("data", "fig_a.csv"), 3, "closed form")],
                logScale=True,
            ),
            writers.PlotPanel(
                "b",
                "Sum bound",
                "lambda",
                "sum",
                [writers.PlotSeries("fig_b.csv", 2, "exact", style="points")],
            ),
        ]
        with TemporaryDirectoryChanger():
            path = writers.FigureScriptWriter("Test figure", panels).write("figure.gp")
            with open(path) as script:
                text = script.read()
        self.assertIn('"fig_a.csv"', text)
        self.assertNotIn(os.path.join("data", "fig_a.csv"), text)
        self.assertIn("figure.png", text)
        self.assertIn("\nset logscale y\n", text)
        self.assertEqual(text.count("unset logscale y"), 1)


if __name__ == "__main__":
    unittest.main()
