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

"""Tests for the command-line entry points."""
import os
import unittest

from numpy import testing

from armi import settings as armiSettings
from armi.utils.directoryChangers import TemporaryDirectoryChanger

from terrapower.physics.quantum.rabilattice import entryPoints
from terrapower.physics.quantum.rabilattice import settings
from terrapower.physics.quantum.rabilattice.errors import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_FAILURE,
    EXIT_OK,
)
from terrapower.physics.quantum.rabilattice.masterEquation import Moments

POINT = ["--lam", "0.5", "--gamma", "0.2857", "--force", "0.38", "--chi", "0.3"]


def _invoke(command, args):
    entry = command()
    entry.parse(args)
    return entry.invoke()


class TestPointCommands(unittest.TestCase):
    def test_decompose(self):
        self.assertEqual(_invoke(entryPoints.DecomposeCommand, POINT), EXIT_OK)

    def test_qfim(self):
        self.assertEqual(_invoke(entryPoints.QfimCommand, POINT + ["--nu", "4"]), EXIT_OK)
        pair = POINT + ["--sites", "2", "--kappa", "-0.2"]
        self.assertEqual(_invoke(entryPoints.QfimCommand, pair), EXIT_OK)

    def test_qfimBeyondCritical(self):
        args = ["--lam", "1.2", "--gamma", "0.2857", "--force", "0.38"]
        self.assertEqual(_invoke(entryPoints.QfimCommand, args), EXIT_NUMERICAL_FAILURE)

    def test_qfimTooManySites(self):
        args = POINT + ["--sites", "3"]
        self.assertEqual(_invoke(entryPoints.QfimCommand, args), EXIT_CONFIG_ERROR)

    def test_steadyDump(self):
        with TemporaryDirectoryChanger():
            code = _invoke(entryPoints.SteadyCommand, POINT + ["--dump", "moments.bin"])
            moments = Moments.load("moments.bin")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(moments.nModes, 1)
        self.assertEqual(len(moments.spinZ), 0)

    def test_steadyEffectiveModel(self):
        args = ["--lam", "0.3", "--gamma", "0.5", "--force", "0.3", "--tier", "EffectiveQuadratic"]
        self.assertEqual(_invoke(entryPoints.SteadyCommand, args + ["--cutoff", "16"]), EXIT_OK)


class TestSweepCommand(unittest.TestCase):
    def test_sweepFromSettingsFile(self):
        with TemporaryDirectoryChanger():
            cs = armiSettings.Settings().modified(
                caseTitle="entrySweep",
                newSettings={
                    settings.CONF_SWEEP_AXIS: "lambda",
                    settings.CONF_SWEEP_GRID: [0.2, 0.5, 0.8],
                    settings.CONF_SWEEP_OUTPUTS: ["means", "crb"],
                    settings.CONF_NUM_WORKERS: 1,
                },
            )
            cs.writeToYamlFile("entrySweep.yaml")
            code = _invoke(entryPoints.SweepCommand, ["--config", "entrySweep.yaml", "--plot"])
            self.assertEqual(code, EXIT_OK)
            with open("entrySweep_sweep.csv") as table:
                lines = [line for line in table.read().splitlines() if not line.startswith("#")]
            self.assertTrue(os.path.exists("entrySweep_sweep.gp"))

        self.assertEqual(lines[0], "lambda,x_mean,p_mean,dF,dchi")
        self.assertEqual(len(lines), 4)
        testing.assert_allclose([float(line.split(",")[0]) for line in lines[1:]], [0.2, 0.5, 0.8])

    def test_missingConfig(self):
        with TemporaryDirectoryChanger():
            code = _invoke(entryPoints.SweepCommand, ["--config", "absent.yaml"])
        self.assertEqual(code, EXIT_CONFIG_ERROR)


class TestValidateCommand(unittest.TestCase):
    def test_singleCheck(self):
        code = _invoke(entryPoints.ValidateCommand, ["--only", "SQL beating"])
        self.assertEqual(code, EXIT_OK)


if __name__ == "__main__":
    unittest.main()
