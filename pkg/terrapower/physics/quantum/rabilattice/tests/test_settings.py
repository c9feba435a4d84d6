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

"""Tests for the plugin settings and their validators."""
import unittest

from armi import settings as armiSettings

from terrapower.physics.quantum.rabilattice import settings
from terrapower.physics.quantum.rabilattice.plugin import RabiLatticePlugin


class _Inspector:
    """Just enough of an inspector to build the queries."""

    NO_ACTION = None

    def __init__(self, cs):
        self.cs = cs


def _triggered(cs):
    return [q.statement for q in settings.defineValidators(_Inspector(cs)) if q.condition()]


class TestDefineSettings(unittest.TestCase):
    def test_names(self):
        names = [s.name for s in RabiLatticePlugin.defineSettings()]
        self.assertEqual(len(names), len(set(names)))
        self.assertTrue(all(name.startswith("rabi") for name in names))
        self.assertIn(settings.CONF_SWEEP_AXIS, names)

    def test_defaults(self):
        cs = armiSettings.Settings()
        self.assertEqual(cs[settings.CONF_MODEL_TIER], "ClosedForm")
        self.assertEqual(cs[settings.CONF_DECAY], [0.2857])
        self.assertEqual(cs[settings.CONF_FOCK_CUTOFF], 40)


class TestValidators(unittest.TestCase):
    def setUp(self):
        self.cs = armiSettings.Settings().modified(
            newSettings={settings.CONF_SWEEP_GRID: [0.1, 0.2]}
        )

    def test_defaultsPass(self):
        self.assertEqual(_triggered(self.cs), [])

    def test_missingGrid(self):
        cs = self.cs.modified(newSettings={settings.CONF_SWEEP_GRID: []})
        statements = _triggered(cs)
        self.assertEqual(len(statements), 1)
        self.assertIn("No sweep grid", statements[0])

    def test_decayCount(self):
        cs = self.cs.modified(
            newSettings={
                settings.CONF_DECAY: [0.1, 0.2, 0.3],
                settings.CONF_NUM_SITES: 2,
                settings.CONF_MODEL_TIER: "Lyapunov",
            }
        )
        self.assertEqual(len(_triggered(cs)), 1)

    def test_closedFormLimits(self):
        cs = self.cs.modified(
            newSettings={settings.CONF_DECAY: [0.1, 0.2, 0.3], settings.CONF_NUM_SITES: 3}
        )
        self.assertEqual(len(_triggered(cs)), 2)

    def test_fullRabiFrequencyRatio(self):
        cs = self.cs.modified(newSettings={settings.CONF_MODEL_TIER: "FullRabi"})
        self.assertEqual(_triggered(cs), [])
        cs = cs.modified(newSettings={settings.CONF_SPIN_FREQUENCY: 100.0})
        self.assertEqual(len(_triggered(cs)), 1)

    def test_missingTemplate(self):
        cs = self.cs.modified(newSettings={settings.CONF_PLOT_TEMPLATE_PATH: "no/such/file.txt"})
        self.assertIn("does not exist", _triggered(cs)[0])


if __name__ == "__main__":
    unittest.main()
