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

"""Tests for the lattice parameters and their critical structure."""
import math
import unittest

import numpy as np

from terrapower.physics.quantum.rabilattice import metrology
from terrapower.physics.quantum.rabilattice import params
from terrapower.physics.quantum.rabilattice.errors import (
    ConfigurationError,
    CriticalDivergence,
    NonUniformDecayError,
)
from terrapower.physics.quantum.rabilattice.params import DimensionlessParams, PhaseRegion


class TestModelParams(unittest.TestCase):
    def test_create(self):
        p = params.ModelParams.create(g=3.0, F=0.5, chi=1.0, gamma=0.2, nSites=3)
        self.assertEqual(p.gamma, (0.2, 0.2, 0.2))
        self.assertTrue(p.isUniformDecay)
        self.assertEqual(p.uniformDecay, 0.2)

    def test_invalidFields(self):
        with self.assertRaises(ConfigurationError):
            params.ModelParams.create(omega=-1.0)
        with self.assertRaises(ConfigurationError):
            params.ModelParams.create(nSites=0)
        with self.assertRaises(ConfigurationError):
            params.ModelParams.create(F=-0.1)
        with self.assertRaises(ConfigurationError):
            params.ModelParams.create(gamma=[0.1, 0.2, 0.3], nSites=2)
        with self.assertRaises(ConfigurationError):
            params.ModelParams.create(gamma=-0.1)

    def test_nonUniformDecay(self):
        p = params.ModelParams.create(gamma=[0.1, 0.2], nSites=2)
        self.assertFalse(p.isUniformDecay)
        with self.assertRaises(NonUniformDecayError):
            p.uniformDecay  # pylint: disable=pointless-statement
        with self.assertRaises(NonUniformDecayError):
            params.deriveDimensionless(p)

    def test_phaseIsReduced(self):
        p = params.ModelParams.create(chi=1.5 * math.pi)
        self.assertAlmostEqual(p.chi, -0.5 * math.pi)
        self.assertAlmostEqual(params.reduceAngle(-math.pi), math.pi)

    def test_dimensionlessRoundTrip(self):
        p = params.ModelParams.fromDimensionless(0.9, 0.2857, 0.38, chi=0.4, kappaT=-0.2, nSites=2)
        self.assertAlmostEqual(p.Omega, 250.0)
        d = params.deriveDimensionless(p)
        self.assertAlmostEqual(d.lam, 0.9)
        self.assertAlmostEqual(d.gammaT, 0.2857)
        self.assertAlmostEqual(d.FT, 0.38)
        self.assertAlmostEqual(d.kappaT, -0.2)
        self.assertAlmostEqual(d.eta, 4e-3)

    def test_withChangesRevalidates(self):
        p = params.ModelParams.create(F=1.0)
        self.assertEqual(p.withChanges(F=2.0).F, 2.0)
        with self.assertRaises(ConfigurationError):
            p.withChanges(F=-2.0)


class TestCriticalStructure(unittest.TestCase):
    def test_singleSite(self):
        structure = params.criticalStructure(DimensionlessParams(0.5, 0.2857, 0.38))
        self.assertAlmostEqual(structure.lambdaC, 1.04, places=4)
        self.assertAlmostEqual(structure.kappaMin, -1.0 + 0.2857**2)

    def test_criticalHoppings(self):
        structure = params.criticalStructure(DimensionlessParams(0.59, 0.16, 0.13))
        self.assertAlmostEqual(structure.kappaPlus, -0.7574, places=4)
        self.assertAlmostEqual(structure.kappaMinus, -0.8945, places=4)
        self.assertAlmostEqual(structure.kappaMin, -0.9744, places=4)

    def test_criticalHoppingIdentity(self):
        """(1 + kappa)(lambda_+^2 - lambda^2) factors over the critical hoppings."""
        for lam, gammaT in ((0.59, 0.16), (0.9, 0.2857), (1.3, 0.5)):
            for kappaT in np.linspace(-0.95, 0.9, 38):
                structure = params.criticalStructure(DimensionlessParams(lam, gammaT, 0.13, kappaT))
                self.assertIsNotNone(structure.kappaPlus)
                lhs = (1.0 + kappaT) * (structure.lambdaPlus**2 - lam * lam)
                rhs = (structure.kappaPlus - kappaT) * (structure.kappaMinus - kappaT)
                self.assertLess(abs(lhs - rhs), 1e-12)

    def test_noRealCriticalHopping(self):
        structure = params.criticalStructure(DimensionlessParams(0.3, 0.16, 0.13))
        self.assertIsNone(structure.kappaPlus)
        self.assertIsNone(structure.kappaMinus)

    def test_hoppingCoupling(self):
        structure = params.criticalStructure(DimensionlessParams(0.0, 0.16, 0.13, -0.45))
        self.assertAlmostEqual(structure.lambdaPlus**2, 0.596545, places=5)
        self.assertTrue(structure.hoppingEstimable)

        beyond = params.criticalStructure(DimensionlessParams(0.0, 0.16, 0.13, -1.2))
        self.assertIsNone(beyond.lambdaPlus)
        self.assertIsNone(beyond.chiOptHoppingCritical)
        self.assertFalse(beyond.hoppingEstimable)

    def test_optimalPhaseMinimizesProjection(self):
        lam, gammaT = 0.95, 0.2857
        chi = params.optimalPhase(lam, gammaT)
        lam2 = lam * lam
        projection = (lam2 - 2.0) * math.cos(2.0 * chi) + 2.0 * gammaT * math.sin(2.0 * chi)
        self.assertAlmostEqual(projection, -math.hypot(lam2 - 2.0, 2.0 * gammaT))
        self.assertGreater(chi, -0.5 * math.pi)
        self.assertLessEqual(chi, 0.5 * math.pi)

    def test_optimalPhaseAgainstGridScan(self):
        d = DimensionlessParams(0.95, 0.2857, 0.38)
        chiOpt = params.criticalStructure(d).chiOpt
        lam2 = d.lam * d.lam
        self.assertLess(abs(math.tan(2.0 * chiOpt) * (lam2 - 2.0) - 2.0 * d.gammaT), 1e-12)

        grid = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 10_000, endpoint=False)
        variances = [metrology.qfimSingleClosed(d, chi).fimInv[0, 0] for chi in grid]
        best = grid[int(np.argmin(variances))]
        # distance on the circle of period pi
        offset = abs(params.reduceAngle(2.0 * (best - chiOpt))) / 2.0
        self.assertLessEqual(offset, grid[1] - grid[0])
        optimum = metrology.qfimSingleClosed(d, chiOpt).fimInv[0, 0]
        self.assertLessEqual(optimum, min(variances) + 1e-12)

    def test_companionPhase(self):
        structure = params.criticalStructure(DimensionlessParams(0.8, 0.3, 0.2))
        self.assertAlmostEqual(
            structure.chiOptCompanion, params.reduceAngle(structure.chiOpt + 0.5 * math.pi)
        )


class TestPhaseRegion(unittest.TestCase):
    def test_regions(self):
        lambdaC = math.sqrt(1.0 + 0.2857**2)
        below = DimensionlessParams(0.9 * lambdaC, 0.2857, 0.38)
        self.assertIs(params.phaseRegion(below), PhaseRegion.NORMAL)
        self.assertIs(params.phaseRegion(below._replace(lam=lambdaC)), PhaseRegion.CRITICAL)
        self.assertIs(
            params.phaseRegion(below._replace(lam=1.1 * lambdaC)), PhaseRegion.SUPERRADIANT
        )

    def test_hoppingLowersCriticalCoupling(self):
        d = DimensionlessParams(0.8, 0.16, 0.13, -0.45)
        self.assertIs(params.phaseRegion(d), PhaseRegion.NORMAL)
        self.assertIs(params.phaseRegion(d, hopping=True), PhaseRegion.SUPERRADIANT)
        self.assertAlmostEqual(
            params.criticalCoupling(d._replace(kappaT=0.0), hopping=True),
            params.criticalCoupling(d),
        )

    def test_requireNormal(self):
        with self.assertRaises(CriticalDivergence):
            params.requireNormal(DimensionlessParams(1.2, 0.2, 0.3))
        params.requireNormal(DimensionlessParams(0.5, 0.2, 0.3))


if __name__ == "__main__":
    unittest.main()
