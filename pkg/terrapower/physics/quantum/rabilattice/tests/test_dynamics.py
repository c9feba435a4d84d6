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

"""Tests for the quadratic moment flow."""
import unittest

import numpy as np
from numpy import testing

from terrapower.physics.quantum.rabilattice import dynamics
from terrapower.physics.quantum.rabilattice.errors import ConfigurationError, NonHurwitz
from terrapower.physics.quantum.rabilattice.params import (
    DimensionlessParams,
    ModelParams,
    criticalCoupling,
)


class TestMomentFlow(unittest.TestCase):
    def test_shapes(self):
        d = DimensionlessParams(0.5, 0.3, 0.2, kappaT=-0.3)
        for nSites in (1, 2, 4):
            mf = dynamics.momentFlow(d, nSites, 0.4)
            self.assertEqual(mf.drift.shape, (2 * nSites, 2 * nSites))
            self.assertEqual(mf.pump.shape, (2 * nSites,))
            self.assertEqual(mf.nModes, nSites)
            testing.assert_allclose(mf.diffusion, 0.6 * np.eye(2 * nSites))

    def test_noSites(self):
        with self.assertRaises(ConfigurationError):
            dynamics.momentFlow(DimensionlessParams(0.5, 0.3, 0.2), 0, 0.0)

    def test_hoppingCouplesNeighboursOnly(self):
        mf = dynamics.momentFlow(DimensionlessParams(0.5, 0.3, 0.2, kappaT=0.25), 3, 0.0)
        self.assertEqual(mf.drift[0, 3], 0.25)
        self.assertEqual(mf.drift[1, 2], -0.25)
        self.assertEqual(mf.drift[0, 5], 0.0)

    def test_fromModelMatchesReduced(self):
        p = ModelParams.fromDimensionless(0.6, 0.25, 0.3, chi=1.1, kappaT=-0.2, nSites=2)
        d = DimensionlessParams(0.6, 0.25, 0.3, kappaT=-0.2)
        fromModel = dynamics.momentFlowFromModel(p)
        reduced = dynamics.momentFlow(d, 2, 1.1)
        testing.assert_allclose(fromModel.drift, reduced.drift, atol=1e-12)
        testing.assert_allclose(fromModel.pump, reduced.pump, atol=1e-12)

    def test_perSiteDecay(self):
        p = ModelParams.create(g=2.0, F=0.1, gamma=[0.1, 0.4], kappa=0.2, nSites=2)
        mf = dynamics.momentFlowFromModel(p)
        self.assertAlmostEqual(mf.drift[0, 0], -0.1)
        self.assertAlmostEqual(mf.drift[3, 3], -0.4)
        self.assertAlmostEqual(mf.diffusion[2, 2], 0.8)


class TestSteadyMoments(unittest.TestCase):
    def test_stationary(self):
        mf = dynamics.momentFlow(DimensionlessParams(0.7, 0.4, 0.3, kappaT=0.3), 3, 0.9)
        state = dynamics.steadyMoments(mf)
        testing.assert_allclose(mf.drift @ state.mean + mf.pump, 0.0, atol=1e-12)
        lyapunov = mf.drift @ state.cov + state.cov @ mf.drift.T + mf.diffusion
        testing.assert_allclose(lyapunov, 0.0, atol=1e-10)
        self.assertTrue(state.isPhysical())

    def test_uncoupledVacuum(self):
        state = dynamics.steadyMoments(dynamics.momentFlow(DimensionlessParams(0.0, 0.5, 0.0), 1, 0.0))
        testing.assert_allclose(state.cov, np.eye(2), atol=1e-12)
        testing.assert_allclose(state.mean, 0.0, atol=1e-12)

    def test_beyondCriticalRaises(self):
        d = DimensionlessParams(1.2, 0.3, 0.2)
        with self.assertRaises(NonHurwitz):
            dynamics.steadyMoments(dynamics.momentFlow(d, 1, 0.0))

    def test_spectralAbscissa(self):
        self.assertAlmostEqual(dynamics.spectralAbscissa(np.diag([-1.0, -0.25])), -0.25)


class TestHurwitzBoundary(unittest.TestCase):
    def test_singleSite(self):
        d = DimensionlessParams(0.0, 0.2857, 0.1)
        self.assertAlmostEqual(dynamics.hurwitzBoundary(d, 1), criticalCoupling(d), places=10)

    def test_twoSiteHopping(self):
        for kappaT in (0.0, -0.2, -0.4, -0.47):
            d = DimensionlessParams(0.0, 0.16, 0.1, kappaT=kappaT)
            self.assertAlmostEqual(
                dynamics.hurwitzBoundary(d, 2), criticalCoupling(d, hopping=True), places=8
            )

    def test_noDecay(self):
        with self.assertRaises(NonHurwitz):
            dynamics.hurwitzBoundary(DimensionlessParams(0.0, 0.0, 0.1), 1)


if __name__ == "__main__":
    unittest.main()
