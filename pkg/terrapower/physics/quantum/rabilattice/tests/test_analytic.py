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

"""Tests for the closed-form steady states."""
import math
import unittest

import numpy as np
from numpy import testing

from terrapower.physics.quantum.rabilattice import analytic
from terrapower.physics.quantum.rabilattice import dynamics
from terrapower.physics.quantum.rabilattice.errors import CriticalDivergence
from terrapower.physics.quantum.rabilattice.params import (
    DimensionlessParams,
    criticalStructure,
    reduceAngle,
)

POINTS = [
    (DimensionlessParams(0.85, 0.2857, 0.38), 0.3),
    (DimensionlessParams(0.95, 0.2857, 0.38), -2.1),
    (DimensionlessParams(0.4, 1.2, 0.7), 1.4),
    (DimensionlessParams(0.0, 0.5, 0.2), math.pi),
]


class TestSingleSite(unittest.TestCase):
    def test_matchesLyapunov(self):
        for d, chi in POINTS:
            closed = analytic.singleModeState(d, chi)
            lyapunov = dynamics.steadyMoments(dynamics.momentFlow(d, 1, chi))
            testing.assert_allclose(closed.mean, lyapunov.mean, rtol=1e-9, atol=1e-12)
            testing.assert_allclose(closed.cov, lyapunov.cov, rtol=1e-9, atol=1e-12)
            self.assertTrue(closed.isPhysical())

    def test_displacementAmplitude(self):
        d, chi = POINTS[0]
        s = analytic.decomposeSingle(d, chi)
        lam2 = d.lam**2
        gap = 1.0 + d.gammaT**2 - lam2
        expected = d.FT / (2.0 * gap) * math.hypot(
            d.gammaT * math.sin(chi) - math.cos(chi),
            (lam2 - 1.0) * math.sin(chi) - d.gammaT * math.cos(chi),
        )
        self.assertAlmostEqual(s.alpha, expected, places=12)

    def test_uncoupledIsCoherent(self):
        s = analytic.decomposeSingle(DimensionlessParams(0.0, 0.5, 0.2), 0.7)
        self.assertAlmostEqual(s.r, 0.0)
        self.assertAlmostEqual(s.nTh, 0.0)

    def test_squeezingGrowsTowardsCriticality(self):
        far = analytic.decomposeSingle(DimensionlessParams(0.5, 0.2857, 0.38), 0.0)
        near = analytic.decomposeSingle(DimensionlessParams(1.03, 0.2857, 0.38), 0.0)
        self.assertGreater(near.r, far.r)
        self.assertGreater(near.nTh, far.nTh)
        self.assertGreater(near.alpha, far.alpha)

    def test_nearCriticalDisplacementRatio(self):
        gammaT, chi = 0.2857, math.pi / 7
        lamC = math.sqrt(1.0 + gammaT**2)

        def predicted(lam):
            lam2 = lam * lam
            radicand = (
                lamC**2 - lam2 * gammaT * math.sin(2.0 * chi) + lam2 * (lam2 - 2.0) * math.sin(chi) ** 2
            )
            return math.sqrt(radicand) / (lamC**2 - lam2)

        near, far = 0.999 * lamC, 0.99 * lamC
        ratio = (
            analytic.decomposeSingle(DimensionlessParams(near, gammaT, 0.38), chi).alpha
            / analytic.decomposeSingle(DimensionlessParams(far, gammaT, 0.38), chi).alpha
        )
        self.assertGreater(ratio, 5.0)
        self.assertLess(abs(ratio / (predicted(near) / predicted(far)) - 1.0), 1e-6)

    def test_noiseIndependentOfDrive(self):
        d = DimensionlessParams(0.85, 0.2857, 0.38)
        reference = analytic.decomposeSingle(d, 0.3)
        for forceT, chi in ((1.7, 0.3), (0.38, -2.1), (0.05, 1.2)):
            s = analytic.decomposeSingle(d._replace(FT=forceT), chi)
            self.assertEqual(s.r, reference.r)
            self.assertEqual(s.nTh, reference.nTh)
            self.assertAlmostEqual(
                reduceAngle(s.phi + s.delta), reduceAngle(reference.phi + reference.delta), places=12
            )
            testing.assert_allclose(
                analytic.covarianceSingle(s).cov,
                analytic.covarianceSingle(reference).cov,
                rtol=1e-12,
                atol=1e-12,
            )

    def test_criticalDivergence(self):
        with self.assertRaises(CriticalDivergence):
            analytic.decomposeSingle(DimensionlessParams(1.04, 0.2857, 0.38), 0.0)
        with self.assertRaises(CriticalDivergence):
            analytic.singleModeState(DimensionlessParams(1.5, 0.2857, 0.38), 0.0)

    def test_decomposeGaussianInverts(self):
        d, chi = POINTS[1]
        s = analytic.decomposeSingle(d, chi)
        recovered = analytic.decomposeGaussian(analytic.covarianceSingle(s))
        testing.assert_allclose(
            [recovered.alpha, recovered.delta, recovered.r, recovered.nTh],
            [s.alpha, s.delta, s.r, s.nTh],
            rtol=1e-9,
            atol=1e-12,
        )
        self.assertAlmostEqual(math.cos(2.0 * recovered.phi), math.cos(2.0 * s.phi), places=9)

    def test_decomposeGaussianSingleModeOnly(self):
        with self.assertRaises(ValueError):
            analytic.decomposeGaussian(analytic.GaussianState.vacuum(2))


class TestTwoSite(unittest.TestCase):
    def test_matchesLyapunov(self):
        for kappaT in (-0.45, -0.2, 0.3):
            d = DimensionlessParams(0.6, 0.16, 0.13, kappaT)
            closed = analytic.twoSiteState(d, math.pi / 7)
            lyapunov = dynamics.steadyMoments(dynamics.momentFlow(d, 2, math.pi / 7))
            testing.assert_allclose(closed.mean, lyapunov.mean, rtol=1e-9, atol=1e-12)
            testing.assert_allclose(closed.cov, lyapunov.cov, rtol=1e-9, atol=1e-12)
            self.assertTrue(closed.isPhysical())

    def test_uncoupledSitesAreIndependent(self):
        d = DimensionlessParams(0.8, 0.3, 0.4, 0.0)
        single = analytic.singleModeState(d, 0.9)
        pair = analytic.twoSiteState(d, 0.9)
        testing.assert_allclose(pair.mean, np.tile(single.mean, 2), rtol=1e-12)
        testing.assert_allclose(pair.cov[:2, :2], single.cov, rtol=1e-10)
        testing.assert_allclose(pair.cov[:2, 2:], np.zeros((2, 2)), atol=1e-12)

    def test_covarianceIndependentOfDrive(self):
        d = DimensionlessParams(0.59, 0.16, 0.13, -0.45)
        reference = analytic.covarianceTwoSite(d)
        for forceT in (0.0, 0.5, 2.0):
            testing.assert_array_equal(analytic.covarianceTwoSite(d._replace(FT=forceT)), reference)
        for chi in (0.0, math.pi / 7, -2.0):
            testing.assert_array_equal(analytic.twoSiteState(d, chi).cov, reference)

    def test_covarianceDivergesAtHoppingCriticality(self):
        d = DimensionlessParams(0.0, 0.16, 0.13, -0.45)
        lambdaPlus = criticalStructure(d).lambdaPlus
        distances = np.array([1e-3, 1e-4, 1e-5, 1e-6]) * lambdaPlus
        elements = [
            abs(analytic.covarianceTwoSite(d._replace(lam=lambdaPlus - eps))[0, 0]) for eps in distances
        ]
        slope = np.polyfit(np.log(distances), np.log(elements), 1)[0]
        self.assertLess(abs(slope + 1.0), 0.02)

    def test_hoppingBeyondNormalPhase(self):
        with self.assertRaises(CriticalDivergence):
            analytic.meanTwoSite(DimensionlessParams(0.1, 0.16, 0.13, -1.0), 0.0)
        with self.assertRaises(CriticalDivergence):
            analytic.covarianceTwoSite(DimensionlessParams(0.8, 0.16, 0.13, -0.45))


class TestThermal(unittest.TestCase):
    def test_probabilities(self):
        testing.assert_allclose(analytic.thermalProbabilities(0.0, 3), [1.0, 0.0, 0.0])
        probs = analytic.thermalProbabilities(0.7, 200)
        self.assertAlmostEqual(probs.sum(), 1.0, places=12)
        self.assertAlmostEqual(np.arange(200) @ probs, 0.7, places=10)


if __name__ == "__main__":
    unittest.main()
