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

"""
Closed-form non-equilibrium steady states of the effective quadratic model.

A single driven site relaxes to a displaced, rotated, squeezed thermal state
``R(delta) D(alpha) S(r, phi) nu(nTh) S^dagger D^dagger R^dagger``. Two coupled sites
decompose into a driven symmetric mode and an undriven antisymmetric mode, which gives
the closed-form four-mode-quadrature mean and covariance.

Quadratures follow x = a + a^dagger and p = i(a^dagger - a), ordered
(x_1, p_1, ..., x_N, p_N). The vacuum covariance is the identity.
"""
import math
from typing import NamedTuple

import numpy as np

from .errors import CriticalDivergence, NumericalFailure
from .params import (
    DEFAULT_CRIT_TOLERANCE,
    DimensionlessParams,
    reduceAngle,
    requireNormal,
)

# relative size of a negative alpha radicand that is treated as rounding
RADICAND_ROUNDING = 1e-12


class SqueezedThermal(NamedTuple):
    """Single-mode steady-state decomposition."""

    alpha: float
    delta: float
    r: float
    phi: float
    nTh: float


class GaussianState(NamedTuple):
    """
    Mean vector and covariance of an n-mode Gaussian state.

    Attributes
    ----------
    nModes : int
        Number of bosonic modes.
    mean : ndarray
        Length 2n vector (x_1, p_1, ..., x_n, p_n).
    cov : ndarray
        Symmetric 2n x 2n covariance, identity for the vacuum.
    """

    nModes: int
    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def vacuum(cls, nModes: int = 1) -> "GaussianState":
        return cls(nModes, np.zeros(2 * nModes), np.eye(2 * nModes))

    @staticmethod
    def symplecticForm(nModes: int) -> np.ndarray:
        """Block-diagonal [[0, 1], [-1, 0]], matching [x, p] = 2i."""
        return np.kron(np.eye(nModes), np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def isPhysical(self, tol: float = 1e-10) -> bool:
        """Check symmetry and the uncertainty relation cov + i Omega >= 0."""
        if not np.allclose(self.cov, self.cov.T, atol=1e-12, rtol=0.0):
            return False
        eigenvalues = np.linalg.eigvalsh(self.cov + 1j * self.symplecticForm(self.nModes))
        return bool(eigenvalues.min() >= -tol)


def _drivePhaseSines(chi):
    return math.sin(chi), math.cos(chi)


def decomposeSingle(
    d: DimensionlessParams, chi: float, epsCrit: float = DEFAULT_CRIT_TOLERANCE
) -> SqueezedThermal:
    """
    Decompose the single-site steady state into (alpha, delta, r, phi, nTh).

    ``delta`` is the polar angle of the steady mean (x, p) and ``phi + delta + pi/2``
    is the direction of the anti-squeezed axis, so every angle is fixed by the steady
    first and second moments of the drift equations.
    """
    requireNormal(d, hopping=False, epsCrit=epsCrit)
    lam2 = d.lam * d.lam
    gammaT = d.gammaT
    lamC2 = 1.0 + gammaT * gammaT
    gap = lamC2 - lam2
    s, c = _drivePhaseSines(chi)

    radicand = lamC2 - lam2 * gammaT * math.sin(2.0 * chi) + lam2 * (lam2 - 2.0) * s * s
    if radicand < 0.0:
        if radicand < -RADICAND_ROUNDING * lamC2:
            raise NumericalFailure(
                f"Displacement radicand is negative ({radicand:.3e}) at lambda={d.lam}, "
                f"gammaT={gammaT}, chi={chi}"
            )
        radicand = 0.0
    alpha = d.FT / (2.0 * gap) * math.sqrt(radicand)
    delta = reduceAngle(math.atan2((lam2 - 1.0) * s - gammaT * c, gammaT * s - c))

    spread = 4.0 * gap + lam2 * lam2
    r = 0.5 * math.atanh(lam2 / math.sqrt(spread))
    nTh = 0.5 * math.sqrt(spread / (4.0 * gap)) - 0.5
    theta = 0.5 * math.atan2(2.0 * gammaT, 2.0 - lam2)
    phi = reduceAngle(theta - delta - 0.5 * math.pi)
    return SqueezedThermal(alpha=alpha, delta=delta, r=r, phi=phi, nTh=max(nTh, 0.0))


def meanSingle(s: SqueezedThermal):
    """Steady quadrature means (x, p) = 2 alpha (cos delta, sin delta)."""
    return 2.0 * s.alpha * math.cos(s.delta), 2.0 * s.alpha * math.sin(s.delta)


def _rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def covarianceSingle(s: SqueezedThermal) -> GaussianState:
    """Single-mode state (mean included) of a squeezed thermal decomposition."""
    orient = _rotation(s.phi + s.delta + 0.5 * math.pi)
    principal = np.diag([math.exp(2.0 * s.r), math.exp(-2.0 * s.r)])
    cov = (1.0 + 2.0 * s.nTh) * orient @ principal @ orient.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState(1, np.array(meanSingle(s)), cov)


def singleModeState(
    d: DimensionlessParams, chi: float, epsCrit: float = DEFAULT_CRIT_TOLERANCE
) -> GaussianState:
    return covarianceSingle(decomposeSingle(d, chi, epsCrit))


def _hoppingDenominator(d: DimensionlessParams, shift: float) -> float:
    """gammaT^2 + a b for the normal mode with a = shift, b = shift - lambda^2."""
    return d.gammaT**2 + shift * (shift - d.lam**2)


def meanTwoSite(
    d: DimensionlessParams, chi: float, epsCrit: float = DEFAULT_CRIT_TOLERANCE
) -> np.ndarray:
    """
    Steady mean (x_1, p_1, x_2, p_2) of two driven sites coupled by hopping.

    Both sites see the same drive, so only the symmetric mode is displaced and the two
    sites carry equal means.
    """
    if d.kappaT <= -1.0:
        raise CriticalDivergence(
            f"kappaT={d.kappaT} <= -1 leaves no normal phase for the driven mode"
        )
    requireNormal(d, hopping=True, epsCrit=epsCrit)
    shift = 1.0 + d.kappaT
    lam2 = d.lam * d.lam
    denom = _hoppingDenominator(d, shift)
    s, c = _drivePhaseSines(chi)
    x = d.FT * (d.gammaT * s - shift * c) / denom
    p = -d.FT * ((shift - lam2) * s + d.gammaT * c) / denom
    return np.array([x, p, x, p])


def covarianceTwoSite(
    d: DimensionlessParams, epsCrit: float = DEFAULT_CRIT_TOLERANCE
) -> np.ndarray:
    """
    Steady 4x4 covariance of two coupled sites.

    Every element carries the common factor 1/A with
    A = 2 (1 - kappaT^2)(lambda_+^2 - lambda^2)(lambda_-^2 - lambda^2), which vanishes at
    either critical coupling.
    """
    if abs(d.kappaT) >= 1.0:
        raise CriticalDivergence(f"|kappaT|={abs(d.kappaT)} >= 1 has no two-site normal phase")
    requireNormal(d, hopping=True, epsCrit=epsCrit)
    g2 = d.gammaT**2
    k = d.kappaT
    k2 = k * k
    lam2 = d.lam * d.lam

    A = 2.0 * _hoppingDenominator(d, 1.0 + k) * _hoppingDenominator(d, 1.0 - k)
    if A <= epsCrit:
        raise CriticalDivergence(f"Two-site covariance denominator vanishes (A={A:.3e})")

    v11 = (
        2.0 * g2 * g2
        + g2 * (4.0 * k2 + 4.0 - 3.0 * lam2)
        + (k2 - 1.0) * (2.0 * k2 - (2.0 - 3.0 * lam2 + lam2 * lam2))
    ) / A
    v22 = (
        2.0 * g2 * g2
        + (k + 1.0 - lam2) * (k - 1.0 + lam2) * (2.0 * k2 + lam2 - 2.0)
        + g2 * (4.0 * k2 + 4.0 - 5.0 * lam2 + lam2 * lam2)
    ) / A
    v12 = d.gammaT * lam2 * (g2 + k2 - lam2 + 1.0) / A
    v13 = k * lam2 * (g2 + k2 - 1.0) / A
    v24 = k * lam2 * ((1.0 - lam2) ** 2 - (g2 + k2)) / A
    v14 = d.gammaT * k * lam2 * (lam2 - 2.0) / A

    return np.array(
        [
            [v11, v12, v13, v14],
            [v12, v22, v14, v24],
            [v13, v14, v11, v12],
            [v14, v24, v12, v22],
        ]
    )


def twoSiteState(
    d: DimensionlessParams, chi: float, epsCrit: float = DEFAULT_CRIT_TOLERANCE
) -> GaussianState:
    return GaussianState(
        2, meanTwoSite(d, chi, epsCrit), covarianceTwoSite(d, epsCrit)
    )


def thermalProbabilities(nTh: float, cutoff: int) -> np.ndarray:
    """Bose-Einstein populations N^n/(1+N)^(n+1) of the Fock levels 0..cutoff-1."""
    levels = np.arange(cutoff)
    return nTh**levels / (1.0 + nTh) ** (levels + 1)


def decomposeGaussian(state: GaussianState) -> SqueezedThermal:
    """
    Recover (alpha, delta, r, phi, nTh) from a single-mode mean and covariance.

    This inverts :py:func:`covarianceSingle`. When the state is unsqueezed the squeezing
    phase is not defined and the value returned is arbitrary.
    """
    if state.nModes != 1:
        raise ValueError(f"Only single-mode states decompose, got {state.nModes} modes")
    x, p = state.mean
    alpha = 0.5 * math.hypot(x, p)
    delta = reduceAngle(math.atan2(p, x))

    cov = 0.5 * (state.cov + state.cov.T)
    purityScale = math.sqrt(max(np.linalg.det(cov), 0.0))
    larger, smaller = sorted(np.linalg.eigvalsh(cov), reverse=True)
    r = 0.25 * math.log(larger / smaller)
    theta = 0.5 * math.atan2(2.0 * cov[0, 1], cov[0, 0] - cov[1, 1])
    phi = reduceAngle(theta - delta - 0.5 * math.pi)
    return SqueezedThermal(
        alpha=alpha, delta=delta, r=r, phi=phi, nTh=max(0.5 * (purityScale - 1.0), 0.0)
    )
