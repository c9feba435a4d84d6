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
Linear moment flow of the effective quadratic lattice model.

First moments obey ``dR/dt = M R + b`` and the covariance obeys the Lyapunov equation
``M V + V M^T + D = 0`` in steady state. Time is measured in units of 1/omega.

Per site the drift is [[-gamma, 1], [-(1 - lambda^2), -gamma]], the drive enters as
b = F (sin chi, -cos chi) and the diffusion is 2 gamma per quadrature, which makes the
undriven, uncoupled steady state the vacuum. Nearest-neighbour hopping kappa adds
dx_k/dt += kappa p_l and dp_k/dt -= kappa x_l.
"""
import math
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .analytic import GaussianState
from .errors import ConfigurationError, NonHurwitz
from .params import DimensionlessParams, ModelParams


class MomentFlow(NamedTuple):
    drift: np.ndarray
    pump: np.ndarray
    diffusion: np.ndarray

    @property
    def nModes(self) -> int:
        return len(self.pump) // 2


def _assemble(
    lam: float, decays: Sequence[float], kappaT: float, forceT: float, chi: float
) -> MomentFlow:
    nSites = len(decays)
    drift = np.zeros((2 * nSites, 2 * nSites))
    pump = np.zeros(2 * nSites)
    diffusion = np.zeros((2 * nSites, 2 * nSites))
    for k, decay in enumerate(decays):
        ix, ip = 2 * k, 2 * k + 1
        drift[ix, ix] = drift[ip, ip] = -decay
        drift[ix, ip] = 1.0
        drift[ip, ix] = -(1.0 - lam * lam)
        pump[ix] = forceT * math.sin(chi)
        pump[ip] = -forceT * math.cos(chi)
        diffusion[ix, ix] = diffusion[ip, ip] = 2.0 * decay

    for k in range(nSites - 1):
        left, right = 2 * k, 2 * (k + 1)
        drift[left, right + 1] += kappaT
        drift[right, left + 1] += kappaT
        drift[left + 1, right] -= kappaT
        drift[right + 1, left] -= kappaT
    return MomentFlow(drift, pump, diffusion)


def momentFlow(d: DimensionlessParams, nSites: int, chi: float) -> MomentFlow:
    """Moment flow of an open chain of ``nSites`` sites with uniform decay."""
    if nSites < 1:
        raise ConfigurationError(f"nSites must be at least 1, got {nSites}")
    return _assemble(d.lam, [d.gammaT] * nSites, d.kappaT, d.FT, chi)


def momentFlowFromModel(p: ModelParams) -> MomentFlow:
    """Moment flow from physical couplings, allowing a different decay on every site."""
    lam = 2.0 * p.g / math.sqrt(p.omega * p.Omega)
    decays = [gk / p.omega for gk in p.gamma]
    return _assemble(lam, decays, p.kappa / p.omega, p.F / p.omega, p.chi)


def spectralAbscissa(matrix: np.ndarray) -> float:
    """Largest real part of the eigenvalues."""
    return float(np.max(np.linalg.eigvals(matrix).real))


def steadyMoments(mf: MomentFlow) -> GaussianState:
    """Steady mean -M^-1 b and the Lyapunov covariance of a Hurwitz moment flow."""
    abscissa = spectralAbscissa(mf.drift)
    if abscissa >= 0.0:
        raise NonHurwitz(
            f"Drift has an eigenvalue with real part {abscissa:.3e}; no steady state exists"
        )
    try:
        mean = -np.linalg.solve(mf.drift, mf.pump)
    except np.linalg.LinAlgError as err:
        raise NonHurwitz(f"Drift matrix is singular: {err}") from err
    cov = scipy.linalg.solve_continuous_lyapunov(mf.drift, -mf.diffusion)
    return GaussianState(mf.nModes, mean, 0.5 * (cov + cov.T))


def steadyMomentsFromModel(p: ModelParams) -> GaussianState:
    return steadyMoments(momentFlowFromModel(p))


def hurwitzBoundary(
    d: DimensionlessParams, nSites: int, chi: float = 0.0, xtol: float = 1e-14
) -> float:
    """
    Coupling lambda at which the drift stops being Hurwitz.

    The spectral abscissa is bracketed between lambda = 0 and a doubling upper bound,
    then its zero is found by Brent's method.
    """
    if d.gammaT <= 0.0:
        raise NonHurwitz("Without decay the drift is never Hurwitz")

    def abscissaAt(lam):
        return spectralAbscissa(momentFlow(d._replace(lam=lam), nSites, chi).drift)

    upper = 2.0 * math.sqrt(1.0 + d.gammaT**2)
    for _attempt in range(60):
        if abscissaAt(upper) > 0.0:
            break
        upper *= 2.0
    else:
        raise NonHurwitz("The drift stays Hurwitz for every coupling tried")
    return scipy.optimize.brentq(abscissaAt, 0.0, upper, xtol=xtol, rtol=4.0 * np.finfo(float).eps)
