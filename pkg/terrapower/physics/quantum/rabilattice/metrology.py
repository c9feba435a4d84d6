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
Quantum Fisher information, symmetric logarithmic derivatives and Cramer-Rao bounds.

The two estimated parameters are the drive magnitude and phase, ordered (F, chi), or
equivalently the quadrature components q = F cos(chi), p = F sin(chi). Everything is
in units of the boson frequency, so forces are the reduced ``FT``.

For a Gaussian family with parameter-independent covariance V the QFIM is
``dd_k^T V^-1 dd_m`` and the SLD is linear in the quadratures,
``L_k = (V^-1 dd_k)^T (R - d)``. The closed forms below are that expression evaluated
on the analytic steady states. The Bures metric of the same family is QFIM/4.
"""
import enum
import math
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
import qutip
import scipy.linalg

from . import analytic
from .errors import (
    ConfigurationError,
    FiniteDifferenceMismatch,
    NumericalFailure,
    ParameterDependentCovariance,
    PhaseUnidentifiable,
    SingularCovariance,
    TruncationError,
)
from .params import DEFAULT_CRIT_TOLERANCE, DimensionlessParams, requireNormal

DEFAULT_STEP = 1e-5
DEFAULT_TOL_EIG = 1e-12
DEFAULT_FOCK_TAIL = 1e-10


class Basis(enum.Enum):
    FORCE_PHASE = "F_chi"
    QUADRATURE = "q_p"


class QfimResult(NamedTuple):
    """
    A 2x2 QFIM with its inverse and the SLD commutator coefficient.

    ``commutatorCoeff`` is the c in [L_1, L_2] = i c (as an expectation value in the
    steady state). ``forceT`` and ``chi`` record the true point, which the Jacobian
    between the two bases needs.
    """

    fim: np.ndarray
    fimInv: np.ndarray
    commutatorCoeff: float
    basis: Basis
    forceT: float
    chi: float

    def jacobian(self) -> np.ndarray:
        """d(q, p)/d(F, chi)."""
        c, s = math.cos(self.chi), math.sin(self.chi)
        return np.array([[c, -self.forceT * s], [s, self.forceT * c]])

    def toQuadratureBasis(self) -> "QfimResult":
        if self.basis is Basis.QUADRATURE:
            return self
        if self.forceT <= 0.0:
            raise PhaseUnidentifiable("The (F, chi) to (q, p) map is singular at F = 0")
        jac = self.jacobian()
        jacInv = np.linalg.inv(jac)
        return self._replace(
            fim=_symmetric(jacInv.T @ self.fim @ jacInv),
            fimInv=_symmetric(jac @ self.fimInv @ jac.T),
            commutatorCoeff=self.commutatorCoeff / self.forceT,
            basis=Basis.QUADRATURE,
        )

    def toForcePhaseBasis(self) -> "QfimResult":
        if self.basis is Basis.FORCE_PHASE:
            return self
        if self.forceT <= 0.0:
            raise PhaseUnidentifiable("The phase is not identifiable at F = 0")
        jac = self.jacobian()
        jacInv = np.linalg.inv(jac)
        return self._replace(
            fim=_symmetric(jac.T @ self.fim @ jac),
            fimInv=_symmetric(jacInv @ self.fimInv @ jacInv.T),
            commutatorCoeff=self.commutatorCoeff * self.forceT,
            basis=Basis.FORCE_PHASE,
        )


class CrbReport(NamedTuple):
    """Cramer-Rao bounds after ``nu`` repetitions and the comparison with the SQL."""

    nu: int
    dF: float
    dchi: float
    dq2PlusDp2: float
    sqlBound: float
    beatsSql: bool


def _symmetric(matrix):
    return 0.5 * (matrix + matrix.T)


def _checkInverse(fim, fimInv):
    product = fim @ fimInv
    tol = max(1e-10, 1e-13 * np.linalg.norm(fim) * np.linalg.norm(fimInv))
    if not np.allclose(product, np.eye(len(fim)), atol=tol, rtol=0.0):
        raise NumericalFailure(
            f"QFIM and its closed-form inverse disagree: product =\n{product}"
        )


class _ModeTerms(NamedTuple):
    """Coefficients of the driven normal mode with drift [[-g, a], [-b, -g]]."""

    a: float
    b: float
    det: float
    spread: float
    lam2: float


def _modeTerms(d: DimensionlessParams, kappaT: float) -> _ModeTerms:
    lam2 = d.lam * d.lam
    a = 1.0 + kappaT
    b = a - lam2
    det = d.gammaT**2 + a * b
    return _ModeTerms(a, b, det, 4.0 * det + lam2 * lam2, lam2)


def _phaseProjections(d: DimensionlessParams, kappaT: float, chi: float):
    """(Q, P) with Q^2 + P^2 equal to the mode spread."""
    skew = d.lam * d.lam - 2.0 - 2.0 * kappaT
    c2, s2 = math.cos(2.0 * chi), math.sin(2.0 * chi)
    return skew * c2 + 2.0 * d.gammaT * s2, skew * s2 - 2.0 * d.gammaT * c2


def _closedForm(
    d: DimensionlessParams, chi: float, forceT: float, kappaT: float, probes: int
) -> QfimResult:
    if forceT <= 0.0:
        raise PhaseUnidentifiable(
            f"The drive phase is not identifiable at F = {forceT}; use the (q, p) basis"
        )
    terms = _modeTerms(d, kappaT)
    q, p = _phaseProjections(d, kappaT, chi)
    spread, lam2 = terms.spread, terms.lam2

    scale = probes / (terms.det * spread)
    fim = scale * np.array(
        [
            [spread - lam2 * q, forceT * lam2 * p],
            [forceT * lam2 * p, forceT**2 * (spread + lam2 * q)],
        ]
    )
    fimInv = np.array(
        [
            [spread + lam2 * q, -lam2 * p / forceT],
            [-lam2 * p / forceT, (spread - lam2 * q) / forceT**2],
        ]
    ) / (4.0 * probes)
    _checkInverse(fim, fimInv)
    return QfimResult(
        fim=fim,
        fimInv=fimInv,
        commutatorCoeff=8.0 * probes * forceT / spread,
        basis=Basis.FORCE_PHASE,
        forceT=forceT,
        chi=chi,
    )


def qfimSingleClosed(
    d: DimensionlessParams,
    chi: float,
    forceT: Optional[float] = None,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> QfimResult:
    """
    Closed-form (F, chi) QFIM of a single driven site.

    ``forceT`` defaults to ``d.FT``. The inverse is evaluated directly rather than by
    inverting the QFIM, so it stays accurate close to the critical coupling.
    """
    requireNormal(d, hopping=False, epsCrit=epsCrit)
    return _closedForm(d, chi, d.FT if forceT is None else forceT, 0.0, probes=1)


def qfimTwoSiteClosed(
    d: DimensionlessParams,
    chi: float,
    forceT: Optional[float] = None,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> QfimResult:
    """
    Closed-form (F, chi) QFIM of two sites coupled by hopping ``d.kappaT``.

    Only the symmetric mode carries the drive; its information is twice that of a single
    site with the critical coupling moved to lambda_+.
    """
    if abs(d.kappaT) >= 1.0:
        raise NumericalFailure(f"|kappaT| = {abs(d.kappaT)} >= 1 has no two-site closed form")
    requireNormal(d, hopping=True, epsCrit=epsCrit)
    return _closedForm(d, chi, d.FT if forceT is None else forceT, d.kappaT, probes=2)


def qfimQpBasis(
    d: DimensionlessParams,
    twoSite: bool = False,
    chi: float = 0.0,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> QfimResult:
    """
    Closed-form QFIM for the quadrature components (q, p) of the drive.

    The result does not depend on the true (q, p). ``chi`` only labels the point so the
    result can be mapped back to the (F, chi) basis; when ``d.FT`` is positive that map
    is checked against :py:func:`qfimSingleClosed` / :py:func:`qfimTwoSiteClosed`.
    """
    requireNormal(d, hopping=twoSite, epsCrit=epsCrit)
    kappaT = d.kappaT if twoSite else 0.0
    probes = 2 if twoSite else 1
    terms = _modeTerms(d, kappaT)
    g, lam2 = d.gammaT, terms.lam2
    fimInv = np.array(
        [
            [terms.b**2 + g * g + 0.5 * terms.b * lam2, 0.5 * g * lam2],
            [0.5 * g * lam2, terms.a**2 + g * g - 0.5 * terms.a * lam2],
        ]
    ) / probes
    result = QfimResult(
        fim=_symmetric(np.linalg.inv(fimInv)),
        fimInv=fimInv,
        commutatorCoeff=8.0 * probes / terms.spread,
        basis=Basis.QUADRATURE,
        forceT=d.FT,
        chi=chi,
    )
    if d.FT > 0.0:
        closed = (qfimTwoSiteClosed if twoSite else qfimSingleClosed)(d, chi, epsCrit=epsCrit)
        mapped = closed.toQuadratureBasis()
        if not np.allclose(mapped.fimInv, fimInv, rtol=1e-9, atol=1e-12):
            raise NumericalFailure(
                "Quadrature-basis QFIM is inconsistent with the (F, chi) closed form"
            )
    return result


def sldCommutator(
    d: DimensionlessParams,
    forceT: Optional[float] = None,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> float:
    """Single-site c in [L_F, L_chi] = i c; it does not depend on the phase."""
    requireNormal(d, hopping=False, epsCrit=epsCrit)
    forceT = d.FT if forceT is None else forceT
    return 8.0 * forceT / _modeTerms(d, 0.0).spread


def commutatorCritical(d: DimensionlessParams, forceT: Optional[float] = None) -> float:
    """Limit of :py:func:`sldCommutator` at the critical coupling, 8 F / lambda_c^4."""
    forceT = d.FT if forceT is None else forceT
    return 8.0 * forceT / (1.0 + d.gammaT**2) ** 2


def modeMeanDerivatives(
    d: DimensionlessParams, chi: float, twoSite: bool = False
) -> np.ndarray:
    """
    Analytic derivatives of the steady mean with respect to (F, chi).

    Returns a (2N, 2) array whose columns are dd/dF and dd/dchi.
    """
    terms = _modeTerms(d, d.kappaT if twoSite else 0.0)
    s, c = math.sin(chi), math.cos(chi)
    g = d.gammaT
    perForce = np.array([g * s - terms.a * c, -(terms.b * s + g * c)]) / terms.det
    perPhase = d.FT * np.array([g * c + terms.a * s, -(terms.b * c - g * s)]) / terms.det
    block = np.column_stack([perForce, perPhase])
    return np.vstack([block, block]) if twoSite else block


def gaussianCommutator(state: analytic.GaussianState, meanDerivatives: np.ndarray) -> float:
    """c = 2 (V^-1 dd_1)^T Omega (V^-1 dd_2) for linear Gaussian SLDs."""
    coeffs = np.linalg.solve(state.cov, meanDerivatives)
    omega = analytic.GaussianState.symplecticForm(state.nModes)
    return float(2.0 * coeffs[:, 0] @ omega @ coeffs[:, 1])


def _inverseCovariance(cov: np.ndarray, maxCondition: float = 1e12) -> np.ndarray:
    try:
        condition = np.linalg.cond(cov)
        if not np.isfinite(condition) or condition > maxCondition:
            raise SingularCovariance(f"Covariance condition number {condition:.3e} is too large")
        return np.linalg.inv(cov)
    except np.linalg.LinAlgError as err:
        raise SingularCovariance(f"Covariance is singular: {err}") from err


def qfimGaussianNumeric(
    stateFn: Callable[[float, float], analytic.GaussianState],
    at: Tuple[float, float],
    step: float = DEFAULT_STEP,
    basis: Basis = Basis.FORCE_PHASE,
    rtol: float = 1e-6,
    covTol: float = 1e-10,
) -> QfimResult:
    """
    QFIM of a Gaussian family by central differences of its mean vector.

    Parameters
    ----------
    stateFn : callable
        Maps the two parameters to a :py:class:`GaussianState`.
    at : tuple
        Point ``(F, chi)`` or ``(q, p)``, matching ``basis``.
    step : float
        Relative step; the absolute step is ``step * max(|x|, 1)``.
    rtol : float
        Agreement required between the step ``h`` and ``h/2`` derivatives before the
        smaller one is used. Larger disagreements fall back to Richardson extrapolation,
        and more than ten times this aborts.
    covTol : float
        Allowed change of the covariance across a step.
    """
    center = stateFn(*at)
    covInv = _inverseCovariance(center.cov)
    covScale = max(1.0, np.linalg.norm(center.cov))

    def shifted(index, h):
        point = list(at)
        point[index] += h
        state = stateFn(*point)
        if np.linalg.norm(state.cov - center.cov) > covTol * covScale:
            raise ParameterDependentCovariance(
                f"Covariance changes by {np.linalg.norm(state.cov - center.cov):.3e} "
                f"across a step of parameter {index}"
            )
        return state.mean

    def derivative(index):
        h = step * max(abs(at[index]), 1.0)
        coarse = (shifted(index, h) - shifted(index, -h)) / (2.0 * h)
        fine = (shifted(index, 0.5 * h) - shifted(index, -0.5 * h)) / h
        scale = max(np.linalg.norm(fine), 1e-300)
        mismatch = np.linalg.norm(coarse - fine) / scale
        if mismatch <= rtol:
            return fine
        if mismatch > 10.0 * rtol:
            raise FiniteDifferenceMismatch(
                f"Finite-difference derivative of parameter {index} is unstable "
                f"(relative mismatch {mismatch:.3e})"
            )
        return (4.0 * fine - coarse) / 3.0

    derivs = np.column_stack([derivative(0), derivative(1)])
    fim = _symmetric(derivs.T @ covInv @ derivs)
    try:
        fimInv = _symmetric(np.linalg.inv(fim))
    except np.linalg.LinAlgError as err:
        raise PhaseUnidentifiable(f"QFIM is singular at {at}: {err}") from err

    if basis is Basis.FORCE_PHASE:
        forceT, chi = at
    else:
        forceT, chi = math.hypot(*at), math.atan2(at[1], at[0])
    return QfimResult(
        fim=fim,
        fimInv=fimInv,
        commutatorCoeff=gaussianCommutator(center, derivs),
        basis=basis,
        forceT=forceT,
        chi=chi,
    )


def steadyStateFock(
    s: analytic.SqueezedThermal,
    cutoff: int,
    pad: Optional[int] = None,
    tailTol: float = DEFAULT_FOCK_TAIL,
) -> np.ndarray:
    """
    Fock-basis density matrix R D S nu S^dagger D^dagger R^dagger of a decomposition.

    The operators are exponentiated in a space padded by ``pad`` levels (default
    ``cutoff``) and the result is cropped to ``cutoff`` levels. The population lost by
    cropping must stay below ``tailTol``.
    """
    pad = cutoff if pad is None else pad
    size = cutoff + pad
    unitary = (
        (1j * s.delta * qutip.num(size)).expm()
        * qutip.displace(size, s.alpha)
        * qutip.squeeze(size, s.r * np.exp(2j * s.phi))
    )
    thermal = qutip.Qobj(np.diag(analytic.thermalProbabilities(s.nTh, size)))
    rho = (unitary * thermal * unitary.dag()).full()[:cutoff, :cutoff]
    tail = 1.0 - np.trace(rho).real
    if tail > tailTol:
        raise TruncationError(
            f"Fock cutoff {cutoff} leaves {tail:.3e} of the population outside the basis"
        )
    return 0.5 * (rho + rho.conj().T)


def _sqzFactor(r, phi):
    """beta(r, phi) = cosh r + e^{2i phi} sinh r."""
    return math.cosh(r) + np.exp(2j * phi) * math.sinh(r)


def sldFock(
    s: analytic.SqueezedThermal,
    d: DimensionlessParams,
    forceT: float,
    chi: float,
    cutoff: int,
    epsCrit: float = DEFAULT_CRIT_TOLERANCE,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    SLD operators (L_F, L_chi) of the single-site steady state in a truncated Fock basis.

    Both are linear in the transformed lowering operator
    A = U a U^dagger = (a e^{-i delta} - alpha) cosh r + (a^dagger e^{i delta} - alpha) e^{2i phi} sinh r,
    with coefficients from the analytic derivatives of alpha and delta.
    """
    requireNormal(d, hopping=False, epsCrit=epsCrit)
    lam2 = d.lam * d.lam
    gap = 1.0 + d.gammaT**2 - lam2
    radicand = (
        1.0 + d.gammaT**2 - lam2 * d.gammaT * math.sin(2.0 * chi) + lam2 * (lam2 - 2.0) * math.sin(chi) ** 2
    )
    _q, projection = _phaseProjections(d, 0.0, chi)
    dAlphaDForce = math.sqrt(radicand) / (2.0 * gap)
    dAlphaDChi = forceT / (2.0 * gap) * lam2 * projection / (2.0 * math.sqrt(radicand))
    dDeltaDChi = gap / radicand

    a = qutip.destroy(cutoff).full()
    identity = np.eye(cutoff)
    lowering = (a * np.exp(-1j * s.delta) - s.alpha * identity) * math.cosh(s.r) + (
        a.T * np.exp(1j * s.delta) - s.alpha * identity
    ) * np.exp(2j * s.phi) * math.sinh(s.r)
    raising = lowering.conj().T

    thermalScale = 2.0 / (1.0 + 2.0 * s.nTh)
    beta = _sqzFactor(s.r, s.phi)
    upsilon = dAlphaDChi * beta + 1j * s.alpha * dDeltaDChi * _sqzFactor(-s.r, s.phi)
    sldForce = thermalScale * dAlphaDForce * (beta * raising + np.conj(beta) * lowering)
    sldPhase = thermalScale * (upsilon * raising + np.conj(upsilon) * lowering)
    return _hermitian(sldForce), _hermitian(sldPhase)


def _hermitian(op):
    return 0.5 * (op + op.conj().T)


def sldResidual(rho: np.ndarray, drho: np.ndarray, sld: np.ndarray) -> float:
    """Frobenius norm of 2 d(rho) - {L, rho}."""
    return float(np.linalg.norm(2.0 * drho - (sld @ rho + rho @ sld)))


def sldFromDerivative(
    rho: np.ndarray, drho: np.ndarray, tolEig: float = DEFAULT_TOL_EIG
) -> np.ndarray:
    """
    Solve 2 d(rho) = {L, rho} in the eigenbasis of rho.

    Pairs of eigenvalues whose sum is below ``tolEig`` are dropped, which restricts L to
    the support of rho.
    """
    probs, vecs = scipy.linalg.eigh(_hermitian(rho))
    inBasis = vecs.conj().T @ drho @ vecs
    sums = probs[:, None] + probs[None, :]
    keep = sums > tolEig
    sldInBasis = np.zeros_like(inBasis)
    sldInBasis[keep] = 2.0 * inBasis[keep] / sums[keep]
    return _hermitian(vecs @ sldInBasis @ vecs.conj().T)


def qfimFromSlds(
    rho: np.ndarray,
    sldPair: Tuple[np.ndarray, np.ndarray],
    forceT: float,
    chi: float,
    basis: Basis = Basis.FORCE_PHASE,
) -> QfimResult:
    """QFIM Re Tr(rho L_k L_m) and commutator 2 Im Tr(rho L_1 L_2) from two SLDs."""
    fim = np.empty((2, 2))
    for k, first in enumerate(sldPair):
        for m, second in enumerate(sldPair):
            fim[k, m] = np.trace(rho @ first @ second).real
    fim = _symmetric(fim)
    try:
        fimInv = _symmetric(np.linalg.inv(fim))
    except np.linalg.LinAlgError as err:
        raise PhaseUnidentifiable(f"QFIM is singular: {err}") from err
    commutator = 2.0 * np.trace(rho @ sldPair[0] @ sldPair[1]).imag
    return QfimResult(fim, fimInv, float(commutator), basis, forceT, chi)


def sqlBound(nu: int, nProbes: int = 1) -> float:
    """Summed quadrature variance of an idle undriven probe, 2/(nProbes nu)."""
    return 2.0 / (nProbes * nu)


def crbReport(
    q: QfimResult, nu: int = 1, twoSite: bool = False, nProbes: Optional[int] = None
) -> CrbReport:
    """
    Cramer-Rao bounds after ``nu`` repetitions.

    ``nProbes`` is the number of displaced modes; it defaults to two for ``twoSite``
    and one otherwise. Bounds that the basis cannot provide are NaN.
    """
    if nu < 1:
        raise ConfigurationError(f"nu must be at least 1, got {nu}")
    nProbes = (2 if twoSite else 1) if nProbes is None else nProbes

    if q.basis is Basis.FORCE_PHASE:
        forcePhase = q
        summed = q.fimInv[0, 0] + q.forceT**2 * q.fimInv[1, 1]
    else:
        summed = q.fimInv[0, 0] + q.fimInv[1, 1]
        forcePhase = q.toForcePhaseBasis() if q.forceT > 0.0 else None

    if forcePhase is None:
        dF = dchi = math.nan
    else:
        dF = math.sqrt(forcePhase.fimInv[0, 0] / nu)
        dchi = math.sqrt(forcePhase.fimInv[1, 1] / nu)
    summed /= nu
    bound = sqlBound(nu, nProbes)
    return CrbReport(
        nu=nu,
        dF=dF,
        dchi=dchi,
        dq2PlusDp2=summed,
        sqlBound=bound,
        beatsSql=bool(summed < bound),
    )
