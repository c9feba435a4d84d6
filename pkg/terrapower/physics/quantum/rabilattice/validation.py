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
Self-consistency checks of the three model tiers.

Each check compares two independent routes to the same quantity (closed forms against
Lyapunov solutions, Gaussian finite differences against the master equation, Fock-space
SLDs against their defining equation) or tests a known property of the bounds.
:py:func:`runValidation` runs them all and reports one :py:class:`CheckResult` each.
"""
import math
import time
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from armi import runLog

from . import analytic
from . import dynamics
from . import masterEquation
from . import metrology
from .errors import NumericalFailure
from .params import (
    DimensionlessParams,
    ModelParams,
    criticalCoupling,
    criticalStructure,
    deriveDimensionless,
)
from .sweep import SweepOptions
from .tiers import ClosedFormEvaluator, LyapunovEvaluator

DEFAULT_SEED = 20240101
ORACLE_DRAWS = 100
SLD_DRAWS = 20
SLD_CUTOFF = 40
EXACT_QFIM_CUTOFF = 60

FIG_DECAY = math.sqrt(1.04**2 - 1.0)
FIG_FORCE = 0.38
HOPPING_DECAY = 0.16


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _relative(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _randomPoint(rng, twoSite=False, maxFraction=0.95) -> DimensionlessParams:
    """A reduced point drawn well inside the normal phase."""
    gammaT = rng.uniform(0.1, 1.5)
    kappaT = rng.uniform(-0.6, 0.6) if twoSite else 0.0
    d = DimensionlessParams(0.0, gammaT, rng.uniform(0.05, 1.0), kappaT)
    lamStar = criticalCoupling(d, hopping=twoSite)
    return d._replace(lam=rng.uniform(0.0, maxFraction) * lamStar)


def checkOracleTriangle(rng, draws: int = ORACLE_DRAWS, tol: float = 1e-9) -> str:
    """Closed-form single and two-site steady states against Lyapunov solutions."""
    worst = 0.0
    for _draw in range(draws):
        twoSite = bool(rng.integers(2))
        d = _randomPoint(rng, twoSite)
        chi = rng.uniform(-math.pi, math.pi)
        if twoSite:
            closed = analytic.twoSiteState(d, chi)
        else:
            closed = analytic.singleModeState(d, chi)
        lyapunov = dynamics.steadyMoments(dynamics.momentFlow(d, 2 if twoSite else 1, chi))
        for mine, theirs in ((closed.mean, lyapunov.mean), (closed.cov, lyapunov.cov)):
            error = np.max(np.abs(mine - theirs) / np.maximum(1.0, np.abs(theirs)))
            worst = max(worst, error)
    if worst > tol:
        raise _CheckFailed(f"largest elementwise disagreement {worst:.3e} exceeds {tol:g}")
    return f"{draws} draws, largest elementwise disagreement {worst:.3e}"


def checkQfimConsistency(rng, draws: int = 20) -> str:
    """Closed-form QFIMs against their inverses, Gaussian finite differences and the master equation."""
    worstIdentity = worstGaussian = 0.0
    for _draw in range(draws):
        twoSite = bool(rng.integers(2))
        d = _randomPoint(rng, twoSite, maxFraction=0.9)
        chi = rng.uniform(-math.pi, math.pi)
        closed = (metrology.qfimTwoSiteClosed if twoSite else metrology.qfimSingleClosed)(d, chi)
        worstIdentity = max(
            worstIdentity, float(np.max(np.abs(closed.fim @ closed.fimInv - np.eye(2))))
        )
        stateFn = _analyticStateFn(d, twoSite)
        numeric = metrology.qfimGaussianNumeric(stateFn, (d.FT, chi))
        worstGaussian = max(worstGaussian, _relative(numeric.fimInv, closed.fimInv))
    if worstIdentity > 1e-10:
        raise _CheckFailed(f"QFIM times its inverse is off the identity by {worstIdentity:.3e}")
    if worstGaussian > 1e-6:
        raise _CheckFailed(f"Gaussian finite-difference QFIM differs by {worstGaussian:.3e}")

    p = ModelParams.fromDimensionless(0.5, 0.3, 0.3, chi=0.4)
    d = deriveDimensionless(p)
    exact = masterEquation.numericQfimExact(p, EXACT_QFIM_CUTOFF)
    closed = metrology.qfimSingleClosed(d, p.chi)
    exactError = _relative(exact.fimInv, closed.fimInv)
    if exactError > 1e-4:
        raise _CheckFailed(f"master-equation QFIM differs from the closed form by {exactError:.3e}")
    return (
        f"identity {worstIdentity:.1e}, Gaussian {worstGaussian:.1e}, "
        f"master equation {exactError:.1e}"
    )


def _analyticStateFn(d: DimensionlessParams, twoSite: bool):
    def stateFn(forceT, chi):
        point = d._replace(FT=forceT)
        if twoSite:
            return analytic.twoSiteState(point, chi)
        return analytic.singleModeState(point, chi)

    return stateFn


def checkSld(rng, draws: int = SLD_DRAWS, tol: float = 1e-6) -> str:
    """Fock-space SLDs against 2 d(rho) = {L, rho}, and their commutator against the closed form."""
    worstResidual = worstCommutator = 0.0
    for _draw in range(draws):
        d = DimensionlessParams(0.0, rng.uniform(0.3, 1.0), rng.uniform(0.05, 0.4))
        d = d._replace(lam=rng.uniform(0.0, 0.7) * criticalCoupling(d))
        chi = rng.uniform(-math.pi, math.pi)
        s = analytic.decomposeSingle(d, chi)
        rho = metrology.steadyStateFock(s, SLD_CUTOFF)
        slds = metrology.sldFock(s, d, d.FT, chi, SLD_CUTOFF)

        def rhoAt(forceT, phase):
            point = d._replace(FT=forceT)
            return metrology.steadyStateFock(analytic.decomposeSingle(point, phase), SLD_CUTOFF)

        h = 1e-5
        drhoForce = (rhoAt(d.FT + h, chi) - rhoAt(d.FT - h, chi)) / (2.0 * h)
        drhoPhase = (rhoAt(d.FT, chi + h) - rhoAt(d.FT, chi - h)) / (2.0 * h)
        for drho, sld in zip((drhoForce, drhoPhase), slds):
            worstResidual = max(worstResidual, metrology.sldResidual(rho, drho, sld))

        fromSlds = metrology.qfimFromSlds(rho, slds, d.FT, chi)
        expected = metrology.sldCommutator(d)
        worstCommutator = max(
            worstCommutator, abs(fromSlds.commutatorCoeff - expected) / abs(expected)
        )
    if worstResidual > tol:
        raise _CheckFailed(f"SLD residual {worstResidual:.3e} exceeds {tol:g}")
    if worstCommutator > 1e-6:
        raise _CheckFailed(f"SLD commutator differs by {worstCommutator:.3e} (relative)")
    return f"residual {worstResidual:.1e}, commutator {worstCommutator:.1e}"


def _singleBounds(lam, chi, gammaT=FIG_DECAY, forceT=FIG_FORCE) -> metrology.CrbReport:
    d = DimensionlessParams(lam, gammaT, forceT)
    return metrology.crbReport(metrology.qfimSingleClosed(d, chi))


def _fitExponent(gaps, values) -> float:
    slope, _intercept = np.polyfit(np.log(gaps), np.log(values), 1)
    return float(slope)


def checkCriticalScaling(points: int = 40) -> str:
    """Square-root divergence of one bound and a finite limit of the other, on both optimal phases."""
    structure = criticalStructure(DimensionlessParams(0.0, FIG_DECAY, FIG_FORCE))
    lambdaC = structure.lambdaC
    fractions = 1.0 - np.geomspace(0.1, 0.001, points)
    gaps = lambdaC * (1.0 - fractions)
    limit = lambdaC**2 / math.sqrt(2.0)

    forceOptimal = [_singleBounds(lambdaC * f, structure.chiOptCritical) for f in fractions]
    exponent = _fitExponent(gaps, [r.dF for r in forceOptimal])
    phaseLimit = forceOptimal[-1].dchi * FIG_FORCE
    if abs(exponent - 0.5) > 0.02:
        raise _CheckFailed(f"force bound exponent {exponent:.4f} is not 0.5 +/- 0.02")
    if abs(phaseLimit / limit - 1.0) > 0.01:
        raise _CheckFailed(f"phase bound limit {phaseLimit:.4f} is not {limit:.4f} within 1%")

    companion = [_singleBounds(lambdaC * f, structure.chiOptCompanion) for f in fractions]
    swappedExponent = _fitExponent(gaps, [r.dchi for r in companion])
    swappedLimit = companion[-1].dF
    if abs(swappedExponent - 0.5) > 0.02:
        raise _CheckFailed(f"companion phase exponent {swappedExponent:.4f} is not 0.5 +/- 0.02")
    if abs(swappedLimit / limit - 1.0) > 0.01:
        raise _CheckFailed(f"companion force limit {swappedLimit:.4f} is not {limit:.4f} within 1%")
    return (
        f"exponents {exponent:.4f} / {swappedExponent:.4f}, "
        f"limits {phaseLimit:.4f} / {swappedLimit:.4f} (expected {limit:.4f})"
    )


def checkSqlBeating() -> str:
    """The summed bound beats the standard quantum limit exactly when the critical coupling allows it."""
    details = []
    for gammaT in (0.16, 0.5, 0.99, 1.01):
        lambdaC = math.sqrt(1.0 + gammaT**2)
        d = DimensionlessParams(0.9999 * lambdaC, gammaT, FIG_FORCE)
        report = metrology.crbReport(metrology.qfimSingleClosed(d, criticalStructure(d).chiOpt))
        if report.beatsSql != (gammaT < 1.0):
            raise _CheckFailed(
                f"gamma = {gammaT}: summed bound {report.dq2PlusDp2:.4f} against SQL "
                f"{report.sqlBound:.4f} contradicts lambda_c^4 / 2"
            )
        limit = lambdaC**4 / 2.0
        if abs(report.dq2PlusDp2 / limit - 1.0) > 0.01:
            raise _CheckFailed(
                f"gamma = {gammaT}: summed bound {report.dq2PlusDp2:.4f} is not near {limit:.4f}"
            )
        details.append(f"{gammaT:g}: {report.dq2PlusDp2:.4f}")

    d = DimensionlessParams(0.0, HOPPING_DECAY, FIG_FORCE, kappaT=-0.45)
    structure = criticalStructure(d)
    d = d._replace(lam=0.99 * structure.lambdaPlus)
    report = metrology.crbReport(
        metrology.qfimTwoSiteClosed(d, criticalStructure(d).chiOptHopping), twoSite=True
    )
    if report.beatsSql != (structure.lambdaPlus**2 < 2.0):
        raise _CheckFailed(
            f"two sites: summed bound {report.dq2PlusDp2:.4f} against SQL {report.sqlBound:.4f}"
        )
    details.append(f"two sites: {report.dq2PlusDp2:.4f}")
    return ", ".join(details)


def checkHoppingCriticality(tol: float = 1e-8) -> str:
    """Hurwitz boundary of the two-site drift against the hopping-modified critical coupling."""
    worst = 0.0
    for kappaT in (0.0, -0.2, -0.4, -0.47):
        d = DimensionlessParams(0.0, HOPPING_DECAY, FIG_FORCE, kappaT)
        boundary = dynamics.hurwitzBoundary(d, nSites=2)
        worst = max(worst, abs(boundary - criticalStructure(d).lambdaPlus))
    if worst > tol:
        raise _CheckFailed(f"Hurwitz boundary differs from lambda_+ by {worst:.3e}")

    eta = 4e-3
    lam = 2.0 * 4.5 * math.sqrt(eta)
    d = DimensionlessParams(lam, HOPPING_DECAY, 0.13, 0.0, eta)
    kappaPlus = criticalStructure(d).kappaPlus
    near, far = (
        abs(analytic.meanTwoSite(d._replace(kappaT=kappaPlus + offset), math.pi / 7)[0])
        for offset in (0.005, 0.05)
    )
    if near < 10.0 * far:
        raise _CheckFailed(f"|<x>| only grows from {far:.3f} to {near:.3f} approaching kappa_+")
    return f"boundary error {worst:.1e}, |<x>| growth {near / far:.1f}x towards kappa_+"


def checkHoppingEnhancement(points: int = 60) -> str:
    """Hopping improves both bounds everywhere in the normal phase between kappa_min and zero."""
    lam, chi = 0.59, math.pi / 3
    d = DimensionlessParams(lam, HOPPING_DECAY, 0.13)
    structure = criticalStructure(d)
    margin = 0.005
    grid = np.concatenate(
        [
            np.linspace(-0.02, structure.kappaPlus + margin, points),
            np.linspace(structure.kappaMinus - margin, structure.kappaMin + margin, points // 2),
        ]
    )
    reference = metrology.crbReport(metrology.qfimTwoSiteClosed(d, chi), twoSite=True)
    worst = 0.0
    for kappaT in grid:
        report = metrology.crbReport(
            metrology.qfimTwoSiteClosed(d._replace(kappaT=kappaT), chi), twoSite=True
        )
        worst = max(worst, report.dF / reference.dF, report.dchi / reference.dchi)
    if worst >= 1.0:
        raise _CheckFailed(f"a sensitivity ratio reaches {worst:.4f}")
    return f"largest ratio {worst:.4f} over {len(grid)} hoppings"


def checkPhaseBoundScaling() -> str:
    """Lyapunov-tier QFIM at omega != 1 against the reduced closed form."""
    p = ModelParams.fromDimensionless(0.8, FIG_DECAY, FIG_FORCE, chi=0.3, omega=2.5)

    options = SweepOptions("validation")
    numeric = LyapunovEvaluator(options).qfim(p).toForcePhaseBasis()
    closed = ClosedFormEvaluator(options).qfim(p)
    error = _relative(numeric.fimInv, closed.fimInv)
    if error > 1e-6:
        raise _CheckFailed(f"phase-bound scaling differs by {error:.3e}")
    return f"relative difference {error:.1e}"


class _CheckFailed(Exception):
    pass


CHECKS = [
    ("oracle triangle", lambda rng: checkOracleTriangle(rng)),
    ("QFIM consistency", lambda rng: checkQfimConsistency(rng)),
    ("SLD residual and commutator", lambda rng: checkSld(rng)),
    ("critical scaling", lambda rng: checkCriticalScaling()),
    ("SQL beating", lambda rng: checkSqlBeating()),
    ("hopping criticality", lambda rng: checkHoppingCriticality()),
    ("hopping enhancement", lambda rng: checkHoppingEnhancement()),
    ("phase-bound scaling", lambda rng: checkPhaseBoundScaling()),
]


def runCheck(name: str, check: Callable, rng) -> CheckResult:
    start = time.perf_counter()
    try:
        detail = check(rng)
        passed = True
    except (_CheckFailed, NumericalFailure) as err:
        detail = f"{err.__class__.__name__}: {err}" if isinstance(err, NumericalFailure) else str(err)
        passed = False
    elapsed = time.perf_counter() - start
    line = f"{'PASS' if passed else 'FAIL'} {name}: {detail} ({elapsed:.1f} s)"
    if passed:
        runLog.info(line)
    else:
        runLog.warning(line)
    return CheckResult(name, passed, detail, elapsed)


def runValidation(seed: int = DEFAULT_SEED, only: Optional[List[str]] = None) -> List[CheckResult]:
    """Run the checks (all, or those named in ``only``) with a seeded generator."""
    rng = np.random.default_rng(seed)
    runLog.important(f"Running rabilattice validation with seed {seed}")
    return [runCheck(name, check, rng) for name, check in CHECKS if not only or name in only]
