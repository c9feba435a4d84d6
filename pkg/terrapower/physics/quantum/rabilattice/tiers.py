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
Point evaluators for the three model tiers.

* ``ClosedForm`` uses the analytic steady states and QFIM closed forms (one or two sites).
* ``Lyapunov`` solves the quadratic moment flow for any chain and takes the QFIM from
  finite differences of the steady mean.
* ``FullRabi`` solves the master equation of the full spin-boson lattice.

Each evaluator turns a :py:class:`ModelParams` into a dictionary of named output
columns. Quantities a tier cannot provide for a point are ``None``.
"""
import math
from typing import Dict, List, Optional, Sequence

from . import analytic
from . import dynamics
from . import masterEquation
from . import metrology
from .errors import ConfigurationError, NumericalFailure
from .params import ModelParams, deriveDimensionless

CLOSED_FORM = "ClosedForm"
LYAPUNOV = "Lyapunov"
FULL_RABI = "FullRabi"

QFIM_GROUPS = ("qfim", "crb", "crb_ratio", "hopping_ratio", "sum_qp")


def _meanColumnNames(nSites: int) -> List[str]:
    if nSites == 1:
        return ["x_mean", "p_mean"]
    names = []
    for site in range(1, nSites + 1):
        names.extend([f"x{site}_mean", f"p{site}_mean"])
    return names


_GROUP_COLUMNS = {
    "decomposition": ["alpha", "delta", "r", "phi", "n_th"],
    "qfim": [
        "fim_FF",
        "fim_Fchi",
        "fim_chichi",
        "fim_inv_FF",
        "fim_inv_Fchi",
        "fim_inv_chichi",
        "commutator",
    ],
    "crb": ["dF", "dchi"],
    "crb_ratio": ["dF_ratio", "dchi_ratio"],
    "hopping_ratio": ["dF_kappa_ratio", "dchi_kappa_ratio"],
    "sum_qp": ["sum_qp", "sql_bound", "beats_sql"],
}


def outputColumns(outputs: Sequence[str], nSites: int) -> List[str]:
    """Column names, in output-group order, for a set of requested groups."""
    columns = []
    for group in outputs:
        if group == "means":
            columns.extend(_meanColumnNames(nSites))
        elif group in _GROUP_COLUMNS:
            columns.extend(_GROUP_COLUMNS[group])
        else:
            raise ConfigurationError(f"Unknown output group `{group}`")
    return columns


def _finite(value) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


class PointEvaluator:
    """
    Evaluate output columns for single parameter points.

    Subclasses provide :py:meth:`gaussianState` and :py:meth:`qfim`.
    """

    tier = None

    def __init__(self, options):
        self.options = options

    def __str__(self):
        return f"<{self.__class__.__name__}>"

    def gaussianState(self, p: ModelParams) -> analytic.GaussianState:
        raise NotImplementedError

    def qfim(self, p: ModelParams) -> metrology.QfimResult:
        raise NotImplementedError

    def evaluate(self, p: ModelParams, outputs: Sequence[str]) -> Dict[str, Optional[float]]:
        values = {}
        if "means" in outputs or "decomposition" in outputs:
            state = self.gaussianState(p)
            if "means" in outputs:
                values.update(zip(_meanColumnNames(p.nSites), (float(v) for v in state.mean)))
            if "decomposition" in outputs:
                values.update(self._decompositionColumns(state))

        if any(group in outputs for group in QFIM_GROUPS):
            result = self.qfim(p)
            report = metrology.crbReport(result, self.options.nu, nProbes=p.nSites)
            if "qfim" in outputs:
                values.update(self._qfimColumns(result))
            if "crb" in outputs:
                values.update(dF=_finite(report.dF), dchi=_finite(report.dchi))
            if "sum_qp" in outputs:
                values.update(
                    sum_qp=_finite(report.dq2PlusDp2),
                    sql_bound=report.sqlBound,
                    beats_sql=float(report.beatsSql),
                )
            if "crb_ratio" in outputs:
                values.update(
                    zip(_GROUP_COLUMNS["crb_ratio"], self._ratios(report, p.withChanges(g=0.0)))
                )
            if "hopping_ratio" in outputs:
                values.update(
                    zip(
                        _GROUP_COLUMNS["hopping_ratio"],
                        self._ratios(report, p.withChanges(kappa=0.0)),
                    )
                )
        return values

    @staticmethod
    def _decompositionColumns(state: analytic.GaussianState):
        """Decompose the steady state of the first site."""
        marginal = analytic.GaussianState(1, state.mean[:2], state.cov[:2, :2])
        decomposition = analytic.decomposeGaussian(marginal)
        return dict(zip(_GROUP_COLUMNS["decomposition"], decomposition))

    @staticmethod
    def _qfimColumns(result: metrology.QfimResult):
        try:
            result = result.toForcePhaseBasis()
        except NumericalFailure:
            return {}
        return {
            "fim_FF": result.fim[0, 0],
            "fim_Fchi": result.fim[0, 1],
            "fim_chichi": result.fim[1, 1],
            "fim_inv_FF": result.fimInv[0, 0],
            "fim_inv_Fchi": result.fimInv[0, 1],
            "fim_inv_chichi": result.fimInv[1, 1],
            "commutator": result.commutatorCoeff,
        }

    def _ratios(self, report: metrology.CrbReport, reference: ModelParams):
        """Bounds relative to the same probe at a reference point, or ``None`` if it has none."""
        try:
            baseline = metrology.crbReport(
                self.qfim(reference), self.options.nu, nProbes=reference.nSites
            )
        except NumericalFailure:
            return None, None
        return _finite(report.dF / baseline.dF), _finite(report.dchi / baseline.dchi)


class ClosedFormEvaluator(PointEvaluator):
    """Analytic steady states and QFIMs of one or two sites."""

    tier = CLOSED_FORM

    def _reduced(self, p: ModelParams):
        if p.nSites > 2:
            raise ConfigurationError(
                f"Closed forms cover one or two sites; got {p.nSites}. Use the Lyapunov tier."
            )
        return deriveDimensionless(p)

    def gaussianState(self, p):
        d = self._reduced(p)
        if p.nSites == 1:
            return analytic.singleModeState(d, p.chi, self.options.epsCrit)
        return analytic.twoSiteState(d, p.chi, self.options.epsCrit)

    def qfim(self, p):
        d = self._reduced(p)
        twoSite = p.nSites == 2
        if d.FT == 0.0:
            return metrology.qfimQpBasis(d, twoSite, p.chi, self.options.epsCrit)
        closed = metrology.qfimTwoSiteClosed if twoSite else metrology.qfimSingleClosed
        return closed(d, p.chi, epsCrit=self.options.epsCrit)


class LyapunovEvaluator(PointEvaluator):
    """Steady moments of the quadratic moment flow, for any chain and per-site decay."""

    tier = LYAPUNOV

    def gaussianState(self, p):
        return dynamics.steadyMomentsFromModel(p)

    def qfim(self, p):
        """Differentiate in the drive quadratures, where the steady mean is linear."""

        def stateFn(q, pq):
            return dynamics.steadyMomentsFromModel(
                p.withChanges(F=math.hypot(q, pq) * p.omega, chi=math.atan2(pq, q))
            )

        forceT = p.F / p.omega
        at = (forceT * math.cos(p.chi), forceT * math.sin(p.chi))
        result = metrology.qfimGaussianNumeric(
            stateFn, at, step=self.options.fdStep, basis=metrology.Basis.QUADRATURE
        )
        return result._replace(forceT=forceT, chi=p.chi)


class FullRabiEvaluator(PointEvaluator):
    """Exact steady states of the full spin-boson lattice master equation."""

    tier = FULL_RABI

    def _cutoff(self, p: ModelParams) -> int:
        return self.options.fockCutoff if p.nSites == 1 else self.options.fockCutoffMulti

    def densityMatrix(self, p: ModelParams) -> masterEquation.DensityMatrix:
        return masterEquation.convergedSteadyState(
            p, self._cutoff(p), masterEquation.ModelKind.FULL_RABI, self.options.solver
        )

    def gaussianState(self, p):
        moments = masterEquation.expectations(
            self.densityMatrix(p), (masterEquation.MEANS, masterEquation.COVARIANCE)
        )
        return analytic.GaussianState(moments.nModes, moments.mean, moments.cov)

    def qfim(self, p):
        return masterEquation.numericQfimExact(
            p,
            self._cutoff(p),
            masterEquation.ModelKind.FULL_RABI,
            options=self.options.solver,
        )
