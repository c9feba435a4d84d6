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
Parameter sweeps over the Rabi lattice.

A :py:class:`SweepSpec` names a base parameter point, the axis that varies, the grid
and the output column groups. :py:class:`SweepRunner` dispatches one
:py:class:`SweepExecuter` per grid point to a worker pool and gathers the rows back in
grid order. Points that fail numerically (for example at the critical coupling) come
back as rows of empty cells with a warning.
"""
import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from armi import runLog
from armi.physics import executers
from armi.settings import caseSettings

from . import dynamics
from . import settings
from .errors import ConfigurationError, CriticalDivergence, NumericalFailure
from .masterEquation import SolverOptions, SteadyMethod
from .params import (
    DEFAULT_CRIT_TOLERANCE,
    ModelParams,
    PhaseRegion,
    criticalStructure,
    deriveDimensionless,
    phaseRegion,
    reduceAngle,
)
from .tiers import CLOSED_FORM, outputColumns


class SweepOptions(executers.ExecutionOptions):
    """Numerical and execution controls shared by every point of a sweep."""

    def __init__(self, label=None):
        executers.ExecutionOptions.__init__(self, label)
        self.nu = 1
        self.epsCrit = DEFAULT_CRIT_TOLERANCE
        self.fdStep = 1e-5
        self.fockCutoff = 40
        self.fockCutoffMulti = 20
        self.solver = SolverOptions()
        self.workers = 0
        self.poolKind = "process"
        self.outputDirectory = "."
        self.templatePath = settings.DEFAULT_PLOT_TEMPLATE
        self.outputFile = f"{label or 'sweep'}.csv"

    def fromUserSettings(self, cs: caseSettings.Settings):
        """Load settings from a case settings object"""
        self.nu = cs[settings.CONF_REPETITIONS]
        self.epsCrit = cs[settings.CONF_CRIT_TOLERANCE]
        self.fdStep = cs[settings.CONF_FD_STEP]
        self.fockCutoff = cs[settings.CONF_FOCK_CUTOFF]
        self.fockCutoffMulti = cs[settings.CONF_FOCK_CUTOFF_MULTI]
        self.solver = SolverOptions(
            method=SteadyMethod(cs[settings.CONF_STEADY_METHOD]),
            tolSteady=cs[settings.CONF_STEADY_TOLERANCE],
            evolveTime=cs[settings.CONF_EVOLVE_TIME],
            strict=cs[settings.CONF_STRICT_CONVERGENCE],
            nullSpaceMaxDim=cs[settings.CONF_NULL_SPACE_MAX_DIM],
            tailGuard=cs[settings.CONF_TAIL_MASS_GUARD],
            tolMoments=cs[settings.CONF_MOMENT_TOLERANCE],
            maxSuperoperatorDim=cs[settings.CONF_MAX_SUPEROPERATOR_DIM],
        )
        self.workers = cs[settings.CONF_NUM_WORKERS]
        self.poolKind = cs[settings.CONF_POOL_KIND]
        self.outputDirectory = cs[settings.CONF_OUTPUT_DIRECTORY]
        self.templatePath = cs[settings.CONF_PLOT_TEMPLATE_PATH]
        self.outputFile = os.path.join(self.outputDirectory, f"{cs.caseTitle}_sweep.csv")


def modelFromUserSettings(cs: caseSettings.Settings) -> ModelParams:
    return ModelParams.create(
        omega=cs[settings.CONF_BOSON_FREQUENCY],
        Omega=cs[settings.CONF_SPIN_FREQUENCY],
        g=cs[settings.CONF_COUPLING],
        F=cs[settings.CONF_FORCE],
        chi=cs[settings.CONF_PHASE],
        gamma=cs[settings.CONF_DECAY],
        kappa=cs[settings.CONF_HOPPING],
        nSites=cs[settings.CONF_NUM_SITES],
    )


def pointRegion(p: ModelParams, epsCrit: float = DEFAULT_CRIT_TOLERANCE) -> PhaseRegion:
    """
    Phase region of a parameter point.

    One or two uniformly decaying sites use the critical couplings; longer or
    non-uniform chains fall back to the sign of the drift's spectral abscissa.
    """
    if p.nSites <= 2 and p.isUniformDecay:
        return phaseRegion(deriveDimensionless(p), hopping=p.nSites == 2, epsCrit=epsCrit)
    abscissa = dynamics.spectralAbscissa(dynamics.momentFlowFromModel(p).drift)
    return PhaseRegion.NORMAL if abscissa < 0.0 else PhaseRegion.SUPERRADIANT


class SweepSpec(NamedTuple):
    """
    What to sweep.

    Attributes
    ----------
    base : ModelParams
        Parameters shared by every point.
    axis : str
        One of ``lambda``, ``chi``, ``kappa_t`` or ``g_over_omega``.
    grid : tuple of float
        Strictly monotone axis values.
    outputs : tuple of str
        Output column groups.
    modelTier : str
        ``ClosedForm``, ``Lyapunov`` or ``FullRabi``.
    phaseMode : str
        ``fixed`` keeps the base phase; the other modes set the drive phase of every
        point to one of its optimal phases.
    allowSuperradiant : bool
        Keep grid points beyond the critical coupling instead of rejecting the sweep.
    """

    base: ModelParams
    axis: str
    grid: Tuple[float, ...]
    outputs: Tuple[str, ...]
    modelTier: str = CLOSED_FORM
    phaseMode: str = "fixed"
    allowSuperradiant: bool = False

    def columns(self) -> List[str]:
        return outputColumns(self.outputs, self.base.nSites)

    def pointParams(self, value: float) -> ModelParams:
        """Parameters of the grid point at ``value``."""
        base = self.base
        if self.axis == "lambda":
            p = base.withChanges(g=0.5 * value * math.sqrt(base.omega * base.Omega))
        elif self.axis == "g_over_omega":
            p = base.withChanges(g=value * base.omega)
        elif self.axis == "kappa_t":
            p = base.withChanges(kappa=value * base.omega)
        elif self.axis == "chi":
            p = base.withChanges(chi=value)
        else:
            raise ConfigurationError(f"Unknown sweep axis `{self.axis}`")
        if self.phaseMode == "fixed":
            return p
        return p.withChanges(chi=self._trackedPhase(p))

    def _trackedPhase(self, p: ModelParams) -> float:
        structure = criticalStructure(deriveDimensionless(p))
        hopping = p.nSites >= 2
        if self.phaseMode == "chiOpt":
            return structure.chiOptHopping if hopping else structure.chiOpt
        if self.phaseMode == "chiOptCompanion":
            optimal = structure.chiOptHopping if hopping else structure.chiOpt
            return reduceAngle(optimal + 0.5 * math.pi)
        if self.phaseMode == "chiOptCritical":
            if not hopping:
                return structure.chiOptCritical
            if structure.chiOptHoppingCritical is None:
                raise CriticalDivergence(
                    f"kappa = {p.kappa} has no real hopping-modified critical coupling"
                )
            return structure.chiOptHoppingCritical
        raise ConfigurationError(f"Unknown phase mode `{self.phaseMode}`")

    def validate(self, epsCrit: float = DEFAULT_CRIT_TOLERANCE):
        """Raise :py:class:`ConfigurationError` describing the first problem found."""
        if self.axis not in settings.SWEEP_AXES:
            raise ConfigurationError(
                f"Sweep axis `{self.axis}` is not one of {settings.SWEEP_AXES}"
            )
        if self.modelTier not in settings.MODEL_TIERS:
            raise ConfigurationError(
                f"Model tier `{self.modelTier}` is not one of {settings.MODEL_TIERS}"
            )
        if self.phaseMode not in settings.PHASE_MODES:
            raise ConfigurationError(
                f"Phase mode `{self.phaseMode}` is not one of {settings.PHASE_MODES}"
            )
        if self.phaseMode != "fixed" and self.axis == "chi":
            raise ConfigurationError("A chi sweep cannot also track an optimal phase")
        if self.phaseMode != "fixed" and not self.base.isUniformDecay:
            raise ConfigurationError(
                f"Phase mode `{self.phaseMode}` needs the same decay on every site, "
                f"got {self.base.gamma}; use `fixed` with site-dependent decay"
            )
        if self.modelTier == CLOSED_FORM and self.base.nSites > 2:
            raise ConfigurationError("Closed forms cover one or two sites only")
        if self.modelTier == CLOSED_FORM and not self.base.isUniformDecay:
            raise ConfigurationError("Closed forms need the same decay on every site")
        self.columns()

        steps = np.diff(np.asarray(self.grid, dtype=float))
        if len(steps) and not (np.all(steps > 0.0) or np.all(steps < 0.0)):
            raise ConfigurationError("Sweep grid must be strictly monotone")

        if self.allowSuperradiant:
            return
        for value in self.grid:
            if pointRegion(self.pointParams(value), epsCrit) is PhaseRegion.SUPERRADIANT:
                raise ConfigurationError(
                    f"Grid point {self.axis} = {value!r} lies in the superradiant phase; "
                    f"set `{settings.CONF_ALLOW_SUPERRADIANT}` to keep it"
                )

    def configHash(self) -> str:
        """Stable digest of everything that determines the sweep's output."""
        text = repr(
            (
                tuple(self.base),
                self.axis,
                tuple(float(v) for v in self.grid),
                tuple(self.outputs),
                self.modelTier,
                self.phaseMode,
                self.allowSuperradiant,
            )
        )
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def sweepSpecFromUserSettings(cs: caseSettings.Settings) -> SweepSpec:
    """Build a sweep from case settings; an explicit grid wins over a range."""
    grid = list(cs[settings.CONF_SWEEP_GRID])
    if not grid and cs[settings.CONF_SWEEP_RANGE]:
        start, stop, count = cs[settings.CONF_SWEEP_RANGE]
        if int(count) != count or count < 1:
            raise ConfigurationError(
                f"`{settings.CONF_SWEEP_RANGE}` count must be a positive integer, got {count}"
            )
        grid = list(np.linspace(start, stop, int(count)))
    return SweepSpec(
        base=modelFromUserSettings(cs),
        axis=cs[settings.CONF_SWEEP_AXIS],
        grid=tuple(float(v) for v in grid),
        outputs=tuple(cs[settings.CONF_SWEEP_OUTPUTS]),
        modelTier=cs[settings.CONF_MODEL_TIER],
        phaseMode=cs[settings.CONF_PHASE_MODE],
        allowSuperradiant=cs[settings.CONF_ALLOW_SUPERRADIANT],
    )


class ResultRow(NamedTuple):
    """One grid point: the axis value and one entry per column, ``None`` when missing."""

    axisValue: float
    values: Tuple[Optional[float], ...]


class SweepExecuter:
    """Evaluate one grid point of a sweep."""

    def __init__(self, options: SweepOptions, spec: SweepSpec, value: float):
        self.options = options
        self.spec = spec
        self.value = value

    def run(self) -> ResultRow:
        evaluator = rabiFactory.makeEvaluator(self.spec.modelTier, self.options)
        try:
            values = evaluator.evaluate(self.spec.pointParams(self.value), self.spec.outputs)
        except NumericalFailure as err:
            runLog.warning(
                f"Sweep point {self.spec.axis} = {self.value!r} gave no result: "
                f"{err.__class__.__name__}: {err}"
            )
            values = {}
        return ResultRow(self.value, tuple(values.get(column) for column in self.spec.columns()))


def _runPoint(options: SweepOptions, spec: SweepSpec, value: float) -> ResultRow:
    return rabiFactory.makeExecuter(options, spec, value).run()


def availableWorkers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


class SweepRunner:
    """Run every point of a sweep, possibly in parallel, and return rows in grid order."""

    def __init__(self, spec: SweepSpec, options: SweepOptions):
        self.spec = spec
        self.options = options

    def invoke(self) -> List[ResultRow]:
        self.spec.validate(self.options.epsCrit)
        grid = list(self.spec.grid)
        if not grid:
            runLog.info("Sweep grid is empty; nothing to evaluate")
            return []

        workers = min(self.options.workers or availableWorkers(), len(grid))
        runLog.important(
            f"Running a {len(grid)}-point {self.spec.modelTier} sweep over "
            f"{self.spec.axis} with {workers} worker(s)"
        )
        if workers <= 1:
            return [_runPoint(self.options, self.spec, value) for value in grid]

        poolClass = ProcessPoolExecutor if self.options.poolKind == "process" else ThreadPoolExecutor
        rows = [None] * len(grid)
        with poolClass(max_workers=workers) as pool:
            futures = {
                pool.submit(_runPoint, self.options, self.spec, value): index
                for index, value in enumerate(grid)
            }
            for future in as_completed(futures):
                rows[futures[future]] = future.result()
        return rows


def runSweep(spec: SweepSpec, options: Optional[SweepOptions] = None) -> List[ResultRow]:
    """Evaluate a sweep with the registered runner."""
    return rabiFactory.makeRunner(spec, options or SweepOptions("sweep")).invoke()


from .rabiFactory import rabiFactory
