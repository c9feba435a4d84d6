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
Figure presets.

Each preset runs the fixed set of sweeps behind one figure, writes one
``figN_data_<curve>.csv`` per curve and a ``figN.gp`` gnuplot script that redraws the
panels from those files.

Exact (``FullRabi``) markers use eta = 4e-3 and the configured Fock cutoffs (at least
40 for one site). They are the slow part of a preset and may be skipped.
"""
import copy
import math
import os
from typing import Dict, List, Sequence

import numpy as np

from armi import runLog

from .errors import ConfigurationError, ValidationFailure
from .params import ModelParams, criticalStructure, deriveDimensionless
from .sweep import ResultRow, SweepOptions, SweepSpec, runSweep
from .tiers import CLOSED_FORM, FULL_RABI
from .writers import FigureScriptWriter, PlotPanel, PlotSeries, writeSweep

FIGURE_ETA = 4e-3
MIN_SINGLE_SITE_CUTOFF = 40

FIG1_LAMBDA_C = 1.04
FIG1_FORCE = 0.38
FIG1_COUPLINGS = (0.85, 0.9, 0.95)
FIG1_CURVE_POINTS = 100
FIG1_EXACT_POINTS = 12
FIG1_OVERLAY_TOLERANCE = 0.05

FIG2_LAMBDA_RATIO = 0.95

FIG3_FORCE = 0.13
FIG3_DECAY = 0.16
FIG3_PHASE = math.pi / 7
FIG3_HOPPINGS = (-0.4, -0.47, -0.5)
FIG3_G_OVER_OMEGA = (3.1, 3.9, 4.5)

FIG4_DECAY = 0.16
FIG4_COUPLING = 0.59
FIG4_PHASE = math.pi / 3
FIG4_FORCE = 0.13
FIG4_HOPPINGS = (-0.45, 0.0)

# closest approach to a critical point, as a fraction of the distance scale of each axis
CRITICAL_MARGIN = 0.005


def _decayFromLambdaC(lambdaC: float) -> float:
    return math.sqrt(lambdaC * lambdaC - 1.0)


def _column(spec: SweepSpec, name: str) -> int:
    """gnuplot column of an output, with the axis in column 1."""
    return spec.columns().index(name) + 2


def _columnValues(rows: Sequence[ResultRow], spec: SweepSpec, name: str) -> np.ndarray:
    index = spec.columns().index(name)
    return np.array(
        [np.nan if row.values[index] is None else row.values[index] for row in rows], dtype=float
    )


class FigureBuilder:
    """
    Run the sweeps of one figure and write its data and plot script.

    Parameters
    ----------
    number : int
        Figure number.
    outputDirectory : str
        Where the CSVs and the plot script go.
    options : SweepOptions
        Execution controls shared by all sweeps.
    exact : bool
        Also compute the ``FullRabi`` markers.
    """

    number = None
    title = None

    def __init__(self, outputDirectory=".", options=None, exact=True):
        self.outputDirectory = outputDirectory
        self.options = options or SweepOptions(f"fig{self.number}")
        self.exact = exact
        self.written = []

    def build(self) -> List[str]:
        runLog.important(f"Building figure {self.number}: {self.title}")
        os.makedirs(self.outputDirectory, exist_ok=True)
        panels = self._makePanels()
        script = os.path.join(self.outputDirectory, f"fig{self.number}.gp")
        self.written.append(FigureScriptWriter(self.title, panels).write(script))
        return self.written

    def _makePanels(self) -> List[PlotPanel]:
        raise NotImplementedError

    def _exactOptions(self, nSites: int = 1) -> SweepOptions:
        options = copy.copy(self.options)
        if nSites == 1:
            options.fockCutoff = max(options.fockCutoff, MIN_SINGLE_SITE_CUTOFF)
        return options

    def _run(self, spec: SweepSpec, curve: str, options=None):
        """Run a sweep, write ``figN_data_<curve>.csv`` and return (rows, path)."""
        options = options or self.options
        rows = runSweep(spec, options)
        path = os.path.join(self.outputDirectory, f"fig{self.number}_data_{curve}.csv")
        writeSweep(rows, spec, options, path)
        self.written.append(path)
        return rows, path


class Figure1(FigureBuilder):
    """Steady-state position quadrature versus drive phase for three couplings."""

    number = 1
    title = "Steady-state position quadrature versus drive phase"

    def _makePanels(self):
        gammaT = _decayFromLambdaC(FIG1_LAMBDA_C)
        series = []
        for lam in FIG1_COUPLINGS:
            base = ModelParams.fromDimensionless(lam, gammaT, FIG1_FORCE, eta=FIGURE_ETA)
            curve = SweepSpec(
                base,
                "chi",
                tuple(np.linspace(0.0, 2.0 * math.pi, FIG1_CURVE_POINTS, endpoint=False)),
                ("means",),
                CLOSED_FORM,
            )
            _rows, path = self._run(curve, f"closed_lambda{lam:g}")
            series.append(PlotSeries(path, _column(curve, "x_mean"), f"closed form, lambda = {lam:g}"))
            if self.exact:
                series.append(self._exactSeries(base, lam))
        return [PlotPanel("a", "<x> versus chi", "chi", "<x>", series)]

    def _exactSeries(self, base: ModelParams, lam: float) -> PlotSeries:
        grid = tuple(np.linspace(0.0, 2.0 * math.pi, FIG1_EXACT_POINTS, endpoint=False))
        exact = SweepSpec(base, "chi", grid, ("means",), FULL_RABI)
        exactRows, path = self._run(exact, f"exact_lambda{lam:g}", self._exactOptions())
        closedRows = runSweep(exact._replace(modelTier=CLOSED_FORM), self.options)
        deviation = checkOverlay(
            _columnValues(closedRows, exact, "x_mean"), _columnValues(exactRows, exact, "x_mean")
        )
        runLog.info(
            f"Exact and closed-form <x> at lambda = {lam:g} differ by at most "
            f"{deviation:.3%} of the curve's peak"
        )
        return PlotSeries(path, _column(exact, "x_mean"), f"exact, lambda = {lam:g}", "points")


def checkOverlay(closed: np.ndarray, exact: np.ndarray, tolerance: float = FIG1_OVERLAY_TOLERANCE):
    """
    Return the largest exact-minus-closed deviation relative to the closed curve's peak.

    Raises :py:class:`ValidationFailure` above ``tolerance`` or when no point has both
    values.
    """
    both = np.isfinite(closed) & np.isfinite(exact)
    if not np.any(both):
        raise ValidationFailure("No grid point has both an exact and a closed-form value")
    scale = np.max(np.abs(closed[both]))
    deviation = np.max(np.abs(exact[both] - closed[both])) / scale
    if deviation > tolerance:
        raise ValidationFailure(
            f"Exact steady states deviate from the closed form by {deviation:.3%} "
            f"of the peak, above the {tolerance:.0%} band"
        )
    return deviation


class Figure2(FigureBuilder):
    """Sensitivity ratios versus phase and sensitivities versus coupling."""

    number = 2
    title = "Minimal detectable force and phase"

    def _makePanels(self):
        gammaT = _decayFromLambdaC(FIG1_LAMBDA_C)
        lambdaC = FIG1_LAMBDA_C

        base = ModelParams.fromDimensionless(
            FIG2_LAMBDA_RATIO * lambdaC, gammaT, FIG1_FORCE, eta=FIGURE_ETA
        )
        ratios = SweepSpec(
            base,
            "chi",
            tuple(np.linspace(0.0, math.pi, 181)),
            ("crb_ratio",),
            CLOSED_FORM,
        )
        _rows, ratioPath = self._run(ratios, "a")
        panelA = PlotPanel(
            "a",
            f"lambda = {FIG2_LAMBDA_RATIO:g} lambda_c",
            "chi",
            "ratio",
            [
                PlotSeries(ratioPath, _column(ratios, "dF_ratio"), "dF/dF_0"),
                PlotSeries(ratioPath, _column(ratios, "dchi_ratio"), "dchi/dchi_0"),
            ],
        )

        lambdas = tuple(np.linspace(0.02, 1.0 - CRITICAL_MARGIN, 150) * lambdaC)
        series = []
        for mode, curve in (("chiOptCritical", "b_opt"), ("chiOptCompanion", "b_companion")):
            spec = SweepSpec(base, "lambda", lambdas, ("crb",), CLOSED_FORM, phaseMode=mode)
            _rows, path = self._run(spec, curve)
            series.append(PlotSeries(path, _column(spec, "dF"), f"dF, {mode}"))
            series.append(PlotSeries(path, _column(spec, "dchi"), f"dchi, {mode}"))
        panelB = PlotPanel("b", "sensitivity versus coupling", "lambda", "bound", series, True)
        return [panelA, panelB]


class Figure3(FigureBuilder):
    """Two-site position quadrature versus coupling and versus hopping."""

    number = 3
    title = "Average position quadrature of a two-site lattice"

    def _base(self, lam: float = 0.0, kappaT: float = 0.0) -> ModelParams:
        return ModelParams.fromDimensionless(
            lam, FIG3_DECAY, FIG3_FORCE, chi=FIG3_PHASE, kappaT=kappaT, eta=FIGURE_ETA, nSites=2
        )

    def _makePanels(self):
        return [self._couplingPanel(), self._hoppingPanel()]

    def _couplingPanel(self):
        series = []
        for kappaT in FIG3_HOPPINGS:
            base = self._base(kappaT=kappaT)
            lambdaPlus = criticalStructure(deriveDimensionless(base)).lambdaPlus
            gMax = lambdaPlus / (2.0 * math.sqrt(FIGURE_ETA))
            spec = SweepSpec(
                base,
                "g_over_omega",
                tuple(np.linspace(0.0, (1.0 - CRITICAL_MARGIN) * gMax, 120)),
                ("means",),
                CLOSED_FORM,
            )
            _rows, path = self._run(spec, f"a_kappa{kappaT:g}")
            series.append(PlotSeries(path, _column(spec, "x1_mean"), f"kappa = {kappaT:g}"))
            if self.exact:
                exact = spec._replace(
                    grid=tuple(np.linspace(0.1, 0.9, 8) * gMax), modelTier=FULL_RABI
                )
                _rows, path = self._run(exact, f"a_exact_kappa{kappaT:g}", self._exactOptions(2))
                series.append(
                    PlotSeries(path, _column(exact, "x1_mean"), f"exact, kappa = {kappaT:g}", "points")
                )
        return PlotPanel("a", "<x_k> versus g/omega", "g/omega", "<x_k>", series)

    def _hoppingPanel(self):
        series = []
        for gOverOmega in FIG3_G_OVER_OMEGA:
            lam = 2.0 * gOverOmega * math.sqrt(FIGURE_ETA)
            base = self._base(lam=lam)
            grid = hoppingGrid(criticalStructure(deriveDimensionless(base)).kappaPlus, 120)
            spec = SweepSpec(base, "kappa_t", grid, ("means",), CLOSED_FORM)
            _rows, path = self._run(spec, f"b_g{gOverOmega:g}")
            series.append(PlotSeries(path, _column(spec, "x1_mean"), f"g/omega = {gOverOmega:g}"))
            if self.exact:
                exact = spec._replace(grid=tuple(grid[:: len(grid) // 8][:8]), modelTier=FULL_RABI)
                _rows, path = self._run(exact, f"b_exact_g{gOverOmega:g}", self._exactOptions(2))
                series.append(
                    PlotSeries(
                        path, _column(exact, "x1_mean"), f"exact, g/omega = {gOverOmega:g}", "points"
                    )
                )
        return PlotPanel("b", "<x_k> versus hopping", "kappa/omega", "<x_k>", series)


def hoppingGrid(kappaPlus, points: int) -> tuple:
    """
    Hoppings from zero down towards the divergence at ``kappaPlus``.

    Without a real critical hopping the normal phase reaches down to kappa = -1 and the
    grid stops short of it.
    """
    end = -1.0 + 2.0 * CRITICAL_MARGIN if kappaPlus is None else kappaPlus + CRITICAL_MARGIN
    return tuple(np.linspace(0.0, end, points))


class Figure4(FigureBuilder):
    """Hopping-enhanced sensitivity of a two-site lattice."""

    number = 4
    title = "Minimal detectable force and phase with hopping"

    def _makePanels(self):
        return [self._ratioPanel(), self._couplingPanel()]

    def _ratioPanel(self):
        base = ModelParams.fromDimensionless(
            FIG4_COUPLING, FIG4_DECAY, FIG4_FORCE, chi=FIG4_PHASE, eta=FIGURE_ETA, nSites=2
        )
        structure = criticalStructure(deriveDimensionless(base))
        series = []
        for curve, grid in hoppingRatioSegments(structure.kappaPlus, structure.kappaMinus).items():
            spec = SweepSpec(base, "kappa_t", grid, ("hopping_ratio",), CLOSED_FORM)
            _rows, path = self._run(spec, f"a_{curve}")
            series.append(PlotSeries(path, _column(spec, "dF_kappa_ratio"), f"dF(kappa)/dF, {curve}"))
            series.append(
                PlotSeries(path, _column(spec, "dchi_kappa_ratio"), f"dchi(kappa)/dchi, {curve}")
            )
        return PlotPanel("a", f"lambda = {FIG4_COUPLING:g}", "kappa/omega", "ratio", series)

    def _couplingPanel(self):
        series = []
        for kappaT, style in zip(FIG4_HOPPINGS, ("lines", "lines dashtype 2")):
            base = ModelParams.fromDimensionless(
                0.0, FIG4_DECAY, FIG4_FORCE, kappaT=kappaT, eta=FIGURE_ETA, nSites=2
            )
            lambdaPlus = criticalStructure(deriveDimensionless(base)).lambdaPlus
            spec = SweepSpec(
                base,
                "lambda",
                tuple(np.linspace(0.02, 1.0 - CRITICAL_MARGIN, 150) * lambdaPlus),
                ("crb",),
                CLOSED_FORM,
                phaseMode="chiOptCritical",
            )
            _rows, path = self._run(spec, f"b_kappa{kappaT:g}")
            series.append(PlotSeries(path, _column(spec, "dF"), f"dF, kappa = {kappaT:g}", style))
            series.append(PlotSeries(path, _column(spec, "dchi"), f"dchi, kappa = {kappaT:g}", style))
        return PlotPanel("b", "sensitivity versus coupling", "lambda", "bound", series, True)


def hoppingRatioSegments(kappaPlus, kappaMinus, points: int = 120) -> Dict[str, tuple]:
    """
    Normal-phase hopping grids for the sensitivity ratios.

    Between the two critical hoppings the lattice is superradiant, so the sweep is split
    into the segment above ``kappaPlus`` and the one below ``kappaMinus``.
    """
    if kappaPlus is None:
        return {"all": tuple(np.linspace(0.0, -1.0 + 2.0 * CRITICAL_MARGIN, points))}
    segments = {"upper": tuple(np.linspace(0.0, kappaPlus + CRITICAL_MARGIN, points))}
    lowerStart = kappaMinus - CRITICAL_MARGIN
    lowerEnd = -1.0 + 2.0 * CRITICAL_MARGIN
    if lowerStart > lowerEnd:
        segments["lower"] = tuple(np.linspace(lowerStart, lowerEnd, points // 2))
    return segments


FIGURES = {1: Figure1, 2: Figure2, 3: Figure3, 4: Figure4}


def makeFigure(number: int, outputDirectory=".", options=None, exact=True) -> List[str]:
    """Build one figure preset and return the files written."""
    try:
        builder = FIGURES[number]
    except KeyError:
        raise ConfigurationError(f"Figure must be one of {sorted(FIGURES)}, got {number}")
    return builder(outputDirectory, options, exact).build()
