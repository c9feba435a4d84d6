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
Write sweep results.

:py:class:`CsvSweepWriter` writes the result table: a few ``#`` comment lines
identifying the run, a header row, then one row per grid point. Missing quantities are
empty cells. :py:class:`PlotScriptWriter` renders a gnuplot script for the table from a
jinja2 template so figures can be redrawn without rerunning the sweep.
"""
import csv
import math
import os
from typing import List, NamedTuple

from jinja2 import Template

from armi import runLog

from .meta import __version__

FLOAT_FORMAT = ".17g"
DEFAULT_FIGURE_TEMPLATE = os.path.join(
    os.path.dirname(__file__), "resources", "gnuplot_Figure_Template.txt"
)


def formatCell(value) -> str:
    if value is None:
        return ""
    value = float(value)
    if not math.isfinite(value):
        return ""
    return format(value, FLOAT_FORMAT)


class SweepWriter:
    """
    Base class for sweep writers.

    Parameters
    ----------
    rows : list of ResultRow
        Sweep results in grid order.
    spec : SweepSpec
        The sweep that produced ``rows``.
    options : SweepOptions
        Execution controls; ``outputFile`` is the default destination.
    """

    def __init__(self, rows, spec, options):
        self.rows = rows
        self.spec = spec
        self.options = options

    def __str__(self):
        return f"<{self.__class__.__name__} for a {self.spec.axis} sweep>"

    def write(self, path=None):
        path = path or self.defaultPath()
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        runLog.info(f"Writing {path} with {self}")
        with open(path, "w", newline="") as stream:
            self._writeTo(stream)
        return path

    def defaultPath(self):
        return self.options.outputFile

    def _writeTo(self, stream):
        raise NotImplementedError


class CsvSweepWriter(SweepWriter):
    """Write sweep rows as CSV with a commented provenance header."""

    def headerLines(self):
        return [
            f"# rabilattice {__version__}",
            f"# config_hash: {self.spec.configHash()}",
            f"# model_tier: {self.spec.modelTier}",
            f"# axis: {self.spec.axis}",
            f"# phase_mode: {self.spec.phaseMode}",
        ]

    def _writeTo(self, stream):
        for line in self.headerLines():
            stream.write(line + "\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow([self.spec.axis] + self.spec.columns())
        for row in self.rows:
            writer.writerow([formatCell(row.axisValue)] + [formatCell(v) for v in row.values])


class PlotScriptWriter(SweepWriter):
    """Render a gnuplot script that plots every column of a sweep CSV against the axis."""

    def __init__(self, rows, spec, options, dataFile=None, title=None):
        SweepWriter.__init__(self, rows, spec, options)
        self.dataFile = dataFile or self.options.outputFile
        self.title = title

    def defaultPath(self):
        return os.path.splitext(self.dataFile)[0] + ".gp"

    def _writeTo(self, stream):
        template = self._readTemplate()
        stream.write(template.render(**self._buildTemplateData()))

    def _readTemplate(self):
        """Read the template file."""
        with open(self.options.templatePath) as templateFormat:
            return Template(templateFormat.read())

    def _buildTemplateData(self):
        columns = self.spec.columns()
        return {
            "version": __version__,
            "configHash": self.spec.configHash(),
            "dataFile": os.path.basename(self.dataFile),
            "output": os.path.splitext(os.path.basename(self.dataFile))[0] + ".png",
            "title": self.title or f"{self.spec.modelTier} sweep over {self.spec.axis}",
            "xLabel": self.spec.axis,
            # gnuplot columns are 1-based and the axis is column 1
            "series": [(index + 2, name) for index, name in enumerate(columns)],
        }


class PlotSeries(NamedTuple):
    """One curve of a figure panel: a CSV file and the 1-based column to plot against column 1."""

    dataFile: str
    column: int
    label: str
    style: str = "lines"


class PlotPanel(NamedTuple):
    name: str
    title: str
    xLabel: str
    yLabel: str
    series: List[PlotSeries]
    logScale: bool = False


class FigureScriptWriter:
    """Render one gnuplot script drawing several panels from several sweep CSVs."""

    def __init__(self, title, panels, templatePath=DEFAULT_FIGURE_TEMPLATE):
        self.title = title
        self.panels = panels
        self.templatePath = templatePath

    def __str__(self):
        return f"<FigureScriptWriter for {self.title}>"

    def write(self, path):
        runLog.info(f"Writing {path} with {self}")
        with open(self.templatePath) as templateFormat:
            template = Template(templateFormat.read())
        with open(path, "w") as script:
            script.write(template.render(**self._buildTemplateData(path)))
        return path

    def _buildTemplateData(self, path):
        panels = [
            panel._replace(
                series=[s._replace(dataFile=os.path.basename(s.dataFile)) for s in panel.series]
            )
            for panel in self.panels
        ]
        return {
            "version": __version__,
            "title": self.title,
            "script": os.path.basename(path),
            "output": os.path.splitext(os.path.basename(path))[0] + ".png",
            "panels": panels,
        }


def writeSweep(rows, spec, options, path=None, fmt="csv"):
    """Write sweep rows with the registered writer for ``fmt`` and return the path."""
    return rabiFactory.makeWriter(fmt, rows, spec, options).write(path)


from .rabiFactory import rabiFactory
