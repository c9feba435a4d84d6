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
Command-line entry points.

They are registered with ARMI's CLI through the plugin, so with the app configured they
run as ``python -m terrapower.physics.quantum.rabilattice <command>``. Every command
returns an exit code: 0 on success, 2 for configuration errors, 3 for numerical
failures and 4 when validation fails.
"""
import math
import os

import numpy as np
import voluptuous as vol

from armi import runLog
from armi import settings as armiSettings
from armi.cli import entryPoint

from . import analytic
from . import dynamics
from . import figures
from . import masterEquation
from . import metrology
from . import validation
from .errors import EXIT_OK, EXIT_VALIDATION_FAILURE, ConfigurationError, RabiLatticeError
from .params import ModelParams, deriveDimensionless
from .sweep import SweepOptions, runSweep, sweepSpecFromUserSettings
from .writers import writeSweep


class RabiEntryPoint(entryPoint.EntryPoint):
    """Base for commands that report package errors as exit codes."""

    settingsArgument = None
    splash = False

    def invoke(self):
        try:
            return self.run() or EXIT_OK
        except RabiLatticeError as err:
            runLog.error(f"{self.name} failed with {err.__class__.__name__}: {err}")
            return err.exitCode

    def run(self):
        raise NotImplementedError

    def addPointOptions(self, sites=(1,)):
        """Options describing one parameter point in reduced units."""
        self.parser.add_argument("--lam", type=float, required=True, help="Reduced coupling lambda")
        self.parser.add_argument(
            "--gamma", type=float, required=True, help="Decay in units of omega"
        )
        self.parser.add_argument(
            "--force", type=float, default=0.0, help="Drive amplitude in units of omega"
        )
        self.parser.add_argument("--chi", type=float, default=0.0, help="Drive phase")
        self.parser.add_argument("--eta", type=float, default=4e-3, help="omega / Omega")
        if len(sites) > 1:
            self.parser.add_argument(
                "--kappa", type=float, default=0.0, help="Hopping in units of omega"
            )
            self.parser.add_argument(
                "--sites", type=int, default=sites[0], help="Number of sites"
            )

    def pointParams(self) -> ModelParams:
        return ModelParams.fromDimensionless(
            self.args.lam,
            self.args.gamma,
            self.args.force,
            chi=self.args.chi,
            kappaT=getattr(self.args, "kappa", 0.0),
            eta=self.args.eta,
            nSites=getattr(self.args, "sites", 1),
        )


class DecomposeCommand(RabiEntryPoint):
    """Decompose the single-site steady state into rotation, displacement, squeezing and thermal parts."""

    name = "decompose"

    def addOptions(self):
        self.addPointOptions()

    def run(self):
        p = self.pointParams()
        s = analytic.decomposeSingle(deriveDimensionless(p), p.chi)
        for field, value in s._asdict().items():
            runLog.important(f"{field:>6} = {value:.17g}")


class QfimCommand(RabiEntryPoint):
    """Closed-form QFIM and Cramer-Rao bounds of one or two sites."""

    name = "qfim"

    def addOptions(self):
        self.addPointOptions(sites=(1, 2))
        self.parser.add_argument("--nu", type=int, default=1, help="Number of repetitions")

    def run(self):
        p = self.pointParams()
        d = deriveDimensionless(p)
        twoSite = p.nSites == 2
        if p.nSites > 2:
            raise ConfigurationError("Closed-form QFIMs cover one or two sites")
        if d.FT > 0.0:
            closed = metrology.qfimTwoSiteClosed if twoSite else metrology.qfimSingleClosed
            result = closed(d, p.chi)
        else:
            result = metrology.qfimQpBasis(d, twoSite, p.chi)
        report = metrology.crbReport(result, self.args.nu, twoSite=twoSite)
        runLog.important(f"basis {result.basis.value}")
        runLog.important(f"fim\n{result.fim}")
        runLog.important(f"fim inverse\n{result.fimInv}")
        runLog.important(f"commutator {result.commutatorCoeff:.17g}")
        for field, value in report._asdict().items():
            runLog.important(f"{field} = {value}")


class SteadyCommand(RabiEntryPoint):
    """Steady state of a lattice from the moment flow or the master equation."""

    name = "steady"

    def addOptions(self):
        self.addPointOptions(sites=(1, 2))
        self.parser.add_argument(
            "--tier",
            choices=["Lyapunov", "FullRabi", "EffectiveQuadratic"],
            default="Lyapunov",
            help="Moment flow, or the master equation of the full or effective model",
        )
        self.parser.add_argument("--cutoff", type=int, default=20, help="Fock cutoff per site")
        self.parser.add_argument(
            "--dump", default=None, help="Write the density matrix (or moments) to this file"
        )

    def run(self):
        p = self.pointParams()
        if self.args.tier == "Lyapunov":
            state = dynamics.steadyMomentsFromModel(p)
            moments = masterEquation.Moments(state.mean, state.cov, np.empty(0))
        else:
            model = (
                masterEquation.ModelKind.FULL_RABI
                if self.args.tier == "FullRabi"
                else masterEquation.ModelKind.EFFECTIVE_QUADRATIC
            )
            rho = masterEquation.convergedSteadyState(p, self.args.cutoff, model)
            moments = masterEquation.expectations(rho)
            if self.args.dump:
                rho.dump(self.args.dump)
                runLog.info(f"Wrote density matrix to {self.args.dump}")
        runLog.important(f"mean {moments.mean}")
        runLog.important(f"covariance\n{moments.cov}")
        if len(moments.spinZ):
            runLog.important(f"spin z {moments.spinZ}")
        if self.args.dump and self.args.tier == "Lyapunov":
            moments.dump(self.args.dump)
            runLog.info(f"Wrote moments to {self.args.dump}")


class SweepCommand(RabiEntryPoint):
    """Run the sweep described by a settings file and write its CSV."""

    name = "sweep"

    def addOptions(self):
        self.parser.add_argument(
            "--config", required=True, help="Settings YAML file describing the sweep"
        )
        self.parser.add_argument(
            "--plot", action="store_true", help="Also write a gnuplot script for the CSV"
        )

    def run(self):
        cs = loadSweepSettings(self.args.config)
        spec = sweepSpecFromUserSettings(cs)
        options = SweepOptions(cs.caseTitle)
        options.fromUserSettings(cs)
        rows = runSweep(spec, options)
        path = writeSweep(rows, spec, options)
        if self.args.plot:
            writeSweep(rows, spec, options, fmt="gnuplot")
        runLog.important(f"Wrote {len(rows)} rows to {path}")


def loadSweepSettings(path: str):
    """Read a settings file, reporting any problem as a :py:class:`ConfigurationError`."""
    if not os.path.exists(path):
        raise ConfigurationError(f"Sweep configuration `{path}` does not exist")
    try:
        return armiSettings.Settings(fName=path)
    except (vol.Invalid, ValueError, KeyError) as err:
        raise ConfigurationError(f"Cannot read sweep configuration `{path}`: {err}") from err


class FigureCommand(RabiEntryPoint):
    """Reproduce the data and plot script of a figure."""

    name = "figure"

    def addOptions(self):
        self.parser.add_argument("number", type=int, choices=sorted(figures.FIGURES))
        self.parser.add_argument(
            "--output-dir", default=".", help="Directory for the CSVs and the plot script"
        )
        self.parser.add_argument(
            "--no-exact",
            action="store_true",
            help="Skip the master-equation markers",
        )
        self.parser.add_argument(
            "--workers", type=int, default=0, help="Worker processes (0 uses every core)"
        )

    def run(self):
        options = SweepOptions(f"fig{self.args.number}")
        options.workers = self.args.workers
        written = figures.makeFigure(
            self.args.number, self.args.output_dir, options, exact=not self.args.no_exact
        )
        runLog.important(f"Wrote {len(written)} files to {self.args.output_dir}")


class ValidateCommand(RabiEntryPoint):
    """Run the self-consistency checks and fail if any of them does."""

    name = "validate"

    def addOptions(self):
        self.parser.add_argument(
            "--seed", type=int, default=validation.DEFAULT_SEED, help="Random seed"
        )
        self.parser.add_argument(
            "--only",
            action="append",
            choices=[name for name, _check in validation.CHECKS],
            help="Run only this check (repeatable)",
        )

    def run(self):
        results = validation.runValidation(self.args.seed, self.args.only)
        failed = [r.name for r in results if not r.passed]
        total = math.fsum(r.seconds for r in results)
        if failed:
            runLog.error(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
            return EXIT_VALIDATION_FAILURE
        runLog.important(f"All {len(results)} checks passed in {total:.1f} s")
        return EXIT_OK


ENTRY_POINTS = [
    DecomposeCommand,
    QfimCommand,
    SteadyCommand,
    SweepCommand,
    FigureCommand,
    ValidateCommand,
]
