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

"""Define settings for the Rabi-lattice plugin."""
import os

import voluptuous as vol

from armi.settings import setting
from armi.operators import settingsValidation

CONF_BOSON_FREQUENCY = "rabiBosonFrequency"
CONF_SPIN_FREQUENCY = "rabiSpinFrequency"
CONF_COUPLING = "rabiCoupling"
CONF_FORCE = "rabiForce"
CONF_PHASE = "rabiPhase"
CONF_DECAY = "rabiDecay"
CONF_HOPPING = "rabiHopping"
CONF_NUM_SITES = "rabiNumSites"

CONF_MODEL_TIER = "rabiModelTier"
CONF_SWEEP_AXIS = "rabiSweepAxis"
CONF_SWEEP_GRID = "rabiSweepGrid"
CONF_SWEEP_RANGE = "rabiSweepRange"
CONF_SWEEP_OUTPUTS = "rabiSweepOutputs"
CONF_PHASE_MODE = "rabiPhaseMode"
CONF_ALLOW_SUPERRADIANT = "rabiAllowSuperradiant"
CONF_REPETITIONS = "rabiRepetitions"
CONF_NUM_WORKERS = "rabiNumWorkers"
CONF_POOL_KIND = "rabiPoolKind"
CONF_OUTPUT_DIRECTORY = "rabiOutputDirectory"

CONF_CRIT_TOLERANCE = "rabiCriticalTolerance"
CONF_FD_STEP = "rabiFiniteDifferenceStep"
CONF_FOCK_CUTOFF = "rabiFockCutoff"
CONF_FOCK_CUTOFF_MULTI = "rabiFockCutoffMultiSite"
CONF_STEADY_METHOD = "rabiSteadyMethod"
CONF_NULL_SPACE_MAX_DIM = "rabiNullSpaceMaxDim"
CONF_EVOLVE_TIME = "rabiEvolveTime"
CONF_STEADY_TOLERANCE = "rabiSteadyTolerance"
CONF_STRICT_CONVERGENCE = "rabiStrictConvergence"
CONF_TAIL_MASS_GUARD = "rabiTailMassGuard"
CONF_MOMENT_TOLERANCE = "rabiMomentTolerance"
CONF_MAX_SUPEROPERATOR_DIM = "rabiMaxSuperoperatorDim"
CONF_PLOT_TEMPLATE_PATH = "rabiPlotTemplatePath"

MODEL_TIERS = ["ClosedForm", "Lyapunov", "FullRabi"]
SWEEP_AXES = ["lambda", "chi", "kappa_t", "g_over_omega"]
OUTPUT_GROUPS = ["means", "decomposition", "qfim", "crb", "crb_ratio", "hopping_ratio", "sum_qp"]
PHASE_MODES = ["fixed", "chiOpt", "chiOptCritical", "chiOptCompanion"]
STEADY_METHODS = ["Auto", "NullSpace", "TimeEvolve"]
POOL_KINDS = ["process", "thread"]

# above this omega/Omega the quadratic model is only a rough guide to the full model
FULL_RABI_MAX_ETA = 4e-3

THIS_DIR = os.path.dirname(__file__)
DEFAULT_PLOT_TEMPLATE = os.path.join(THIS_DIR, "resources", "gnuplot_Template.txt")

_positive = vol.All(vol.Coerce(float), vol.Range(min=0.0, min_included=False))
_nonNegative = vol.All(vol.Coerce(float), vol.Range(min=0.0))
_positiveInt = vol.All(vol.Coerce(int), vol.Range(min=1))


def _physicalSettings():
    return [
        setting.Setting(
            CONF_BOSON_FREQUENCY,
            default=1.0,
            label="Boson frequency",
            description="Boson frequency omega; the natural unit of every rate",
            schema=_positive,
        ),
        setting.Setting(
            CONF_SPIN_FREQUENCY,
            default=250.0,
            label="Spin frequency",
            description="Spin frequency Omega",
            schema=_positive,
        ),
        setting.Setting(
            CONF_COUPLING,
            default=0.0,
            label="Spin-boson coupling",
            description="Spin-boson coupling g",
            schema=_nonNegative,
        ),
        setting.Setting(
            CONF_FORCE,
            default=0.38,
            label="Drive magnitude",
            description="Displacement drive magnitude F (non-negative; the phase carries signs)",
            schema=_nonNegative,
        ),
        setting.Setting(
            CONF_PHASE,
            default=0.0,
            label="Drive phase",
            description="Displacement drive phase chi in radians",
            schema=vol.Coerce(float),
        ),
        setting.Setting(
            CONF_DECAY,
            default=[0.2857],
            label="Boson decay",
            description="Boson decay rate of every site, or a single value for all sites",
            schema=vol.Schema([_nonNegative]),
        ),
        setting.Setting(
            CONF_HOPPING,
            default=0.0,
            label="Hopping",
            description="Nearest-neighbour boson hopping kappa",
            schema=vol.Coerce(float),
        ),
        setting.Setting(
            CONF_NUM_SITES,
            default=1,
            label="Number of sites",
            description="Number of lattice sites",
            schema=_positiveInt,
        ),
    ]


def _sweepSettings():
    return [
        setting.Setting(
            CONF_MODEL_TIER,
            default="ClosedForm",
            label="Model tier",
            description="Which model evaluates sweep points: closed forms, the Lyapunov "
            "moment flow or the full Rabi master equation",
            options=MODEL_TIERS,
            enforcedOptions=True,
        ),
        setting.Setting(
            CONF_SWEEP_AXIS,
            default="chi",
            label="Sweep axis",
            description="Parameter varied along the sweep",
            options=SWEEP_AXES,
            enforcedOptions=True,
        ),
        setting.Setting(
            CONF_SWEEP_GRID,
            default=[],
            label="Sweep grid",
            description="Explicit, strictly monotone sweep values",
            schema=vol.Schema([vol.Coerce(float)]),
        ),
        setting.Setting(
            CONF_SWEEP_RANGE,
            default=[],
            label="Sweep range",
            description="Evenly spaced grid given as [start, stop, count]; "
            "used when no explicit grid is set",
            schema=vol.All(
                [vol.Coerce(float)], vol.Any(vol.Length(max=0), vol.Length(min=3, max=3))
            ),
        ),
        setting.Setting(
            CONF_SWEEP_OUTPUTS,
            default=["means"],
            label="Sweep outputs",
            description=f"Column groups written for every point, from {OUTPUT_GROUPS}",
            schema=vol.Schema([vol.In(OUTPUT_GROUPS)]),
        ),
        setting.Setting(
            CONF_PHASE_MODE,
            default="fixed",
            label="Phase mode",
            description="Keep the drive phase fixed or track one of the optimal phases",
            options=PHASE_MODES,
            enforcedOptions=True,
        ),
        setting.Setting(
            CONF_ALLOW_SUPERRADIANT,
            default=False,
            label="Allow superradiant points",
            description="Keep grid points beyond the critical coupling; they are written "
            "with empty cells",
        ),
        setting.Setting(
            CONF_REPETITIONS,
            default=1,
            label="Repetitions",
            description="Number of independent repetitions nu in the Cramer-Rao bounds",
            schema=_positiveInt,
        ),
        setting.Setting(
            CONF_NUM_WORKERS,
            default=0,
            label="Workers",
            description="Sweep worker pool size; 0 uses every available CPU",
            schema=vol.All(vol.Coerce(int), vol.Range(min=0)),
        ),
        setting.Setting(
            CONF_POOL_KIND,
            default="process",
            label="Worker pool kind",
            description="Run sweep points in processes or threads",
            options=POOL_KINDS,
            enforcedOptions=True,
        ),
        setting.Setting(
            CONF_OUTPUT_DIRECTORY,
            default=".",
            label="Output directory",
            description="Directory for sweep and figure outputs",
        ),
    ]


def _numericsSettings():
    return [
        setting.Setting(
            CONF_CRIT_TOLERANCE,
            default=1e-9,
            label="Critical tolerance",
            description="Relative width of the band around the critical coupling that "
            "is treated as critical",
            schema=_positive,
        ),
        setting.Setting(
            CONF_FD_STEP,
            default=1e-5,
            label="Finite-difference step",
            description="Relative step of the Gaussian numeric QFIM derivatives",
            schema=_positive,
        ),
        setting.Setting(
            CONF_FOCK_CUTOFF,
            default=40,
            label="Fock cutoff",
            description="Fock levels kept for a single-site master equation",
            schema=vol.All(vol.Coerce(int), vol.Range(min=4)),
        ),
        setting.Setting(
            CONF_FOCK_CUTOFF_MULTI,
            default=20,
            label="Multi-site Fock cutoff",
            description="Fock levels kept per site for multi-site master equations",
            schema=vol.All(vol.Coerce(int), vol.Range(min=4)),
        ),
        setting.Setting(
            CONF_STEADY_METHOD,
            default="Auto",
            label="Steady-state method",
            description="Null-space solve, time evolution, or an automatic choice",
            options=STEADY_METHODS,
            enforcedOptions=True,
        ),
        setting.Setting(
            CONF_NULL_SPACE_MAX_DIM,
            default=70,
            label="Null-space size limit",
            description="Largest Hilbert dimension solved by the null space in Auto mode",
            schema=_positiveInt,
        ),
        setting.Setting(
            CONF_EVOLVE_TIME,
            default=0.0,
            label="Evolution horizon",
            description="Time-evolution horizon; 0 means twelve of the slowest moment-flow "
            "decay times",
            schema=_nonNegative,
        ),
        setting.Setting(
            CONF_STEADY_TOLERANCE,
            default=1e-10,
            label="Steady-state tolerance",
            description="Residual ||d rho/dt|| accepted as stationary",
            schema=_positive,
        ),
        setting.Setting(
            CONF_STRICT_CONVERGENCE,
            default=False,
            label="Strict convergence",
            description="Fail instead of warn on unconverged evolution or an unphysical steady state",
        ),
        setting.Setting(
            CONF_TAIL_MASS_GUARD,
            default=1e-8,
            label="Fock tail guard",
            description="Largest population allowed in the top two Fock levels",
            schema=_positive,
        ),
        setting.Setting(
            CONF_MOMENT_TOLERANCE,
            default=1e-8,
            label="Cutoff moment tolerance",
            description="Largest moment change allowed when the Fock cutoffs are doubled",
            schema=_positive,
        ),
        setting.Setting(
            CONF_MAX_SUPEROPERATOR_DIM,
            default=4000000,
            label="Superoperator budget",
            description="Largest superoperator dimension that may be built",
            schema=_positiveInt,
        ),
        setting.Setting(
            CONF_PLOT_TEMPLATE_PATH,
            default=DEFAULT_PLOT_TEMPLATE,
            label="Plot template path",
            description="Path to the plot-script template to be rendered",
        ),
    ]


def defineSettings():
    """Define settings for the Rabi-lattice plugin."""
    return _physicalSettings() + _sweepSettings() + _numericsSettings()


def defineValidators(inspector):
    """Define settings validation for the Rabi-lattice plugin."""
    cs = inspector.cs
    return [
        settingsValidation.Query(
            lambda: not os.path.exists(cs[CONF_PLOT_TEMPLATE_PATH]),
            "The path specified to the plot template in the "
            f"`{CONF_PLOT_TEMPLATE_PATH}` setting does not exist: "
            f"{cs[CONF_PLOT_TEMPLATE_PATH]}",
            "Please update to the correct location.",
            inspector.NO_ACTION,
        ),
        settingsValidation.Query(
            lambda: len(cs[CONF_DECAY]) not in (1, cs[CONF_NUM_SITES]),
            f"`{CONF_DECAY}` has {len(cs[CONF_DECAY])} entries for "
            f"{cs[CONF_NUM_SITES]} sites.",
            "Give one decay rate, or one per site.",
            inspector.NO_ACTION,
        ),
        settingsValidation.Query(
            lambda: cs[CONF_MODEL_TIER] == "ClosedForm" and len(set(cs[CONF_DECAY])) > 1,
            "The closed forms assume every site decays at the same rate.",
            "Use the Lyapunov or FullRabi tier for site-dependent decay.",
            inspector.NO_ACTION,
        ),
        settingsValidation.Query(
            lambda: cs[CONF_MODEL_TIER] == "ClosedForm" and cs[CONF_NUM_SITES] > 2,
            "Closed forms exist for one or two sites only.",
            "Use the Lyapunov tier for longer chains.",
            inspector.NO_ACTION,
        ),
        settingsValidation.Query(
            lambda: cs[CONF_MODEL_TIER] == "FullRabi"
            and cs[CONF_BOSON_FREQUENCY] / cs[CONF_SPIN_FREQUENCY] > FULL_RABI_MAX_ETA,
            "The frequency ratio omega/Omega exceeds "
            f"{FULL_RABI_MAX_ETA}; the full Rabi model will depart noticeably from the "
            "quadratic closed forms.",
            "Proceed if that departure is what you want to study.",
            inspector.NO_ACTION,
        ),
        settingsValidation.Query(
            lambda: not cs[CONF_SWEEP_GRID] and not cs[CONF_SWEEP_RANGE],
            "No sweep grid is defined; a sweep will produce an empty table.",
            f"Set `{CONF_SWEEP_GRID}` or `{CONF_SWEEP_RANGE}`.",
            inspector.NO_ACTION,
        ),
    ]
