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
Factory for the pluggable pieces of a sweep.

Evaluators are chosen by model tier and writers by output format. An application that
needs a different evaluator (a faster closed form, a GPU master-equation solver) or
another output format registers its own classes on the module-level
:py:data:`rabiFactory` before running.
"""
from .errors import ConfigurationError


class RabiFactory:
    """
    Build sweep objects based on registration.

    The defaults are registered the first time anything is made, so an app may replace
    any of them beforehand.
    """

    def __init__(self):
        self._evaluators = {}
        self._writers = {}
        self._executer = None
        self._runner = None
        self._defaultsRegistered = False

    def registerEvaluator(self, tier, cls):
        self._evaluators[tier] = cls

    def registerWriter(self, fmt, cls):
        self._writers[fmt] = cls

    def registerExecuter(self, cls):
        self._executer = cls

    def registerRunner(self, cls):
        self._runner = cls

    def evaluatorTiers(self):
        self._registerDefaults()
        return sorted(self._evaluators)

    def makeEvaluator(self, tier, options):
        """Return a point evaluator for a model tier."""
        self._registerDefaults()
        if tier not in self._evaluators:
            raise ConfigurationError(
                f"No evaluator registered for model tier `{tier}`; "
                f"known tiers are {sorted(self._evaluators)}"
            )
        return self._evaluators[tier](options)

    def makeExecuter(self, options, spec, value):
        self._registerDefaults()
        return self._executer(options, spec, value)

    def makeRunner(self, spec, options):
        self._registerDefaults()
        return self._runner(spec, options)

    def makeWriter(self, fmt, rows, spec, options):
        """Return a new writer instance"""
        self._registerDefaults()
        if fmt not in self._writers:
            raise ConfigurationError(f"No writer registered for format `{fmt}`")
        return self._writers[fmt](rows, spec, options)

    def _registerDefaults(self):
        if self._defaultsRegistered:
            return
        self._defaultsRegistered = True
        from . import sweep
        from . import tiers
        from . import writers

        for cls in (tiers.ClosedFormEvaluator, tiers.LyapunovEvaluator, tiers.FullRabiEvaluator):
            self._evaluators.setdefault(cls.tier, cls)
        self._writers.setdefault("csv", writers.CsvSweepWriter)
        self._writers.setdefault("gnuplot", writers.PlotScriptWriter)
        if self._executer is None:
            self._executer = sweep.SweepExecuter
        if self._runner is None:
            self._runner = sweep.SweepRunner


rabiFactory = RabiFactory()
