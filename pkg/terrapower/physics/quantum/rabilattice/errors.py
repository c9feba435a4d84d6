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
Exceptions raised by the Rabi lattice plugin.

Each class carries the exit code the command line entry points return when it escapes
a command, so that config problems, numerical failures and failed validation runs can be
told apart by calling scripts.
"""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_VALIDATION_FAILURE = 4


class RabiLatticeError(Exception):
    """Base class for all errors raised by this package."""

    exitCode = EXIT_NUMERICAL_FAILURE


class ConfigurationError(RabiLatticeError, ValueError):
    """Invalid user input: settings, parameters, sweep definitions."""

    exitCode = EXIT_CONFIG_ERROR


class NonUniformDecayError(ConfigurationError):
    """A closed-form path was asked to handle site-dependent decay rates."""


class InvalidCutoffError(ConfigurationError):
    """A Fock cutoff is too small to represent anything useful."""


class SuperoperatorBudgetError(ConfigurationError):
    """The requested Liouvillian would not fit in the configured budget."""


class NumericalFailure(RabiLatticeError, ArithmeticError):
    """A computation could not produce a trustworthy number."""

    exitCode = EXIT_NUMERICAL_FAILURE


class CriticalDivergence(NumericalFailure):
    """The requested point lies at or beyond the dissipative phase transition."""


class PhaseUnidentifiable(NumericalFailure):
    """The displacement phase carries no information (zero force)."""


class ParameterDependentCovariance(NumericalFailure):
    """The Gaussian QFIM shortcut requires a covariance independent of the parameters."""


class SingularCovariance(NumericalFailure):
    """A covariance matrix could not be inverted."""


class NonHurwitz(NumericalFailure):
    """The drift matrix has an eigenvalue with non-negative real part."""


class NonUniqueSteadyState(NumericalFailure):
    """The Liouvillian null space is not one dimensional."""


class NoConvergence(NumericalFailure):
    """An iterative or time-stepping solve did not reach its tolerance."""


class TruncationError(NumericalFailure):
    """Too much population sits near a Fock cutoff."""


class FiniteDifferenceMismatch(NumericalFailure):
    """Two finite-difference step sizes disagree by more than allowed."""


class ValidationFailure(RabiLatticeError):
    """One or more checks of the validation suite failed."""

    exitCode = EXIT_VALIDATION_FAILURE
