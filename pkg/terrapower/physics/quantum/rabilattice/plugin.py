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
Rabi lattice plugin.
"""
from armi import plugins

from . import settings


class RabiLatticePlugin(plugins.ArmiPlugin):
    """Plugin for displacement metrology with driven dissipative Rabi lattices."""

    @staticmethod
    @plugins.HOOKIMPL
    def defineSettings():
        """Define settings for the Rabi lattice."""
        return settings.defineSettings()

    @staticmethod
    @plugins.HOOKIMPL
    def defineSettingsValidators(inspector):
        """Define settings inspections for the Rabi lattice."""
        return settings.defineValidators(inspector)

    @staticmethod
    @plugins.HOOKIMPL
    def defineEntryPoints():
        from . import entryPoints

        return entryPoints.ENTRY_POINTS
