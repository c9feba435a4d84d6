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

"""App that runs the Rabi lattice commands."""
import armi

from . import meta


class RabiLatticeApp(armi.apps.App):
    """ARMI app with the Rabi lattice plugin registered."""

    name = "rabilattice"

    def __init__(self):
        armi.apps.App.__init__(self)

        from .plugin import RabiLatticePlugin

        self._pm.register(RabiLatticePlugin)

    @property
    def splashText(self):
        return f"""
     ===============================
     == Rabi Lattice Workbench {meta.__version__} ==
     ===============================
"""
