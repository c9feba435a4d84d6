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

"""Run a Rabi lattice command, for example ``python -m terrapower.physics.quantum.rabilattice validate``."""
import sys

import armi
from armi.cli import ArmiCLI

from .app import RabiLatticeApp


def main():
    if not armi.isConfigured():
        armi.configure(RabiLatticeApp())
    return ArmiCLI().run()


if __name__ == "__main__":
    sys.exit(main())
