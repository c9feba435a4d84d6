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

"""Setup.py script for the TerraPower Rabi lattice ARMI plugin."""

import re

from setuptools import setup

with open("terrapower/physics/quantum/rabilattice/meta.py") as f:
    __version__ = re.search(r'__version__ = "([^"]+)"', f.read()).group(1)

with open("README.rst") as f:
    README = f.read()

setup(
    name="terrapower-rabilattice",
    version=__version__,
    description=(
        "ARMI plugin for displacement metrology with driven dissipative Rabi lattices."
    ),
    author="TerraPower LLC",
    author_email="armi-devs@terrapower.com",
    packages=[
        "terrapower.physics.quantum.rabilattice",
        "terrapower.physics.quantum.rabilattice.tests",
    ],
    package_data={
        "terrapower.physics.quantum.rabilattice": ["resources/*", "resources/**/*"]
    },
    license="Apache 2.0",
    long_description=README,
    install_requires=["armi", "jinja2", "numpy", "qutip>=5.0", "scipy", "voluptuous"],
    keywords="ARMI, quantum metrology, Rabi model, quantum Fisher information",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: Apache Software License",
    ],
    test_suite="tests",
)
