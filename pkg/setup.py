#!/usr/bin/env python
##
# Copyright 2025-2025 Ghent University
#
# This file is part of vsc-mocp,
# originally created by the HPC team of Ghent University (http://ugent.be/hpc/en),
# with support of Ghent University (http://ugent.be/hpc),
# the Flemish Supercomputer Centre (VSC) (https://www.vscentrum.be),
# the Flemish Research Foundation (FWO) (http://www.fwo.be/en)
# and the Department of Economy, Science and Innovation (EWI) (http://www.ewi-vlaanderen.be/en).
#
# http://github.com/hpcugent/vsc-mocp
#
# vsc-mocp is free software: you can redistribute it and/or modify
# it under the terms of the GNU Library General Public License as
# published by the Free Software Foundation, either version 2 of
# the License, or (at your option) any later version.
#
# vsc-mocp is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU Library General Public License for more details.
#
# You should have received a copy of the GNU Library General Public License
# along with vsc-mocp. If not, see <http://www.gnu.org/licenses/>.
##
"""
vsc-mocp base distribution setup.py
"""
import vsc.install.shared_setup as shared_setup
from vsc.install.shared_setup import ag, sdw

install_requires = [
    'vsc-base >= 3.2.4',
    'jsonpickle',
]

PACKAGE = {
    'version': '0.1.0',
    'author': [ag, sdw],
    'maintainer': [ag, sdw],
    'excluded_pkgs_rpm': ['vsc'],  # vsc is default
    'tests_require': ['mock', 'hypothesis'],
    'install_requires': install_requires,
    'setup_requires': ['vsc-install >= 0.15.1'],
    'package_data': {'vsc.mocp': ['data/*/*.json']},
    'zip_safe': False,
}

if __name__ == '__main__':
    shared_setup.action_target(PACKAGE)
