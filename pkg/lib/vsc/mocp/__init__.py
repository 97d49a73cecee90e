#
# Copyright 2025-2026 Ghent University
#
# This file is part of vsc-mocp,
# originally created by the HPC team of Ghent University (http://ugent.be/hpc/en),
# with support of Ghent University (http://ugent.be/hpc),
# the Flemish Supercomputer Centre (VSC) (https://www.vscentrum.be),
# the Flemish Research Foundation (FWO) (http://www.fwo.be/en)
# and the Department of Economy, Science and Innovation (EWI) (http://www.ewi-vlaanderen.be/en).
#
# https://github.com/hpcugent/vsc-mocp
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
#
"""
Monitor-oriented compensation programming.

Compensating automata decide what to compensate and how, trigger monitors decide when and which
compensation strategy to run, and the compensation manager mediates between both and the system.
"""
import pkg_resources
pkg_resources.declare_namespace(__name__)
