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
Exceptions raised by the compensation runtime.

Spec errors point at a problem in an automaton, monitor or scenario file; runtime faults happen
while a scenario is being executed.
"""


class MocpError(Exception):
    '''Base class for all errors raised in vsc.mocp.'''


class SpecError(MocpError):
    '''A spec or scenario file is invalid.'''


class MalformedSpec(SpecError):
    '''An automaton or monitor violates a structural rule, e.g., determinism.'''


class MissingCaptureKey(SpecError):
    '''An instruction template captures a key the event does not carry.'''


class UnknownStrategy(SpecError):
    '''A trigger expression or discard names a strategy the manager does not know.'''


class UnknownChannel(SpecError):
    '''A monitor emits on a channel no monitor listens on.'''


class GuardError(SpecError):
    '''A guard expression cannot be parsed or evaluated.'''


class ScenarioError(SpecError):
    '''A scenario step refers to something that does not exist.'''


class SpecIOError(MocpError):
    '''A file could not be read or written.'''


class RuntimeFault(MocpError):
    '''Something went wrong while running a scenario.'''


class Deadlock(RuntimeFault):
    '''The system did not receive two continue signals for an event.'''


class ChannelLoopDetected(RuntimeFault):
    '''Channel events between monitors do not reach a fixpoint.'''


class CompensationFault(RuntimeFault):
    '''A compensation instruction could not be executed against the world.'''


class InsufficientFunds(RuntimeFault):
    '''A balance would become negative.'''


class NoCourierAvailable(RuntimeFault):
    '''Neither courier can take a booking.'''
