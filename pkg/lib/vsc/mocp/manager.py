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
The compensation manager.

For every system event the manager steps all active compensation strategies (compensating
automaton instances). When the monitors raised compensate triggers on the compensate line, the
manager resolves them into an emission plan and emits the instructions to the system, processing
the events the system keeps sending meanwhile. Once no trigger is left it issues its continue
signal; when the monitors compensated instead of continuing, it issues their continue signal too.

Records written to the journal:

    TRG|seq|expr                              a trigger is being resolved
    COMP|batch|strategy|comp_action|args      an instruction was emitted
    FAULT|batch|strategy|comp_action|reason   the system could not execute it
    DSC|seq|names                             strategies were discarded
"""
from collections import OrderedDict, deque, namedtuple

from vsc.utils.fancylogger import getLogger
from vsc.mocp.events import COMPENSATE, DISCARD, MANAGER_SIDE, NORMAL, continue_signal, format_pairs
from vsc.mocp.exceptions import MalformedSpec, UnknownStrategy
from vsc.mocp.monitors import Par, Seq, Strategy, render_trigger, trigger_strategies

SEQUENTIAL = 'sequential'
PARALLEL_OK = 'parallel'

Batch = namedtuple('Batch', ['instructions', 'mode'])
EmissionFault = namedtuple('EmissionFault', ['batch', 'instruction', 'reason'])
Ack = namedtuple('Ack', ['ok', 'reason'])


class EmissionPlan:
    """Ordered batches of compensation instructions."""

    def __init__(self, batches=None):
        self.batches = [batch for batch in (batches or []) if batch.instructions]

    def instructions(self):
        return [instruction for batch in self.batches for instruction in batch.instructions]

    def is_empty(self):
        return not self.batches

    def __len__(self):
        return len(self.batches)


class CompensationManager:
    """Mediates between the system, the compensation strategies and the trigger monitors."""

    def __init__(self, specs, journal=None):
        """Initialisation.

        @type specs: list of CompAutomatonSpec, one strategy per spec
        @type journal: list receiving the TRG, COMP, FAULT and DSC records
        """
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.strategies = OrderedDict()
        for spec in specs:
            if spec.name in self.strategies:
                self.log.raiseException(f"strategy {spec.name} is defined twice", MalformedSpec)
            self.strategies[spec.name] = spec.instantiate()

        self.inbox = deque()
        self.compensate_line = deque()
        self.pending_triggers = deque()
        self.emission_log = []
        self.continue_ledger = {}
        self.discard_log = []
        self.faults = []
        self.journal = journal if journal is not None else []
        self._batch = 0

    def _check_names(self, names):
        unknown = sorted(set(names) - set(self.strategies))
        if unknown:
            self.log.raiseException(f"unknown strategies {unknown}", UnknownStrategy)

    def on_event(self, event):
        """Step every active strategy with the event."""
        for strategy in self.strategies.values():
            if strategy.active:
                strategy.step(event)

    def enqueue(self, expr, for_seq=None):
        self._check_names(trigger_strategies(expr))
        self.pending_triggers.append((expr, for_seq))
        self.log.debug("queued trigger %s for seq %s", render_trigger(expr), for_seq)

    def discard(self, names, for_seq=None):
        """Deactivate the named strategies and drop their stacks. Discarding twice changes nothing."""
        self._check_names(names)
        fresh = sorted(name for name in names if self.strategies[name].active)
        for name in fresh:
            self.strategies[name].deactivate()
        if fresh:
            self.discard_log.append((for_seq, tuple(fresh)))
            self.journal.append(f"DSC|{for_seq}|{','.join(fresh)}")
            self.log.info("discarded strategies %s", ', '.join(fresh))

    def _contribution(self, name):
        return self.strategies[name].activate()

    def _batches(self, expr):
        if isinstance(expr, Strategy):
            return [Batch(tuple(self._contribution(expr.name)), SEQUENTIAL)]
        if isinstance(expr, Seq):
            batches = []
            for child in expr.children:
                batches.extend(self._batches(child))
            return batches
        if isinstance(expr, Par):
            groups = []
            for child in expr.children:
                instructions = [i for batch in self._batches(child) for i in batch.instructions]
                groups.append((trigger_strategies(child)[0], instructions))
            groups.sort(key=lambda group: group[0])
            return [Batch(tuple(i for (_, instructions) in groups for i in instructions), PARALLEL_OK)]
        raise TypeError(f"not a trigger expression: {expr!r}")

    def resolve(self, expr):
        """Activate the strategies named in the expression and plan their instructions.

        seq children give consecutive batches in listed order, par children are merged into one
        batch with the strategy groups in name order. Discarded strategies contribute nothing.

        @returns: EmissionPlan

        @raise UnknownStrategy
        """
        self._check_names(trigger_strategies(expr))
        plan = EmissionPlan(self._batches(expr))
        self.log.debug("trigger %s resolved into %d batches", render_trigger(expr), len(plan))
        return plan

    def _emit(self, batch, instruction, sink):
        self.emission_log.append((batch, instruction))
        self.journal.append(f"COMP|{batch}|{instruction.strategy}|{instruction.comp_action}|"
                            f"{format_pairs(instruction.bound_args)}")
        ack = sink(instruction)
        if not ack.ok:
            fault = EmissionFault(batch, instruction, ack.reason)
            self.faults.append(fault)
            self.journal.append(f"FAULT|{batch}|{instruction.strategy}|{instruction.comp_action}|{ack.reason}")
            self.log.warning("compensation %s of %s failed, skipping it: %s",
                             instruction.comp_action, instruction.strategy, ack.reason)

    def _absorb(self, feed):
        """Let the system and the monitors run, then process what reached the manager."""
        feed()
        while self.inbox:
            self.on_event(self.inbox.popleft())
        self.read_compensate_line()

    def emission_loop(self, sink, feed):
        """Resolve and emit pending triggers until none are left.

        @type sink: callable taking a CompensationInstruction and returning an Ack
        @type feed: callable letting compensation-time events reach the monitors and the manager inbox

        @returns: list of EmissionFault for instructions the system could not execute
        """
        if not self.pending_triggers:
            raise ValueError("emission loop started without a pending trigger")

        faults = []
        while self.pending_triggers:
            (expr, for_seq) = self.pending_triggers.popleft()
            self.journal.append(f"TRG|{for_seq}|{render_trigger(expr)}")
            plan = self.resolve(expr)
            for batch in plan.batches:
                self._batch += 1
                before = len(self.faults)
                if batch.mode == SEQUENTIAL:
                    for instruction in batch.instructions:
                        self._emit(self._batch, instruction, sink)
                        self._absorb(feed)
                else:
                    for instruction in batch.instructions:
                        self._emit(self._batch, instruction, sink)
                    self._absorb(feed)
                faults.extend(self.faults[before:])
            # stack is exhausted, check the compensate line once more
            self.read_compensate_line()
        return faults

    def read_compensate_line(self, seq=None):
        """Queue the triggers and apply the discards found on the compensate line.

        @returns: True if a compensate trigger for the event with the given seq was found
        """
        compensated = False
        while self.compensate_line:
            signal = self.compensate_line.popleft()
            if signal.kind == COMPENSATE:
                self.enqueue(signal.expr, signal.for_seq)
                compensated = compensated or signal.for_seq == seq
            elif signal.kind == DISCARD:
                self.discard(signal.names, signal.for_seq)
        return compensated

    def pump(self, continue_line, sink, feed):
        """Process the events in the inbox, following the handshake for every normal event."""
        while self.inbox:
            event = self.inbox.popleft()
            self.on_event(event)
            compensated = self.read_compensate_line(event.seq)
            if event.phase != NORMAL:
                continue
            if self.pending_triggers:
                self.emission_loop(sink, feed)
            # the monitors sent compensate instead of continue, so continue on their behalf too
            tokens = 2 if compensated else 1
            for _ in range(tokens):
                continue_line.append(continue_signal(MANAGER_SIDE, event.seq))
            self.continue_ledger[event.seq] = self.continue_ledger.get(event.seq, 0) + tokens

    def dump(self):
        """Plain data view of all strategies."""
        return [strategy.dump() for strategy in self.strategies.values()]
