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
Compensating automata.

A compensating automaton listens to system events and installs compensation instructions on a
stack. Each transition may install one frame (an ordered group of instructions), clear the stack,
or reach the exit of a box, in which case the frames collected inside the box are purged.
Activation pops the frames top to bottom, so compensations run in the reverse order of the actions
they compensate.

Spec files are JSON documents:

    {"name": "B1", "states": [...], "initial": "funding", "finals": [],
     "boxes": [{"id": "funding", "entry": "funding", "exit": "paid"}],
     "transitions": [{"from": "funding", "to": "paid", "on": "payment", "guard": "payload.amount > 0",
                      "frame": [{"comp": "refundBankFee", "capture": ["user", "card", "txn", "amount"]}],
                      "action": "clear"}]}
"""
from collections import namedtuple

from vsc.utils.fancylogger import getLogger
from vsc.mocp.exceptions import MalformedSpec, MissingCaptureKey
from vsc.mocp.guards import Guard
from vsc.mocp.specfile import read_structured

CLEAR_STACK = 'clear'
ACTIONS = (None, CLEAR_STACK)

log = getLogger(__name__, fname=False)

InstructionTemplate = namedtuple('InstructionTemplate', ['comp_action', 'capture'])
CompensationInstruction = namedtuple('CompensationInstruction', ['comp_action', 'bound_args', 'origin_seq', 'strategy'])
Frame = namedtuple('Frame', ['instructions', 'origin_seq'])
Box = namedtuple('Box', ['id', 'entry', 'exit'])


class StepEffect(namedtuple('StepEffect', ['fired', 'pushed', 'cleared', 'purged'])):
    """What a step did to the stack.

    fired: a transition matched
    pushed: number of instructions in the pushed frame (0 if none)
    cleared: number of frames removed by a ClearStack action
    purged: number of frames discarded at a box exit
    """
    __slots__ = ()

    def changed(self):
        return bool(self.pushed or self.cleared or self.purged)

    def __str__(self):
        parts = []
        if self.cleared:
            parts.append(f"Cleared({self.cleared})")
        if self.purged:
            parts.append(f"Purged({self.purged})")
        if self.pushed:
            parts.append(f"Pushed({self.pushed})")
        return ', '.join(parts) or 'NoChange'


NO_CHANGE = StepEffect(False, 0, 0, 0)


def bind(template, event, strategy):
    """Snapshot the captured keys of the event into a compensation instruction.

    Keys are looked up in the payload first, then in the subject.

    @type template: InstructionTemplate
    @type event: Event
    @type strategy: name of the automaton installing the instruction

    @raise MissingCaptureKey: the event carries no value for a captured key
    """
    bound_args = {}
    for key in template.capture:
        if key in event.payload:
            bound_args[key] = event.payload[key]
        elif key in event.subject:
            bound_args[key] = event.subject[key]
        else:
            msg = f"{strategy}: event {event.name} (seq {event.seq}) has no {key} for {template.comp_action}"
            log.error(msg)
            raise MissingCaptureKey(msg)
    return CompensationInstruction(template.comp_action, bound_args, event.seq, strategy)


class CompTransition:
    """A transition of a compensating automaton."""

    def __init__(self, source, target, event, guard=None, frame=None, action=None):
        self.source = source
        self.target = target
        self.event = event
        self.guard = Guard(guard)
        self.frame = tuple(frame or ())
        self.action = action

    def matches(self, event):
        return event.name == self.event and self.guard.holds(event)

    def __repr__(self):
        guard = f" [{self.guard}]" if str(self.guard) else ''
        return f"{self.source} --{self.event}{guard}--> {self.target}"


class CompAutomatonSpec:
    """The static description of a compensating automaton."""

    def __init__(self, name, states, initial, transitions, finals=None, boxes=None):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.name = name
        self.states = tuple(states)
        self.initial = initial
        self.finals = frozenset(finals or ())
        self.transitions = list(transitions)
        self.boxes = list(boxes or ())

        self._outgoing = {}
        for transition in self.transitions:
            self._outgoing.setdefault(transition.source, []).append(transition)

        self.validate()

    @classmethod
    def from_dict(cls, data):
        """Build a spec from the decoded JSON document."""
        try:
            name = data['name']
            transitions = []
            for tr in data.get('transitions', []):
                frame = [InstructionTemplate(item['comp'], tuple(item.get('capture', ())))
                         for item in tr.get('frame', [])]
                transitions.append(CompTransition(tr['from'], tr['to'], tr['on'], guard=tr.get('guard'),
                                                  frame=frame, action=tr.get('action')))
            boxes = [Box(b['id'], b['entry'], b['exit']) for b in data.get('boxes', [])]
            return cls(name, data['states'], data['initial'], transitions,
                       finals=data.get('finals', []), boxes=boxes)
        except (KeyError, TypeError) as err:
            aut_name = data.get('name', '?') if isinstance(data, dict) else '?'
            msg = f"automaton {aut_name}: missing or invalid field {err}"
            log.error(msg)
            raise MalformedSpec(msg) from err

    def validate(self):
        """Check the structural rules of the automaton.

        @raise MalformedSpec: with the name of the offending state, box or event
        """
        states = set(self.states)
        if self.initial not in states:
            self.log.raiseException(f"{self.name}: initial state {self.initial} is not a state", MalformedSpec)
        if not self.finals <= states:
            self.log.raiseException(f"{self.name}: unknown final states {sorted(self.finals - states)}", MalformedSpec)

        for transition in self.transitions:
            if transition.source not in states or transition.target not in states:
                self.log.raiseException(f"{self.name}: transition {transition!r} uses an unknown state",
                                        MalformedSpec)
            if transition.action not in ACTIONS:
                self.log.raiseException(f"{self.name}: unknown action {transition.action} on {transition!r}",
                                        MalformedSpec)
            if not transition.event:
                self.log.raiseException(f"{self.name}: transition {transition!r} has no event", MalformedSpec)
            for template in transition.frame:
                if not template.comp_action:
                    self.log.raiseException(f"{self.name}: empty compensation action on {transition!r}",
                                            MalformedSpec)

        # an unguarded transition excludes any other on the same event, identical guards are ambiguous
        for (state, outgoing) in self._outgoing.items():
            guards = {}
            for transition in outgoing:
                guards.setdefault(transition.event, []).append(str(transition.guard))
            for (event, texts) in guards.items():
                if len(texts) > 1 and ('' in texts or len(set(texts)) != len(texts)):
                    self.log.raiseException(
                        f"{self.name}: nondeterministic transitions from state {state} on event {event}",
                        MalformedSpec)

        ids = set()
        for box in self.boxes:
            if box.id in ids:
                self.log.raiseException(f"{self.name}: duplicate box {box.id}", MalformedSpec)
            ids.add(box.id)
            if box.entry not in states or box.exit not in states:
                self.log.raiseException(f"{self.name}: box {box.id} uses an unknown state", MalformedSpec)
            if box.entry == box.exit:
                self.log.raiseException(f"{self.name}: box {box.id} has the same entry and exit", MalformedSpec)

        regions = dict((box.id, self.box_region(box)) for box in self.boxes)
        for (idx, box) in enumerate(self.boxes):
            for other in self.boxes[idx + 1:]:
                (one, two) = (regions[box.id], regions[other.id])
                if one & two and not (one <= two or two <= one):
                    self.log.raiseException(f"{self.name}: boxes {box.id} and {other.id} partially overlap",
                                            MalformedSpec)

    def box_region(self, box):
        """States reachable from the box entry without leaving through its exit (exit included)."""
        region = {box.entry}
        todo = [box.entry]
        while todo:
            state = todo.pop()
            if state == box.exit:
                continue
            for transition in self._outgoing.get(state, []):
                if transition.target not in region:
                    region.add(transition.target)
                    todo.append(transition.target)
        return region

    def outgoing(self, state):
        return self._outgoing.get(state, [])

    def comp_actions(self):
        """All compensation action names this automaton can install."""
        return set(t.comp_action for tr in self.transitions for t in tr.frame)

    def instantiate(self):
        return CompInstance(self)


def load_automaton(filename):
    """Read a compensating automaton spec file."""
    spec = CompAutomatonSpec.from_dict(read_structured(filename))
    log.info("Loaded compensating automaton %s from %s", spec.name, filename)
    return spec


class CompInstance:
    """A running compensating automaton with its compensation stack.

    The stack is a list of frames, bottom first. box_marks holds (box id, stack depth at entry)
    for every box that is currently open, outermost first.
    """

    def __init__(self, spec):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.spec = spec
        self.current = spec.initial
        self.stack = []
        self.box_marks = []
        self.active = True
        self._open_boxes(spec.initial)

    @property
    def name(self):
        return self.spec.name

    def _open_boxes(self, state):
        opened = set(box_id for (box_id, _) in self.box_marks)
        for box in self.spec.boxes:
            if box.entry == state and box.id not in opened:
                self.box_marks.append((box.id, len(self.stack)))

    def _purge_boxes(self, state):
        exits = set(box.id for box in self.spec.boxes if box.exit == state)
        for (idx, (box_id, depth)) in enumerate(self.box_marks):
            if box_id in exits:
                purged = len(self.stack) - depth
                del self.stack[depth:]
                del self.box_marks[idx:]
                return purged
        return 0

    def step(self, event):
        """Feed one event to the automaton.

        The first and only matching transition out of the current state fires: the stack is cleared
        if requested, boxes exited by the target are purged, boxes entered are marked and finally the
        transition's frame is installed. Without a matching transition nothing changes.

        @returns: StepEffect

        @raise MalformedSpec: more than one transition matches
        """
        if not self.active:
            return NO_CHANGE

        matching = [tr for tr in self.spec.outgoing(self.current) if tr.matches(event)]
        if not matching:
            return NO_CHANGE
        if len(matching) > 1:
            self.log.raiseException(
                f"{self.name}: {len(matching)} transitions from state {self.current} match event {event.name}",
                MalformedSpec)

        transition = matching[0]
        instructions = [bind(template, event, self.name) for template in transition.frame]

        cleared = 0
        if transition.action == CLEAR_STACK:
            cleared = len(self.stack)
            self.stack = []
            self.box_marks = [(box_id, 0) for (box_id, _) in self.box_marks]

        purged = self._purge_boxes(transition.target)
        self._open_boxes(transition.target)

        if instructions:
            self.stack.append(Frame(tuple(instructions), event.seq))

        self.current = transition.target
        effect = StepEffect(True, len(instructions), cleared, purged)
        self.log.debug("%s: %s on event %s (seq %s): %s", self.name, transition, event.name, event.seq, effect)
        return effect

    def activate(self):
        """Pop all frames, newest first, and return their instructions.

        Instructions of one frame keep their listed order. The current state is kept.
        """
        if not self.active:
            return []

        instructions = []
        while self.stack:
            frame = self.stack.pop()
            instructions.extend(frame.instructions)
        self.box_marks = []
        self.log.debug("%s: activated, %d instructions", self.name, len(instructions))
        return instructions

    def deactivate(self):
        """Stop the automaton and drop its stack."""
        self.active = False
        self.stack = []
        self.box_marks = []

    def depth(self):
        return len(self.stack)

    def dump(self):
        """Plain data view of the instance, suitable for canonical serialisation."""
        return {
            'name': self.name,
            'current': self.current,
            'active': self.active,
            'box_marks': [list(mark) for mark in self.box_marks],
            'stack': [
                {
                    'origin_seq': frame.origin_seq,
                    'instructions': [[i.comp_action, i.bound_args, i.origin_seq, i.strategy]
                                     for i in frame.instructions],
                }
                for frame in self.stack
            ],
        }
