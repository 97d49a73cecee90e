#
# Copyright 2025-2025 Ghent University
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
Tests for the vsc.mocp.automata module.
"""
import os

from hypothesis import given, settings, strategies as st

from vsc.install.testing import TestCase

from vsc.mocp.automata import (
    CompAutomatonSpec, CompInstance, InstructionTemplate, NO_CHANGE, bind, load_automaton,
)
from vsc.mocp.casestudy import DATA_DIR
from vsc.mocp.events import make_event
from vsc.mocp.exceptions import MalformedSpec, MissingCaptureKey
from vsc.mocp.specfile import canonical

# a single state automaton, 'a' installs one instruction and 'b' installs two
STACKER = {
    'name': 'stacker',
    'states': ['s'],
    'initial': 's',
    'transitions': [
        {'from': 's', 'to': 's', 'on': 'a', 'frame': [{'comp': 'undoA', 'capture': ['n']}]},
        {'from': 's', 'to': 's', 'on': 'b',
         'frame': [{'comp': 'undoB1', 'capture': ['n']}, {'comp': 'undoB2', 'capture': ['n']}]},
    ],
}

# frames installed between enter and leave are purged when leave is reached
BOXED = {
    'name': 'boxed',
    'states': ['out', 'inside', 'done'],
    'initial': 'out',
    'boxes': [{'id': 'work', 'entry': 'inside', 'exit': 'done'}],
    'transitions': [
        {'from': 'out', 'to': 'out', 'on': 'pre', 'frame': [{'comp': 'undo', 'capture': ['n']}]},
        {'from': 'out', 'to': 'inside', 'on': 'enter'},
        {'from': 'inside', 'to': 'inside', 'on': 'work', 'frame': [{'comp': 'undo', 'capture': ['n']}]},
        {'from': 'inside', 'to': 'done', 'on': 'leave'},
        {'from': 'done', 'to': 'out', 'on': 'pre', 'frame': [{'comp': 'undo', 'capture': ['n']}]},
        {'from': 'done', 'to': 'inside', 'on': 'enter'},
    ],
}

# state -> event -> next state, for the walk over BOXED in the purge property
BOXED_MOVES = {
    'out': {'pre': 'out', 'enter': 'inside'},
    'inside': {'work': 'inside', 'leave': 'done'},
    'done': {'pre': 'out', 'enter': 'inside'},
}


def events_from(names):
    return [make_event(seq, name, payload={'n': seq}) for (seq, name) in enumerate(names, 1)]


class TestCompAutomata(TestCase):
    """Tests for compensating automata."""

    def load(self, name):
        return load_automaton(os.path.join(DATA_DIR, 'automata', f"{name}.json"))

    def test_bind(self):
        """Captured keys come from the payload, then from the subject."""
        event = make_event(3, 'payment', {'user': 'u1', 'card': 'c1', 'txn': 't1'}, {'amount': 3000, 'user': 'u2'})
        template = InstructionTemplate('refundUserFee', ('user', 'txn', 'amount'))
        instruction = bind(template, event, 'B2')
        self.assertEqual(instruction.bound_args, {'user': 'u2', 'txn': 't1', 'amount': 3000})
        self.assertEqual((instruction.origin_seq, instruction.strategy), (3, 'B2'))

        template = InstructionTemplate('refundUserFee', ('fee',))
        self.assertErrorRegex(MissingCaptureKey, 'has no fee', bind, template, event, 'B2')

    def test_lifo(self):
        """Frames come back newest first, instructions within a frame keep their order."""
        instance = CompAutomatonSpec.from_dict(STACKER).instantiate()
        for event in events_from(['a', 'b', 'a']):
            instance.step(event)
        self.assertEqual(instance.depth(), 3)

        instructions = instance.activate()
        self.assertEqual([(i.comp_action, i.bound_args['n']) for i in instructions],
                         [('undoA', 3), ('undoB1', 2), ('undoB2', 2), ('undoA', 1)])
        self.assertEqual(instance.depth(), 0)
        self.assertEqual(instance.current, 's')
        self.assertTrue(instance.active)
        self.assertEqual(instance.activate(), [])

    @settings(max_examples=1000, deadline=None)
    @given(st.lists(st.sampled_from(['a', 'b', 'c']), max_size=50))
    def test_lifo_property(self, names):
        """Activation is the exact reverse of the install order, frame by frame."""
        instance = CompAutomatonSpec.from_dict(STACKER).instantiate()
        shadow = []
        for event in events_from(names):
            effect = instance.step(event)
            if event.name == 'a':
                shadow.append([('undoA', event.seq)])
            elif event.name == 'b':
                shadow.append([('undoB1', event.seq), ('undoB2', event.seq)])
            else:
                self.assertEqual(effect, NO_CHANGE)

        expected = [item for frame in reversed(shadow) for item in frame]
        self.assertEqual([(i.comp_action, i.bound_args['n']) for i in instance.activate()], expected)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.sampled_from(['pre', 'enter', 'work', 'leave', 'noise']), max_size=40))
    def test_box_purge_property(self, names):
        """Frames of a completed box never come back, frames from before the box always do."""
        instance = CompAutomatonSpec.from_dict(BOXED).instantiate()
        state = 'out'
        kept = []
        in_box = []
        purged = set()
        for event in events_from(names):
            instance.step(event)
            target = BOXED_MOVES[state].get(event.name)
            if target is None:
                continue
            if event.name == 'pre':
                kept.append(event.seq)
            elif event.name == 'work':
                in_box.append(event.seq)
            elif event.name == 'leave':
                purged.update(in_box)
                in_box = []
            state = target
        self.assertEqual(instance.current, state)

        activated = [i.bound_args['n'] for i in instance.activate()]
        self.assertFalse(purged & set(activated))
        self.assertTrue(set(kept) <= set(activated))
        self.assertEqual(activated, sorted(kept + in_box, reverse=True))

    def test_box_exit_frame_survives(self):
        """The frame of the transition reaching the box exit is installed after the purge."""
        instance = self.load('B1').instantiate()
        self.assertEqual(instance.box_marks, [('funding', 0)])

        events = [
            make_event(1, 'load', {'user': 'u1', 'card': 'c1'}, {'amount': 5000}),
            make_event(2, 'transfer', {'user': 'u1', 'card': 'c1'}, {'to': 'c2', 'amount': 1000}),
            make_event(3, 'payment', {'user': 'u1', 'card': 'c1', 'txn': 't1'}, {'amount': 3000, 'balance': 1000}),
        ]
        instance.step(events[0])
        instance.step(events[1])
        self.assertEqual(instance.depth(), 2)

        effect = instance.step(events[2])
        self.assertEqual((effect.purged, effect.pushed), (2, 1))
        self.assertEqual(str(effect), 'Purged(2), Pushed(1)')
        self.assertEqual(instance.box_marks, [])

        # a new load reopens the funding box on top of the refund
        instance.step(make_event(4, 'load', {'user': 'u1', 'card': 'c1'}, {'amount': 100}))
        self.assertEqual(instance.box_marks, [('funding', 1)])
        self.assertEqual([i.comp_action for i in instance.activate()], ['unload', 'refundBankFee'])

    def test_clear_stack(self):
        """Shipping clears the courier cancellations."""
        instance = self.load('C2').instantiate()
        instance.step(make_event(1, 'bookCourierB', {'user': 'u1', 'txn': 't1'}, {'courier': 'B'}))
        self.assertEqual(instance.depth(), 1)
        effect = instance.step(make_event(2, 'ship', {'user': 'u1', 'txn': 't1'}))
        self.assertEqual(str(effect), 'Cleared(1)')
        self.assertEqual(instance.activate(), [])
        self.assertEqual(str(instance.step(make_event(3, 'login', {'user': 'u1'}))), 'NoChange')

    def test_flagged_refund_withheld(self):
        """Once fraud flagged, B2 charges the user instead of refunding."""
        instance = self.load('B2').instantiate()
        instance.step(make_event(1, 'load', {'user': 'u1', 'card': 'c1'}, {'amount': 5000}))
        effect = instance.step(make_event(2, 'fraudFlag', {'user': 'u1'}))
        self.assertEqual(effect.cleared, 1)
        instance.step(make_event(3, 'payment', {'user': 'u1', 'card': 'c1', 'txn': 't1'},
                                 {'amount': 3000, 'balance': 2000}))
        self.assertEqual([(i.comp_action, i.bound_args) for i in instance.activate()],
                         [('chargeUserFee', {'user': 'u1'})])

    def test_deactivate(self):
        """A deactivated instance ignores events and contributes nothing."""
        instance = self.load('B4').instantiate()
        instance.step(make_event(1, 'createCard', {'user': 'u1', 'card': 'c1'}))
        instance.deactivate()
        self.assertEqual(instance.depth(), 0)
        self.assertEqual(instance.step(make_event(2, 'createCard', {'user': 'u1', 'card': 'c2'})), NO_CHANGE)
        self.assertEqual(instance.activate(), [])

    def test_guarded_transitions(self):
        """Guards pick between transitions on the same event."""
        data = {
            'name': 'guarded',
            'states': ['s', 'big'],
            'initial': 's',
            'transitions': [
                {'from': 's', 'to': 'big', 'on': 'pay', 'guard': 'payload.amount >= 1000',
                 'frame': [{'comp': 'refund', 'capture': ['amount']}]},
                {'from': 's', 'to': 's', 'on': 'pay', 'guard': 'payload.amount < 1000'},
            ],
        }
        instance = CompAutomatonSpec.from_dict(data).instantiate()
        instance.step(make_event(1, 'pay', payload={'amount': 10}))
        self.assertEqual((instance.current, instance.depth()), ('s', 0))
        instance.step(make_event(2, 'pay', payload={'amount': 1000}))
        self.assertEqual((instance.current, instance.depth()), ('big', 1))

    def test_overlapping_guards(self):
        """Two guards that both hold make the step fail."""
        data = {
            'name': 'overlap',
            'states': ['s'],
            'initial': 's',
            'transitions': [
                {'from': 's', 'to': 's', 'on': 'pay', 'guard': 'payload.amount > 0'},
                {'from': 's', 'to': 's', 'on': 'pay', 'guard': 'payload.amount > 10'},
            ],
        }
        instance = CompAutomatonSpec.from_dict(data).instantiate()
        instance.step(make_event(1, 'pay', payload={'amount': 5}))
        self.assertErrorRegex(MalformedSpec, '2 transitions from state s match event pay',
                              instance.step, make_event(2, 'pay', payload={'amount': 50}))

    def test_validate(self):
        """Structural errors name the offending state, box or event."""
        def broken(**changes):
            data = dict(BOXED)
            data.update(changes)
            return data

        self.assertErrorRegex(MalformedSpec, 'initial state nowhere', CompAutomatonSpec.from_dict,
                              broken(initial='nowhere'))
        self.assertErrorRegex(MalformedSpec, 'unknown final states', CompAutomatonSpec.from_dict,
                              broken(finals=['gone']))
        self.assertErrorRegex(MalformedSpec, 'same entry and exit', CompAutomatonSpec.from_dict,
                              broken(boxes=[{'id': 'x', 'entry': 'out', 'exit': 'out'}]))
        self.assertErrorRegex(MalformedSpec, 'duplicate box work', CompAutomatonSpec.from_dict,
                              broken(boxes=BOXED['boxes'] * 2))
        self.assertErrorRegex(MalformedSpec, 'missing or invalid field', CompAutomatonSpec.from_dict,
                              {'name': 'empty'})

        transitions = BOXED['transitions'] + [{'from': 'out', 'to': 'inside', 'on': 'pre'}]
        self.assertErrorRegex(MalformedSpec, 'nondeterministic transitions from state out on event pre',
                              CompAutomatonSpec.from_dict, broken(transitions=transitions))

        transitions = BOXED['transitions'] + [{'from': 'out', 'to': 'out', 'on': 'x', 'action': 'explode'}]
        self.assertErrorRegex(MalformedSpec, 'unknown action explode', CompAutomatonSpec.from_dict,
                              broken(transitions=transitions))

    def test_partial_overlap(self):
        """Box regions nest or are disjoint."""
        data = {
            'name': 'overlap',
            'states': ['a', 'b', 'c', 'd'],
            'initial': 'a',
            'boxes': [{'id': 'one', 'entry': 'a', 'exit': 'c'}, {'id': 'two', 'entry': 'b', 'exit': 'd'}],
            'transitions': [
                {'from': 'a', 'to': 'b', 'on': 'x'},
                {'from': 'b', 'to': 'c', 'on': 'x'},
                {'from': 'c', 'to': 'd', 'on': 'x'},
            ],
        }
        self.assertErrorRegex(MalformedSpec, 'boxes one and two partially overlap', CompAutomatonSpec.from_dict, data)

    def test_shipped_automata(self):
        """The case study automata load and install the expected compensations."""
        for (name, actions) in [
            ('B1', set(['unload', 'reverseTransfer', 'refundBankFee'])),
            ('B2', set(['unload', 'reverseTransfer', 'refundUserFee', 'chargeUserFee'])),
            ('B3', set(['unload', 'reverseTransfer', 'refundEprocFee'])),
            ('B4', set(['blockCard'])),
            ('C1', set(['cancelCourierCourierFee'])),
            ('C2', set(['cancelCourierUserFee'])),
            ('C3', set(['cancelCourierEprocFee'])),
        ]:
            spec = self.load(name)
            self.assertEqual(spec.name, name)
            self.assertEqual(spec.comp_actions(), actions)

    def test_dump_deterministic(self):
        """Equal event sequences give byte identical instances."""
        def run():
            instance = CompInstance(self.load('B2'))
            instance.step(make_event(1, 'load', {'user': 'u1', 'card': 'c1'}, {'amount': 5000}))
            instance.step(make_event(2, 'transfer', {'user': 'u1', 'card': 'c1'}, {'to': 'c2', 'amount': 700}))
            return canonical(instance.dump())

        self.assertEqual(run(), run())
        self.assertTrue('"box_marks":[["funding",0]]' in run())
