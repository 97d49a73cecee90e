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
Tests for the vsc.mocp.events module.
"""
from hypothesis import given, settings, strategies as st

from vsc.install.testing import TestCase

from vsc.mocp.events import (
    COMPENSATE, CONTINUE, DISCARD, DURING_COMPENSATION, MANAGER_SIDE, NORMAL, Trace,
    compensate_signal, continue_signal, discard_signal, format_event, make_event, parse_event, validate_event,
)
from vsc.mocp.monitors import Strategy


class TestEvents(TestCase):
    """Tests for events, traces and signals."""

    def test_make_event(self):
        """Subjects and payloads only hold short scalars."""
        event = make_event(1, 'payment', {'user': 'u1', 'card': 'c1'}, {'amount': 3000, 'ok': True})
        self.assertEqual(event.phase, NORMAL)
        self.assertEqual(event.payload['amount'], 3000)

        self.assertErrorRegex(ValueError, 'must be an int', make_event, 1, 'load', None, {'amount': 1.5})
        self.assertErrorRegex(ValueError, 'invalid string', make_event, 1, 'load', {'user': 'a|b'})
        self.assertErrorRegex(ValueError, 'invalid string', make_event, 1, 'load', {'user': 'x' * 65})
        self.assertErrorRegex(ValueError, 'unknown phase', make_event, 1, 'load', phase='later')

    def test_trace(self):
        """Seq values in a trace strictly increase."""
        trace = Trace()
        self.assertEqual(trace.last_seq(), None)
        self.assertFalse(validate_event(make_event(0, 'login'), trace))
        self.assertFalse(validate_event(make_event(1, ''), trace))

        trace.append(make_event(1, 'login', {'user': 'u1'}))
        trace.append(make_event(3, 'createCard', {'user': 'u1', 'card': 'c1'}))
        self.assertEqual(trace.last_seq(), 3)
        self.assertEqual(len(trace), 2)
        self.assertEqual([e.name for e in trace], ['login', 'createCard'])

        self.assertErrorRegex(ValueError, 'cannot follow seq 3', trace.append, make_event(3, 'load'))
        self.assertEqual(len(trace), 2)

    @settings(max_examples=500, deadline=None)
    @given(st.lists(st.tuples(st.integers(min_value=-3, max_value=40), st.sampled_from(['', 'login', 'load'])),
                    max_size=50))
    def test_trace_property(self, candidates):
        """Whatever events are offered, the ones validate_event accepts form a monotone trace."""
        trace = Trace()
        for (seq, name) in candidates:
            event = make_event(seq, name)
            if validate_event(event, trace):
                trace.append(event)
            else:
                self.assertErrorRegex(ValueError, 'cannot follow', trace.append, event)

        seqs = [event.seq for event in trace]
        self.assertTrue(all(earlier < later for (earlier, later) in zip(seqs, seqs[1:])))
        self.assertTrue(all(seq > 0 for seq in seqs))
        self.assertTrue(all(event.name for event in trace))

    def test_format_event(self):
        """Pairs are sorted by key, booleans are written as true and false."""
        event = make_event(3, 'payment', {'user': 'u1', 'txn': 't1', 'card': 'c1'},
                           {'balance': 2000, 'amount': 3000, 'retry': False})
        record = format_event(event)
        self.assertEqual(record, '3|payment|card=c1,txn=t1,user=u1|amount=3000,balance=2000,retry=false|normal')
        self.assertEqual(parse_event(record), event)

        event = make_event(9, 'blockCard', payload={'card': 'c1'}, phase=DURING_COMPENSATION)
        self.assertEqual(format_event(event), '9|blockCard||card=c1|compensation')
        self.assertEqual(parse_event(format_event(event)), event)

        self.assertErrorRegex(ValueError, 'invalid event record', parse_event, '1|login|user=u1')

    def test_signals(self):
        """Continue, compensate and discard signals."""
        signal = continue_signal(MANAGER_SIDE, 4)
        self.assertEqual((signal.kind, signal.source, signal.for_seq), (CONTINUE, MANAGER_SIDE, 4))

        signal = compensate_signal(Strategy('B1'), 5)
        self.assertEqual(signal.kind, COMPENSATE)
        self.assertEqual(signal.expr, Strategy('B1'))
        self.assertErrorRegex(ValueError, 'needs a trigger', compensate_signal, None, 5)

        signal = discard_signal(['B2', 'B4'], 6)
        self.assertEqual(signal.kind, DISCARD)
        self.assertEqual(signal.names, frozenset(['B2', 'B4']))
