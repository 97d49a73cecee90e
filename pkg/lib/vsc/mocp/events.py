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
Events, signals and traces shared by the automata, the monitors, the manager and the system.

An event is written to logs as a single record

    seq|name|subject-pairs|payload-pairs|phase

where the pairs are k=v items sorted by key and joined by a comma, e.g.,

    3|payment|card=c1,txn=t1,user=u1|amount=3000,balance=5000|normal
"""
import re

from collections import namedtuple

NORMAL = 'normal'
DURING_COMPENSATION = 'compensation'
PHASES = (NORMAL, DURING_COMPENSATION)

CONTINUE = 'continue'
COMPENSATE = 'compensate'
DISCARD = 'discard'

MONITOR_SIDE = 'monitor'
MANAGER_SIDE = 'manager'

MAX_SCALAR_LENGTH = 64
FORBIDDEN_CHARS = re.compile(r'[|,=\n]')
INT_REG = re.compile(r'^-?[0-9]+$')

Event = namedtuple('Event', ['seq', 'name', 'subject', 'payload', 'phase'])
Signal = namedtuple('Signal', ['kind', 'source', 'for_seq', 'expr', 'names'])


def _check_scalar(key, value):
    """Payload and subject values are integers, booleans or short strings."""
    if isinstance(value, bool) or isinstance(value, int):
        return value
    if isinstance(value, str):
        if len(value) > MAX_SCALAR_LENGTH or FORBIDDEN_CHARS.search(value):
            raise ValueError(f"invalid string value for {key}: {value!r}")
        return value
    raise ValueError(f"value for {key} must be an int, bool or short string, not {type(value).__name__}")


def make_event(seq, name, subject=None, payload=None, phase=NORMAL):
    """Build an Event, checking the scalar restrictions.

    @type seq: positive int
    @type name: string
    @type subject: dict role -> id
    @type payload: dict key -> scalar (amounts in integer cents)
    @type phase: NORMAL or DURING_COMPENSATION
    """
    if phase not in PHASES:
        raise ValueError(f"unknown phase {phase}")
    subject = dict((k, _check_scalar(k, v)) for k, v in (subject or {}).items())
    payload = dict((k, _check_scalar(k, v)) for k, v in (payload or {}).items())
    return Event(seq, name, subject, payload, phase)


def validate_event(event, trace):
    """True iff the event can be appended to the trace: its seq follows the last one and it has a name."""
    if not event.name:
        return False
    last = trace.last_seq()
    return event.seq > (last if last is not None else 0)


class Trace:
    """Ordered list of events with strictly increasing seq values."""

    def __init__(self):
        self.events = []

    def last_seq(self):
        """Seq of the last event, None for an empty trace."""
        if self.events:
            return self.events[-1].seq
        return None

    def append(self, event):
        if not validate_event(event, self):
            raise ValueError(f"event {event.name!r} with seq {event.seq} cannot follow seq {self.last_seq()}")
        self.events.append(event)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


def continue_signal(source, seq):
    """Continue token for the event with the given seq."""
    return Signal(CONTINUE, source, seq, None, None)


def compensate_signal(expr, seq):
    """Compensate trigger raised by a monitor while processing the event with the given seq."""
    if expr is None:
        raise ValueError("a compensate signal needs a trigger expression")
    return Signal(COMPENSATE, MONITOR_SIDE, seq, expr, None)


def discard_signal(names, seq):
    """Request to discard the named strategies."""
    return Signal(DISCARD, MONITOR_SIDE, seq, None, frozenset(names))


def format_scalar(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


def parse_scalar(txt):
    """Inverse of format_scalar. Strings that look like integers come back as integers."""
    if txt == 'true':
        return True
    if txt == 'false':
        return False
    if INT_REG.match(txt):
        return int(txt)
    return txt


def format_pairs(mapping):
    return ','.join(f"{k}={format_scalar(v)}" for k, v in sorted(mapping.items()))


def parse_pairs(txt):
    result = {}
    if not txt:
        return result
    for item in txt.split(','):
        key, value = item.split('=', 1)
        result[key] = parse_scalar(value)
    return result


def format_event(event):
    """Render the event as a seq|name|subject|payload|phase record."""
    return '|'.join([
        str(event.seq),
        event.name,
        format_pairs(event.subject),
        format_pairs(event.payload),
        event.phase,
    ])


def parse_event(line):
    """Parse a record produced by format_event."""
    fields = line.strip().split('|')
    if len(fields) != 5:
        raise ValueError(f"invalid event record {line!r}")
    (seq, name, subject, payload, phase) = fields
    return make_event(int(seq), name, parse_pairs(subject), parse_pairs(payload), phase)
