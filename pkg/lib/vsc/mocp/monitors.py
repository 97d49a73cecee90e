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
Trigger monitors: guarded event/condition/action automata deciding when to compensate and which
compensation strategies to use.

Monitors listen to system events (event:<name>) and to channel events sent by other monitors
(channel:<name>). Transitions fire in document order, the first enabled one wins, and run their
actions in order:

    {"inc": "fails"}                increment a counter
    {"set": {"user_class": "black"}}  assign a variable
    {"emit": "bankError"}           send a channel event to the other monitors
    {"compensate": "par(B1, C2)"}   raise a compensate trigger on the compensate line
    {"discard": ["B2", "B4", "C2"]} tell the manager these strategies will not be used

Spec files are JSON documents:

    {"name": "bankErrors", "states": ["watching"], "initial": "watching",
     "vars": {"fails": {"type": "counter"}}, "params": {"retries": 3},
     "transitions": [{"from": "watching", "to": "watching", "on": "event:paymentFail",
                      "guard": "fails + 1 >= retries", "do": [{"set": {"fails": 0}}, {"emit": "bankError"}]}]}
"""
import re

from collections import deque, namedtuple

from vsc.utils.fancylogger import getLogger
from vsc.mocp.events import MONITOR_SIDE, NORMAL, Event, compensate_signal, continue_signal, discard_signal
from vsc.mocp.exceptions import ChannelLoopDetected, MalformedSpec, UnknownChannel, UnknownStrategy
from vsc.mocp.guards import Guard
from vsc.mocp.specfile import read_structured

log = getLogger(__name__, fname=False)

ON_EVENT = 'event'
ON_CHANNEL = 'channel'

COUNTER = 'counter'
ENUM = 'enum'

USER_CLASS = 'user_class'
GREY, WHITE, BLACK = 'grey', 'white', 'black'

INC_VAR = 'inc'
SET_VAR = 'set'
EMIT_CHANNEL = 'emit'
EMIT_COMPENSATE = 'compensate'
DISCARD_STRATEGIES = 'discard'
ACTION_KINDS = (INC_VAR, SET_VAR, EMIT_CHANNEL, EMIT_COMPENSATE, DISCARD_STRATEGIES)

Strategy = namedtuple('Strategy', ['name'])
Seq = namedtuple('Seq', ['children'])
Par = namedtuple('Par', ['children'])

ChannelEvent = namedtuple('ChannelEvent', ['name', 'origin', 'for_seq'])
EmitCompensate = namedtuple('EmitCompensate', ['expr', 'monitor', 'for_seq'])
DiscardStrategies = namedtuple('DiscardStrategies', ['names', 'monitor', 'for_seq'])

VarDecl = namedtuple('VarDecl', ['kind', 'values', 'init'])

TOKEN_REG = re.compile(r'\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),]))')


def parse_trigger(text):
    """Parse a trigger expression such as B1, seq(B2, B4) or par(B1, seq(C2, B4)).

    @raise MalformedSpec: the text is not a valid, non-empty expression
    """
    tokens = []
    pos = 0
    text = text or ''
    while pos < len(text.rstrip()):
        match = TOKEN_REG.match(text, pos)
        if not match:
            raise MalformedSpec(f"invalid trigger expression {text!r} at position {pos}")
        tokens.append(match.group('name') or match.group('punct'))
        pos = match.end()

    def expr(idx):
        if idx >= len(tokens) or tokens[idx] in '(),':
            raise MalformedSpec(f"invalid trigger expression {text!r}")
        name = tokens[idx]
        if idx + 1 < len(tokens) and tokens[idx + 1] == '(' and name in ('seq', 'par'):
            children = []
            idx += 2
            while True:
                (child, idx) = expr(idx)
                children.append(child)
                if idx < len(tokens) and tokens[idx] == ',':
                    idx += 1
                elif idx < len(tokens) and tokens[idx] == ')':
                    idx += 1
                    break
                else:
                    raise MalformedSpec(f"unbalanced trigger expression {text!r}")
            return (Seq(tuple(children)) if name == 'seq' else Par(tuple(children))), idx
        return Strategy(name), idx + 1

    if not tokens:
        raise MalformedSpec("empty trigger expression")
    (result, idx) = expr(0)
    if idx != len(tokens):
        raise MalformedSpec(f"trailing tokens in trigger expression {text!r}")
    return result


def render_trigger(expr):
    """Text form of a trigger expression: seq children are joined by ', ', par children by ','."""
    if isinstance(expr, Strategy):
        return expr.name
    if isinstance(expr, Seq):
        return f"seq({', '.join(render_trigger(c) for c in expr.children)})"
    return f"par({','.join(render_trigger(c) for c in expr.children)})"


def trigger_strategies(expr):
    """All strategy names in the expression, in order of appearance."""
    if isinstance(expr, Strategy):
        return [expr.name]
    names = []
    for child in expr.children:
        names.extend(trigger_strategies(child))
    return names


class MonitorTransition:
    """A guarded transition of a trigger monitor."""

    def __init__(self, source, target, on, guard=None, actions=None):
        self.source = source
        self.target = target
        try:
            (self.on_kind, self.on_name) = on.split(':', 1)
        except (AttributeError, ValueError) as err:
            raise MalformedSpec(f"invalid trigger {on!r}, use event:<name> or channel:<name>") from err
        if self.on_kind not in (ON_EVENT, ON_CHANNEL) or not self.on_name:
            raise MalformedSpec(f"invalid trigger {on!r}, use event:<name> or channel:<name>")
        self.guard = Guard(guard)
        self.actions = [self._parse_action(action) for action in (actions or [])]

    @staticmethod
    def _parse_action(action):
        if not isinstance(action, dict) or len(action) != 1:
            raise MalformedSpec(f"invalid monitor action {action!r}")
        ((kind, arg),) = action.items()
        if kind not in ACTION_KINDS:
            raise MalformedSpec(f"unknown monitor action {kind}")
        if kind == EMIT_COMPENSATE:
            arg = parse_trigger(arg)
        elif kind == DISCARD_STRATEGIES:
            arg = frozenset(arg)
        return (kind, arg)

    def accepts(self, item):
        if isinstance(item, Event):
            return self.on_kind == ON_EVENT and self.on_name == item.name
        return self.on_kind == ON_CHANNEL and self.on_name == item.name

    def __repr__(self):
        return f"{self.source} --{self.on_kind}:{self.on_name}--> {self.target}"


class MonitorSpec:
    """The static description of a trigger monitor."""

    def __init__(self, name, states, initial, transitions, variables=None, params=None):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.name = name
        self.states = tuple(states)
        self.initial = initial
        self.transitions = list(transitions)
        self.variables = dict(variables or {})
        self.params = dict(params or {})
        self.validate()

    @classmethod
    def from_dict(cls, data):
        try:
            variables = {}
            for (var, decl) in data.get('vars', {}).items():
                kind = decl.get('type', COUNTER)
                values = tuple(decl.get('values', ()))
                init = decl.get('init', 0 if kind == COUNTER else (values[0] if values else None))
                variables[var] = VarDecl(kind, values, init)
            transitions = [MonitorTransition(tr['from'], tr['to'], tr['on'], guard=tr.get('guard'),
                                             actions=tr.get('do', []))
                           for tr in data.get('transitions', [])]
            return cls(data['name'], data['states'], data['initial'], transitions,
                       variables=variables, params=data.get('params', {}))
        except (KeyError, TypeError, AttributeError) as err:
            msg = f"monitor {data.get('name', '?') if isinstance(data, dict) else '?'}: missing or invalid field {err}"
            log.error(msg)
            raise MalformedSpec(msg) from err

    def validate(self):
        """Check states, variable declarations and actions.

        @raise MalformedSpec: naming the monitor and the offending element
        """
        states = set(self.states)
        if self.initial not in states:
            self.log.raiseException(f"{self.name}: initial state {self.initial} is not a state", MalformedSpec)

        for (var, decl) in self.variables.items():
            if decl.kind not in (COUNTER, ENUM):
                self.log.raiseException(f"{self.name}: variable {var} has unknown type {decl.kind}", MalformedSpec)
            if decl.kind == ENUM and decl.init not in decl.values:
                self.log.raiseException(f"{self.name}: enum {var} starts outside {decl.values}", MalformedSpec)
        if USER_CLASS in self.variables and self.variables[USER_CLASS].init != GREY:
            self.log.raiseException(f"{self.name}: {USER_CLASS} must start as {GREY}", MalformedSpec)

        known = set(self.variables) | set(self.params)
        for transition in self.transitions:
            if transition.source not in states or transition.target not in states:
                self.log.raiseException(f"{self.name}: transition {transition!r} uses an unknown state",
                                        MalformedSpec)
            undeclared = transition.guard.variables - known
            if undeclared:
                self.log.raiseException(f"{self.name}: guard of {transition!r} uses undeclared {sorted(undeclared)}",
                                        MalformedSpec)
            compensates = [arg for (kind, arg) in transition.actions if kind == EMIT_COMPENSATE]
            if len(compensates) > 1:
                self.log.raiseException(f"{self.name}: {transition!r} raises more than one compensate trigger",
                                        MalformedSpec)
            for (kind, arg) in transition.actions:
                if kind == INC_VAR and (arg not in self.variables or self.variables[arg].kind != COUNTER):
                    self.log.raiseException(f"{self.name}: {transition!r} increments unknown counter {arg}",
                                            MalformedSpec)
                if kind == SET_VAR:
                    for (var, value) in arg.items():
                        if var not in self.variables:
                            self.log.raiseException(f"{self.name}: {transition!r} sets undeclared {var}",
                                                    MalformedSpec)
                        decl = self.variables[var]
                        if decl.kind == ENUM and value not in decl.values:
                            self.log.raiseException(f"{self.name}: {value} is not a value of {var}", MalformedSpec)

    def listens(self, channel):
        return any(t.on_kind == ON_CHANNEL and t.on_name == channel for t in self.transitions)

    def emitted_channels(self):
        return set(arg for t in self.transitions for (kind, arg) in t.actions if kind == EMIT_CHANNEL)

    def triggers(self):
        """All trigger expressions this monitor can raise."""
        return [arg for t in self.transitions for (kind, arg) in t.actions if kind == EMIT_COMPENSATE]

    def discards(self):
        return set(name for t in self.transitions for (kind, arg) in t.actions if kind == DISCARD_STRATEGIES
                   for name in arg)

    def instantiate(self, params=None):
        return MonitorInstance(self, params=params)


def load_monitor(filename):
    """Read a trigger monitor spec file."""
    spec = MonitorSpec.from_dict(read_structured(filename))
    log.info("Loaded monitor %s from %s", spec.name, filename)
    return spec


def lint_channels(specs, strict=False):
    """Return a note for every channel that is emitted but never listened to.

    @param strict: raise UnknownChannel for the first such channel instead
    """
    notes = []
    for spec in specs:
        for channel in sorted(spec.emitted_channels()):
            if not any(other.listens(channel) for other in specs):
                note = f"UnknownChannel: monitor {spec.name} emits {channel} but no monitor listens on it"
                if strict:
                    raise UnknownChannel(note)
                notes.append(note)
    return notes


def check_strategies(specs, names):
    """Verify that every trigger expression and discard only names known strategies.

    @raise UnknownStrategy
    """
    names = set(names)
    for spec in specs:
        used = set(spec.discards())
        for expr in spec.triggers():
            used.update(trigger_strategies(expr))
        unknown = used - names
        if unknown:
            msg = f"monitor {spec.name} refers to unknown strategies {sorted(unknown)}"
            log.error(msg)
            raise UnknownStrategy(msg)


class MonitorInstance:
    """A running trigger monitor."""

    def __init__(self, spec, params=None):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.spec = spec
        self.current = spec.initial
        self.var_values = dict((var, decl.init) for (var, decl) in spec.variables.items())
        self.params = dict(spec.params)
        self.params.update(params or {})

    @property
    def name(self):
        return self.spec.name

    def _context(self):
        context = dict(self.params)
        context.update(self.var_values)
        return context

    def step(self, item):
        """Process a system event or a channel event.

        @returns: list of ChannelEvent, EmitCompensate and DiscardStrategies outputs, in action order
        """
        event = item if isinstance(item, Event) else None
        for_seq = item.seq if event is not None else item.for_seq
        transition = None
        for candidate in self.spec.transitions:
            if candidate.source == self.current and candidate.accepts(item) and \
                    candidate.guard.holds(event, self._context()):
                transition = candidate
                break
        if transition is None:
            return []

        outputs = []
        for (kind, arg) in transition.actions:
            if kind == INC_VAR:
                self.var_values[arg] += 1
            elif kind == SET_VAR:
                self.var_values.update(arg)
            elif kind == EMIT_CHANNEL:
                outputs.append(ChannelEvent(arg, self.name, for_seq))
            elif kind == EMIT_COMPENSATE:
                outputs.append(EmitCompensate(arg, self.name, for_seq))
            elif kind == DISCARD_STRATEGIES:
                outputs.append(DiscardStrategies(arg, self.name, for_seq))

        self.log.debug("%s: %s fired on %s, outputs %s", self.name, transition, item.name, outputs)
        self.current = transition.target
        return outputs


def route_channels(pending, monitors, notes=None):
    """Deliver channel events to the monitors until no new channel events are produced.

    Each round delivers the pending channel events, in emission order, to every monitor in
    registration order; channel events produced in a round are delivered in the next one.

    @type pending: list of ChannelEvent
    @type monitors: list of MonitorInstance
    @type notes: list collecting a note per channel event nobody listens to

    @returns: (monitors, list of EmitCompensate and DiscardStrategies in production order)

    @raise ChannelLoopDetected: no fixpoint after #monitors x #states rounds
    """
    outputs = []
    bound = max(1, len(monitors) * sum(len(m.spec.states) for m in monitors))
    rounds = 0
    pending = list(pending)
    while pending:
        rounds += 1
        if rounds > bound:
            msg = f"channel events keep being produced after {bound} rounds: {[c.name for c in pending]}"
            log.error(msg)
            raise ChannelLoopDetected(msg)

        produced = []
        for channel_event in pending:
            if not any(m.spec.listens(channel_event.name) for m in monitors):
                note = f"UnknownChannel: nobody listens on {channel_event.name} (from {channel_event.origin})"
                log.warning(note)
                if notes is not None:
                    notes.append(note)
                continue
            for monitor in monitors:
                for output in monitor.step(channel_event):
                    if isinstance(output, ChannelEvent):
                        produced.append(output)
                    else:
                        outputs.append(output)
        pending = produced

    return monitors, outputs


class MonitorLayer:
    """All trigger monitors, stepped in registration order for every event."""

    def __init__(self, specs, params=None):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.monitors = [spec.instantiate(params=params) for spec in specs]
        self.notes = []
        self.inbox = deque()

    def process(self, event):
        """Step every monitor with the event and route the resulting channel events.

        @returns: list of EmitCompensate and DiscardStrategies outputs
        """
        direct = []
        channel_events = []
        for monitor in self.monitors:
            for output in monitor.step(event):
                if isinstance(output, ChannelEvent):
                    channel_events.append(output)
                else:
                    direct.append(output)

        (_, routed) = route_channels(channel_events, self.monitors, notes=self.notes)
        return direct + routed

    def monitor(self, name):
        for monitor in self.monitors:
            if monitor.name == name:
                return monitor
        raise KeyError(name)

    def pump(self, compensate_line, continue_line):
        """Process the events in the inbox.

        Compensate triggers and discards go to the compensate line. For a normal event the monitor
        side continue token is sent only when no monitor raised a compensate trigger for it.
        """
        while self.inbox:
            event = self.inbox.popleft()
            compensated = False
            for output in self.process(event):
                if isinstance(output, EmitCompensate):
                    compensate_line.append(compensate_signal(output.expr, event.seq))
                    compensated = True
                else:
                    compensate_line.append(discard_signal(output.names, event.seq))
            if event.phase == NORMAL and not compensated:
                continue_line.append(continue_signal(MONITOR_SIDE, event.seq))
