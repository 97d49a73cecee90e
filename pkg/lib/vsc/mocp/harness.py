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
Simulated e-procurement system used to run compensation scenarios.

The system executes the steps of a scenario script against a world model. Every action emits an
event on the event bus, after which the system waits for the two continue tokens of the
handshake. Compensation instructions sent by the manager meanwhile are executed at once; their
events are sent in the compensation phase and need no handshake.

A scenario file is a JSON list of steps, or an object with the steps and optional seed, accounts
and stock:

    {"seed": 0, "accounts": {"u1": 10000},
     "steps": [{"do": "createCard", "args": {"user": "u1", "card": "c1"}},
               {"do": "load", "args": {"card": "c1", "amount": 5000}},
               {"fault": "paymentFail", "count": 3},
               {"do": "order", "args": {"user": "u1", "card": "c1", "txn": "t1", "amount": 3000}},
               {"classify": "fraudFlag", "user": "u1"},
               {"cancel": {"user": "u1", "txn": "t1"}}]}
"""
from collections import deque, namedtuple

from vsc.utils.fancylogger import getLogger
from vsc.mocp.events import DURING_COMPENSATION, NORMAL, Trace, format_event, make_event
from vsc.mocp.exceptions import (
    CompensationFault, Deadlock, InsufficientFunds, MalformedSpec, NoCourierAvailable, RuntimeFault, ScenarioError,
)
from vsc.mocp.manager import Ack, CompensationManager
from vsc.mocp.monitors import MonitorLayer
from vsc.mocp.specfile import read_structured

DEFAULT_FEE = 200  # cents per cancelled operation
DEFAULT_RETRIES = 3
MAX_SCHEDULER_ROUNDS = 10

COURIERS = ('A', 'B')
PAYERS = ('user', 'bank', 'courier', 'eproc')

PAYMENT_FAIL = 'paymentFail'
COURIER_A_FAIL = 'courierAFail'
COURIER_B_FAIL = 'courierBFail'
FAULT_KINDS = (PAYMENT_FAIL, COURIER_A_FAIL, COURIER_B_FAIL)
CLASSIFY_HINTS = ('fraudFlag', 'trustedFlag')

ORDER = 'order'

Do = namedtuple('Do', ['action', 'args'])
InjectFault = namedtuple('InjectFault', ['kind', 'count'])
UserCancel = namedtuple('UserCancel', ['user', 'txn'])
ClassifyHint = namedtuple('ClassifyHint', ['flag', 'user'])

log = getLogger(__name__, fname=False)


class WorldState:
    """Bank accounts, virtual credit cards, couriers, stock and the charges ledger. Amounts in cents."""

    def __init__(self, accounts=None, stock=None):
        self.bank_account = dict(accounts or {})
        self.cards = {}
        self.card_owner = {}
        self.courier_available = dict((courier, True) for courier in COURIERS)
        self.bookings = {}
        self.orders = {}
        self.shipments = set()
        self.blocked_cards = set()
        self.charges = []
        self.third_party_paid = {}
        self.stock = dict(stock or {})

    def check(self):
        """Verify that no balance is negative and that only known cards are blocked.

        @raise RuntimeFault
        """
        for (kind, balances) in (('bank account', self.bank_account), ('card', self.cards),
                                 ('stock', self.stock)):
            negative = sorted(key for (key, value) in balances.items() if value < 0)
            if negative:
                raise RuntimeFault(f"negative {kind} balance for {', '.join(negative)}")
        if not self.blocked_cards <= set(self.cards):
            raise RuntimeFault(f"unknown blocked cards {sorted(self.blocked_cards - set(self.cards))}")

    def charged(self, payer):
        return sum(amount for (who, amount, _) in self.charges if who == payer)

    def summary(self):
        """Flat key -> value view of the world, used for the WORLD records of a report."""
        summary = {}
        for (user, balance) in self.bank_account.items():
            summary[f"bank.{user}"] = balance
        for (card, balance) in self.cards.items():
            summary[f"card.{card}"] = balance
        for (txn, courier) in self.bookings.items():
            summary[f"booking.{txn}"] = courier
        for (txn, amount) in self.third_party_paid.items():
            summary[f"paid.{txn}"] = amount
        for (item, qty) in self.stock.items():
            summary[f"stock.{item}"] = qty
        for courier in COURIERS:
            summary[f"courier.{courier}"] = 'available' if self.courier_available[courier] else 'unavailable'
        for payer in PAYERS:
            summary[f"charges.{payer}"] = self.charged(payer)
        summary['blocked'] = ','.join(sorted(self.blocked_cards))
        summary['shipped'] = ','.join(sorted(self.shipments))
        return summary


def _require(args, *keys):
    missing = [key for key in keys if key not in args]
    if missing:
        raise ScenarioError(f"missing arguments {missing}")
    return [args[key] for key in keys]


def _positive(key, value):
    """Amounts and quantities are positive integers."""
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ScenarioError(f"{key} must be a positive integer, not {value!r}")
    return value


class ActionRegistry:
    """Forward and compensating actions of the system.

    Forward actions return the subject and payload of the event they emit. Compensating actions
    receive the arguments bound at install time and their event carries those arguments.
    """

    def __init__(self, fee=DEFAULT_FEE):
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.fee = fee
        self.forward = {
            'login': self._login,
            'createCard': self._create_card,
            'load': self._load,
            'transfer': self._transfer,
            'pay': self._pay,
            'book': self._book,
            'ship': self._ship,
            'decrementStock': self._decrement_stock,
        }
        self.compensating = {
            'unload': self._unload,
            'reverseTransfer': self._reverse_transfer,
            'refundBankFee': lambda world, args: self._refund(world, args, 'bank'),
            'refundUserFee': lambda world, args: self._refund(world, args, 'user'),
            'refundEprocFee': lambda world, args: self._refund(world, args, 'eproc'),
            'chargeUserFee': self._charge_user_fee,
            'blockCard': self._block_card,
            'cancelCourierCourierFee': lambda world, args: self._cancel_courier(world, args, 'courier'),
            'cancelCourierUserFee': lambda world, args: self._cancel_courier(world, args, 'user'),
            'cancelCourierEprocFee': lambda world, args: self._cancel_courier(world, args, 'eproc'),
            'incrementStock': self._increment_stock,
        }

    def check(self, ca_specs):
        """Verify that every compensation action the automata can install is registered.

        @raise MalformedSpec
        """
        for spec in ca_specs:
            unknown = spec.comp_actions() - set(self.compensating)
            if unknown:
                self.log.raiseException(f"automaton {spec.name} installs unknown compensations {sorted(unknown)}",
                                        MalformedSpec)

    def exec_action(self, world, action, args, seq):
        """Execute a forward action, the world is updated in place.

        @returns: the emitted Event

        @raise ScenarioError: unknown action or arguments
        @raise InsufficientFunds, NoCourierAvailable: the action cannot be executed, the world is unchanged
        """
        if action not in self.forward:
            raise ScenarioError(f"unknown action {action}")
        (name, subject, payload) = self.forward[action](world, dict(args))
        world.check()
        return make_event(seq, name, subject, payload)

    def exec_compensation(self, world, instruction, seq):
        """Execute a compensation with the arguments bound when it was installed.

        @returns: the emitted Event, in the compensation phase

        @raise CompensationFault: the compensation cannot be executed, the world is unchanged
        """
        if instruction.comp_action not in self.compensating:
            raise CompensationFault(f"unknown compensation {instruction.comp_action}")
        args = instruction.bound_args
        try:
            self.compensating[instruction.comp_action](world, args)
        except KeyError as err:
            raise CompensationFault(f"{instruction.comp_action} misses argument {err}") from err
        world.check()
        return make_event(seq, instruction.comp_action, payload=args, phase=DURING_COMPENSATION)

    # forward actions

    @staticmethod
    def _owner(world, card):
        if card not in world.cards:
            raise ScenarioError(f"unknown card {card}")
        return world.card_owner[card]

    def _login(self, world, args):
        (user,) = _require(args, 'user')
        world.bank_account.setdefault(user, 0)
        return 'login', {'user': user}, {}

    def _create_card(self, world, args):
        (user, card) = _require(args, 'user', 'card')
        if card in world.cards:
            raise ScenarioError(f"card {card} already exists")
        world.bank_account.setdefault(user, 0)
        world.cards[card] = 0
        world.card_owner[card] = user
        return 'createCard', {'user': user, 'card': card}, {}

    def _load(self, world, args):
        (card, amount) = _require(args, 'card', 'amount')
        _positive('amount', amount)
        user = self._owner(world, card)
        if world.bank_account[user] < amount:
            raise InsufficientFunds(f"bank account of {user} holds {world.bank_account[user]}, cannot load {amount}")
        world.bank_account[user] -= amount
        world.cards[card] += amount
        return 'load', {'user': user, 'card': card}, {'amount': amount}

    def _transfer(self, world, args):
        (card, to, amount) = _require(args, 'card', 'to', 'amount')
        _positive('amount', amount)
        user = self._owner(world, card)
        self._owner(world, to)
        if world.cards[card] < amount:
            raise InsufficientFunds(f"card {card} holds {world.cards[card]}, cannot transfer {amount}")
        world.cards[card] -= amount
        world.cards[to] += amount
        return 'transfer', {'user': user, 'card': card}, {'to': to, 'amount': amount}

    def _pay(self, world, args):
        (card, txn, amount) = _require(args, 'card', 'txn', 'amount')
        _positive('amount', amount)
        user = self._owner(world, card)
        if card in world.blocked_cards:
            raise InsufficientFunds(f"card {card} is blocked")
        if world.cards[card] < amount:
            raise InsufficientFunds(f"card {card} holds {world.cards[card]}, cannot pay {amount}")
        world.cards[card] -= amount
        world.third_party_paid[txn] = world.third_party_paid.get(txn, 0) + amount
        return 'payment', {'user': user, 'card': card, 'txn': txn}, {'amount': amount, 'balance': world.cards[card]}

    def _book(self, world, args):
        (user, txn) = _require(args, 'user', 'txn')
        for courier in COURIERS:
            if world.courier_available[courier]:
                world.bookings[txn] = courier
                return f"bookCourier{courier}", {'user': user, 'txn': txn}, {'courier': courier}
        raise NoCourierAvailable(f"no courier available for {txn}")

    def _ship(self, world, args):
        (user, txn) = _require(args, 'user', 'txn')
        if txn not in world.bookings:
            raise ScenarioError(f"nothing booked for {txn}")
        world.shipments.add(txn)
        return 'ship', {'user': user, 'txn': txn}, {}

    def _decrement_stock(self, world, args):
        (item, qty) = _require(args, 'item', 'qty')
        _positive('qty', qty)
        if world.stock.get(item, 0) < qty:
            raise ScenarioError(f"only {world.stock.get(item, 0)} of {item} in stock, cannot take {qty}")
        world.stock[item] = world.stock.get(item, 0) - qty
        return 'decrementStock', {'item': item}, {'qty': qty}

    # compensating actions

    def _debit_user(self, world, user, amount):
        if world.bank_account.get(user, 0) < amount:
            raise CompensationFault(f"bank account of {user} cannot pay {amount}")
        world.bank_account[user] -= amount

    def _unload(self, world, args):
        (user, card, amount) = (args['user'], args['card'], args['amount'])
        if world.cards.get(card, 0) < amount:
            raise CompensationFault(f"card {card} cannot give back {amount}")
        world.cards[card] -= amount
        world.bank_account[user] = world.bank_account.get(user, 0) + amount

    def _reverse_transfer(self, world, args):
        (card, to, amount) = (args['card'], args['to'], args['amount'])
        if card not in world.cards or world.cards.get(to, 0) < amount:
            raise CompensationFault(f"cannot move {amount} back from {to} to {card}")
        world.cards[to] -= amount
        world.cards[card] += amount

    def _refund(self, world, args, payer):
        """Take the payment back from the third party, the fee is paid by payer.

        A user never pays more fee than the refunded amount.
        """
        (user, txn, amount) = (args['user'], args['txn'], args['amount'])
        if world.third_party_paid.get(txn, 0) < amount:
            raise CompensationFault(f"{amount} was not paid for {txn}")
        fee = min(self.fee, amount) if payer == 'user' else self.fee
        refund = amount - fee if payer == 'user' else amount
        world.third_party_paid[txn] -= amount
        world.bank_account[user] = world.bank_account.get(user, 0) + refund
        world.charges.append((payer, fee, f"refund {txn}"))

    def _charge_user_fee(self, world, args):
        user = args['user']
        self._debit_user(world, user, self.fee)
        world.charges.append(('user', self.fee, f"charge {user}"))

    def _block_card(self, world, args):
        card = args['card']
        if card not in world.cards:
            raise CompensationFault(f"unknown card {card}")
        world.blocked_cards.add(card)

    def _cancel_courier(self, world, args, payer):
        (user, txn, courier) = (args['user'], args['txn'], args['courier'])
        if world.bookings.get(txn) != courier:
            raise CompensationFault(f"{txn} is not booked with courier {courier}")
        if txn in world.shipments:
            raise CompensationFault(f"{txn} is already shipped")
        if payer == 'user':
            self._debit_user(world, user, self.fee)
        del world.bookings[txn]
        world.charges.append((payer, self.fee, f"cancel {txn}"))

    def _increment_stock(self, world, args):
        (item, qty) = (args['item'], args['qty'])
        world.stock[item] = world.stock.get(item, 0) + qty


class ScenarioScript:
    """Ordered steps of a scenario, with the seed and the initial world."""

    def __init__(self, steps, seed=0, accounts=None, stock=None, name=None):
        self.steps = list(steps)
        self.seed = seed
        self.accounts = dict(accounts or {})
        self.stock = dict(stock or {})
        self.name = name

    @classmethod
    def from_data(cls, data, name=None):
        """Build a script from the decoded JSON document (a list of steps or an object).

        @raise ScenarioError
        """
        if isinstance(data, list):
            data = {'steps': data}
        if not isinstance(data, dict) or not isinstance(data.get('steps'), list):
            raise ScenarioError("a scenario is a list of steps or an object with a steps list")
        seed = data.get('seed', 0)
        if not isinstance(seed, int):
            raise ScenarioError(f"seed must be an integer, not {seed!r}")
        steps = [cls.parse_step(step) for step in data['steps']]
        return cls(steps, seed=seed, accounts=data.get('accounts'), stock=data.get('stock'),
                   name=data.get('name', name))

    @staticmethod
    def parse_step(step):
        if not isinstance(step, dict):
            raise ScenarioError(f"invalid step {step!r}")
        if 'do' in step:
            args = step.get('args', {})
            if not isinstance(args, dict):
                raise ScenarioError(f"arguments of {step['do']} must be an object")
            return Do(step['do'], args)
        if 'fault' in step:
            if step['fault'] not in FAULT_KINDS:
                raise ScenarioError(f"unknown fault {step['fault']}, use one of {', '.join(FAULT_KINDS)}")
            count = step.get('count', 1)
            if not isinstance(count, int) or count < 1:
                raise ScenarioError(f"fault count must be a positive integer, not {count!r}")
            return InjectFault(step['fault'], count)
        if 'cancel' in step:
            cancel = step['cancel']
            if not isinstance(cancel, dict) or 'user' not in cancel or 'txn' not in cancel:
                raise ScenarioError("cancel needs a user and a txn")
            return UserCancel(cancel['user'], cancel['txn'])
        if 'classify' in step:
            if step['classify'] not in CLASSIFY_HINTS or 'user' not in step:
                raise ScenarioError(f"classify needs a user and one of {', '.join(CLASSIFY_HINTS)}")
            return ClassifyHint(step['classify'], step['user'])
        raise ScenarioError(f"unknown step {step!r}")

    def with_seed(self, seed):
        return ScenarioScript(self.steps, seed=seed, accounts=self.accounts, stock=self.stock, name=self.name)


def load_scenario(filename):
    """Read a scenario file."""
    script = ScenarioScript.from_data(read_structured(filename), name=filename)
    log.info("Loaded scenario %s with %d steps", filename, len(script.steps))
    return script


class Report:
    """Outcome of a simulation run."""

    def __init__(self, trace, world_final, journal, faults, emission_log, discard_log, notes=None):
        self.trace = trace
        self.world_final = world_final
        self.journal = journal
        self.faults = faults
        self.emission_log = emission_log
        self.discard_log = discard_log
        self.notes = notes or []

    def records(self, kind):
        """Journal records of the given kind (EVT, TRG, COMP, FAULT, HSK or DSC), without the prefix."""
        prefix = f"{kind}|"
        return [record[len(prefix):] for record in self.journal if record.startswith(prefix)]

    @property
    def handshake_log(self):
        return self.records('HSK')

    def render(self):
        lines = list(self.journal)
        for (key, value) in sorted(self.world_final.summary().items()):
            lines.append(f"WORLD|{key}|{value}")
        return '\n'.join(lines) + '\n'


class Simulation:
    """Runs scenario scripts against the compensating automata and trigger monitors.

    The system, the monitor layer and the manager take turns on a single thread: after each
    normal event the monitor layer and then the manager are pumped until both continue tokens
    for the event have arrived.
    """

    def __init__(self, ca_specs, mon_specs, retries=DEFAULT_RETRIES, fee=DEFAULT_FEE, params=None):
        """Initialisation.

        @type ca_specs: list of CompAutomatonSpec
        @type mon_specs: list of MonitorSpec
        @type retries: attempts per branch of an order, also given to the monitors as the retries param
        @type fee: cancellation fee in cents
        @type params: extra monitor params
        """
        self.log = getLogger(self.__class__.__name__, fname=False)
        if retries < 1:
            raise ScenarioError(f"retries must be at least 1, not {retries}")
        self.ca_specs = list(ca_specs)
        self.mon_specs = list(mon_specs)
        self.retries = retries
        self.registry = ActionRegistry(fee=fee)
        self.registry.check(self.ca_specs)
        self.params = dict(params or {})
        self.params['retries'] = retries
        self._reset(ScenarioScript([]))

    def _reset(self, script):
        self.script = script
        self.world = WorldState(script.accounts, script.stock)
        self.trace = Trace()
        self.journal = []
        self.manager = CompensationManager(self.ca_specs, journal=self.journal)
        self.layer = MonitorLayer(self.mon_specs, params=self.params)
        self.continue_line = deque()
        self.faults = []
        self._seq = 0
        self._payment_faults = 0

    def _emit(self, event):
        self.trace.append(event)
        self.journal.append(f"EVT|{format_event(event)}")
        self.log.debug("emitted %s", format_event(event))
        self.layer.inbox.append(event)
        self.manager.inbox.append(event)
        if event.phase == NORMAL:
            self._handshake(event)
        return event

    def _next_seq(self):
        self._seq += 1
        return self._seq

    def _sink(self, instruction):
        """Execute a compensation instruction sent by the manager."""
        try:
            event = self.registry.exec_compensation(self.world, instruction, self._seq + 1)
        except CompensationFault as err:
            return Ack(False, str(err))
        self._seq += 1
        self._emit(event)
        return Ack(True, None)

    def _feed(self):
        self.layer.pump(self.manager.compensate_line, self.continue_line)

    def _handshake(self, event):
        """Block until two continue tokens for the event have arrived.

        @raise Deadlock
        """
        tokens = []
        for _ in range(MAX_SCHEDULER_ROUNDS):
            self.layer.pump(self.manager.compensate_line, self.continue_line)
            self.manager.pump(self.continue_line, self._sink, self._feed)
            while self.continue_line:
                signal = self.continue_line.popleft()
                if signal.for_seq != event.seq:
                    self.log.raiseException(f"continue token for seq {signal.for_seq} while waiting for {event.seq}",
                                            Deadlock)
                tokens.append(signal.source)
                self.journal.append(f"HSK|{event.seq}|{signal.source}")
            if len(tokens) >= 2:
                break

        if len(tokens) != 2:
            self.log.raiseException(f"event {event.name} (seq {event.seq}) got {len(tokens)} continue tokens "
                                    f"after {MAX_SCHEDULER_ROUNDS} rounds", Deadlock)

    def _reject(self, action, err):
        self.log.warning("step %s rejected: %s", action, err)
        self.faults.append((action, str(err)))
        self.journal.append(f"FAULT|-|-|{action}|{err}")

    def _do(self, action, args):
        try:
            event = self.registry.exec_action(self.world, action, args, self._seq + 1)
        except (InsufficientFunds, NoCourierAvailable) as err:
            self._reject(action, err)
            return None
        self._seq += 1
        return self._emit(event)

    def _attempt_payment(self, args, attempt):
        user = self.world.card_owner.get(args['card'])
        subject = {'user': user, 'card': args['card'], 'txn': args['txn']}
        reason = None
        if self._payment_faults:
            self._payment_faults -= 1
            reason = 'bank'
        else:
            try:
                event = self.registry.exec_action(self.world, 'pay', args, self._seq + 1)
            except InsufficientFunds as err:
                self.log.info("payment for %s failed: %s", args['txn'], err)
                reason = 'funds'
            else:
                self._seq += 1
                self._emit(event)
                return True
        self._emit(make_event(self._next_seq(), PAYMENT_FAIL, subject,
                              {'amount': args['amount'], 'attempt': attempt, 'reason': reason}))
        return False

    def _attempt_booking(self, args, attempt):
        try:
            event = self.registry.exec_action(self.world, 'book', args, self._seq + 1)
        except NoCourierAvailable as err:
            self.log.info("booking for %s failed: %s", args['txn'], err)
            self._emit(make_event(self._next_seq(), 'courierFail', {'user': args['user'], 'txn': args['txn']},
                                  {'attempt': attempt}))
            return False
        self._seq += 1
        self._emit(event)
        return True

    def _order(self, args):
        """Pay and book a courier, interleaving the attempts of both branches.

        Even seeds start with the payment, odd seeds with the booking. A branch that fails
        retries times abandons the order.
        """
        (user, card, txn, amount) = _require(args, 'user', 'card', 'txn', 'amount')
        _positive('amount', amount)
        if card not in self.world.cards:
            raise ScenarioError(f"unknown card {card}")
        self.world.orders[txn] = {'user': user, 'card': card, 'amount': amount}
        branches = [('pay', self._attempt_payment), ('book', self._attempt_booking)]
        if self.script.seed % 2:
            branches.reverse()

        attempts = dict((name, 0) for (name, _) in branches)
        done = set()
        while len(done) < len(branches):
            for (name, attempt) in branches:
                if name in done:
                    continue
                attempts[name] += 1
                if attempt(args, attempts[name]):
                    done.add(name)
                elif attempts[name] >= self.retries:
                    self.log.info("order %s abandoned after %d failed %s attempts", txn, attempts[name], name)
                    return

    def _step(self, step):
        if isinstance(step, Do):
            if step.action == ORDER:
                self._order(step.args)
            else:
                self._do(step.action, step.args)
        elif isinstance(step, InjectFault):
            if step.kind == PAYMENT_FAIL:
                self._payment_faults += step.count
            else:
                self.world.courier_available[step.kind[len('courier'):-len('Fail')]] = False
            self.log.debug("injected fault %s x%d", step.kind, step.count)
        elif isinstance(step, UserCancel):
            self._emit(make_event(self._next_seq(), 'cancel', {'user': step.user, 'txn': step.txn}))
        elif isinstance(step, ClassifyHint):
            self._emit(make_event(self._next_seq(), step.flag, {'user': step.user}))
        else:
            raise ScenarioError(f"unknown step {step!r}")

    def run(self, script):
        """Execute the script from a fresh world, manager and monitor layer.

        @type script: ScenarioScript

        @returns: Report

        @raise Deadlock: a continue token is missing, the protocol is broken
        @raise SpecError: the script or the specs are invalid
        """
        self._reset(script)
        for (idx, step) in enumerate(script.steps):
            self.log.debug("step %d: %s", idx, step)
            self._step(step)

        faults = self.faults + [(f.instruction.comp_action, f.reason) for f in self.manager.faults]
        return Report(self.trace, self.world, self.journal, faults, self.manager.emission_log,
                      self.manager.discard_log, notes=self.layer.notes)
