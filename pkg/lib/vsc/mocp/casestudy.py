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
The e-procurement case study: compensation strategies B1-B4 and C1-C3, the trigger monitors and
the decision matrix choosing a trigger per user class and kind of error.

    B1, B2, B3  refund the payment, the fee is paid by the bank, the user or the e-procurement system
    B4          block the virtual credit cards
    C1, C2, C3  cancel the courier, the fee is paid by the courier, the user or the e-procurement system
"""
import glob
import os

from vsc.utils.fancylogger import getLogger
from vsc.mocp.automata import load_automaton
from vsc.mocp.harness import DEFAULT_RETRIES, ScenarioScript, Simulation
from vsc.mocp.monitors import BLACK, GREY, WHITE, check_strategies, load_monitor

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

STRATEGIES = ('B1', 'B2', 'B3', 'B4', 'C1', 'C2', 'C3')
MONITORS = ('bankErrors', 'courierErrors', 'cancellations', 'classifier', 'main')
USER_CLASSES = (GREY, WHITE, BLACK)

USER_CANCEL = 'userCancel'
BANK_ERROR = 'bankError'
COURIER_ERROR = 'courierError'
ERROR_KINDS = (USER_CANCEL, BANK_ERROR, COURIER_ERROR)

MATRIX = {
    (GREY, USER_CANCEL): 'par(B2,C2)',
    (GREY, BANK_ERROR): 'par(B1,C2)',
    (GREY, COURIER_ERROR): 'par(C1,B2)',
    (WHITE, USER_CANCEL): 'par(B3,C3)',
    (WHITE, BANK_ERROR): 'par(B1,C3)',
    (WHITE, COURIER_ERROR): 'par(C1,B3)',
    (BLACK, USER_CANCEL): 'seq(par(B2,C2), B4)',
    (BLACK, BANK_ERROR): 'seq(C2, B4)',
    (BLACK, COURIER_ERROR): 'seq(B2, B4)',
}

CLASSIFY_HINT = {
    WHITE: 'trustedFlag',
    BLACK: 'fraudFlag',
}

USER = 'u1'
CARD = 'c1'
TXN = 't1'
OPENING_BALANCE = 10000
LOAD_AMOUNT = 5000
ORDER_AMOUNT = 3000

log = getLogger(__name__, fname=False)


def data_files(kind):
    """Sorted list of the shipped json files of a kind (automata, monitors or scenarios)."""
    return sorted(glob.glob(os.path.join(DATA_DIR, kind, '*.json')))


def load_automata(filenames=None):
    """Load compensating automata, the shipped strategies B1-C3 by default."""
    return [load_automaton(filename) for filename in (filenames or data_files('automata'))]


def load_monitors(filenames=None):
    """Load trigger monitors, the shipped case study monitors in registration order by default."""
    if not filenames:
        filenames = [os.path.join(DATA_DIR, 'monitors', f"{name}.json") for name in MONITORS]
    return [load_monitor(filename) for filename in filenames]


def canonical_scenario(user_class, error, retries=DEFAULT_RETRIES, seed=0):
    """The scenario for one cell of the decision matrix.

    A card is created and funded, the user is classified, then the error occurs: a cancellation
    of a completed order, an order whose payment keeps failing, or an order for which no courier
    is available.
    """
    steps = [
        {'do': 'login', 'args': {'user': USER}},
        {'do': 'createCard', 'args': {'user': USER, 'card': CARD}},
        {'do': 'load', 'args': {'card': CARD, 'amount': LOAD_AMOUNT}},
    ]
    if user_class in CLASSIFY_HINT:
        steps.append({'classify': CLASSIFY_HINT[user_class], 'user': USER})

    order = {'do': 'order', 'args': {'user': USER, 'card': CARD, 'txn': TXN, 'amount': ORDER_AMOUNT}}
    if error == USER_CANCEL:
        steps.extend([order, {'cancel': {'user': USER, 'txn': TXN}}])
    elif error == BANK_ERROR:
        steps.extend([{'fault': 'paymentFail', 'count': retries}, order])
    elif error == COURIER_ERROR:
        steps.extend([{'fault': 'courierAFail'}, {'fault': 'courierBFail'}, order])
    else:
        raise ValueError(f"unknown error kind {error}, use one of {', '.join(ERROR_KINDS)}")

    data = {'seed': seed, 'accounts': {USER: OPENING_BALANCE}, 'steps': steps}
    return ScenarioScript.from_data(data, name=f"{user_class}-{error}")


def case_study(ca_specs=None, mon_specs=None, retries=DEFAULT_RETRIES):
    """A Simulation over the given or the shipped specs."""
    ca_specs = ca_specs if ca_specs is not None else load_automata()
    mon_specs = mon_specs if mon_specs is not None else load_monitors()
    check_strategies(mon_specs, [spec.name for spec in ca_specs])
    return Simulation(ca_specs, mon_specs, retries=retries)


def run_matrix(ca_specs=None, mon_specs=None, retries=DEFAULT_RETRIES, seed=0):
    """Run the canonical scenario of every (user class, error) cell.

    @returns: list of (user class, error, trigger text or None, Report) in matrix order
    """
    simulation = case_study(ca_specs, mon_specs, retries=retries)
    rows = []
    for user_class in USER_CLASSES:
        for error in ERROR_KINDS:
            report = simulation.run(canonical_scenario(user_class, error, retries=retries, seed=seed))
            triggers = [record.split('|', 1)[1] for record in report.records('TRG')]
            trigger = triggers[0] if triggers else None
            log.debug("matrix cell (%s, %s) resolved %s", user_class, error, trigger)
            rows.append((user_class, error, trigger, report))
    return rows
