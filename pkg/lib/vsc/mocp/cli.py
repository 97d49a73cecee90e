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
Command line driver: validate specs, run scenarios and print the decision matrix.

    mocp.py --mode validate [--strict] [--automata B1.json --automata B2.json ...] [--monitors main.json ...]
    mocp.py --mode run --scenario cancel.json [--seed 1] [--retries 3] [--out report.txt]
    mocp.py --mode matrix

Without automata or monitors, the shipped case study specs are used. The MOCP_LOG environment
variable (debug or info) sets the log level.

Exit codes:

    0  OK
    1  the specs or the scenario are invalid
    2  the run hit a runtime fault (deadlock, failed compensation)
    3  a file cannot be read or written
"""
import os
import sys

from vsc.utils import fancylogger
from vsc.utils.generaloption import SimpleOption
from vsc.mocp.casestudy import case_study, load_automata, load_monitors, run_matrix
from vsc.mocp.exceptions import RuntimeFault, ScenarioError, SpecError, SpecIOError
from vsc.mocp.harness import ActionRegistry, load_scenario
from vsc.mocp.monitors import check_strategies, lint_channels
from vsc.mocp.specfile import write_text

EXIT_OK = (0, 'OK')
EXIT_SPEC_ERROR = (1, 'SPEC ERROR')
EXIT_RUNTIME_FAULT = (2, 'RUNTIME FAULT')
EXIT_IO_ERROR = (3, 'IO ERROR')

MODE_RUN = 'run'
MODE_VALIDATE = 'validate'
MODE_MATRIX = 'matrix'
MODES = (MODE_RUN, MODE_VALIDATE, MODE_MATRIX)

LOG_ENV = 'MOCP_LOG'


def _set_log_level():
    level = os.environ.get(LOG_ENV, '').lower()
    if level == 'debug':
        fancylogger.setLogLevelDebug()
    elif level == 'info':
        fancylogger.setLogLevelInfo()


class CLI:
    """The mocp command line."""

    CLI_OPTIONS = {
        'scenario': ('Scenario file to run', 'string', 'store', None, 's'),
        'automata': ('Compensating automaton spec file (repeat for more)', 'string', 'append', None, 'a'),
        'monitors': ('Trigger monitor spec file (repeat for more)', 'string', 'append', None, 'm'),
        'retries': ('Failed attempts before a payment or booking error is raised', 'int', 'store', 3, 'k'),
        'seed': ('Seed choosing the order of payment and booking, overrides the scenario seed',
                 'int', 'store', None),
        'out': ('File to write the report to, standard output if not set', 'string', 'store', None, 'o'),
        'mode': (f"What to do: {', '.join(MODES)}", 'string', 'store', MODE_RUN),
        'strict': ('Validation fails on channels no monitor listens to', None, 'store_true', False),
    }

    def __init__(self, name='mocp'):
        self.name = name
        self.fulloptions = SimpleOption(self.CLI_OPTIONS)
        self.options = self.fulloptions.options
        _set_log_level()
        self.log = fancylogger.getLogger(self.__class__.__name__, fname=False)

    def specs(self):
        ca_specs = load_automata(self.options.automata)
        mon_specs = load_monitors(self.options.monitors)
        return ca_specs, mon_specs

    def output(self, text):
        if self.options.out:
            write_text(self.options.out, text)
        else:
            sys.stdout.write(text)

    def validate(self):
        (ca_specs, mon_specs) = self.specs()
        check_strategies(mon_specs, [spec.name for spec in ca_specs])
        ActionRegistry().check(ca_specs)
        notes = lint_channels(mon_specs, strict=self.options.strict)
        for note in notes:
            self.log.warning(note)
        lines = [f"automaton {spec.name} OK" for spec in ca_specs]
        lines.extend(f"monitor {spec.name} OK" for spec in mon_specs)
        lines.extend(notes)
        self.output('\n'.join(lines) + '\n')
        return EXIT_OK, f"{len(ca_specs)} automata and {len(mon_specs)} monitors are valid"

    def run(self):
        if not self.options.scenario:
            raise ScenarioError("run mode needs a --scenario")
        (ca_specs, mon_specs) = self.specs()
        script = load_scenario(self.options.scenario)
        if self.options.seed is not None:
            script = script.with_seed(self.options.seed)
        simulation = case_study(ca_specs, mon_specs, retries=self.options.retries)
        report = simulation.run(script)
        self.output(report.render())
        if report.faults:
            return EXIT_RUNTIME_FAULT, f"{len(report.faults)} faults during {self.options.scenario}"
        return EXIT_OK, f"ran {self.options.scenario}, {len(report.trace)} events"

    def matrix(self):
        (ca_specs, mon_specs) = self.specs()
        seed = self.options.seed if self.options.seed is not None else 0
        rows = run_matrix(ca_specs, mon_specs, retries=self.options.retries, seed=seed)
        faults = sum(len(report.faults) for (_, _, _, report) in rows)
        self.output(''.join(f"{user_class}|{error}|{trigger or '-'}\n" for (user_class, error, trigger, _) in rows))
        if faults:
            return EXIT_RUNTIME_FAULT, f"{faults} faults in the matrix scenarios"
        return EXIT_OK, f"{len(rows)} matrix cells"

    def do(self):
        """Run the selected mode.

        @returns: (exit tuple, message)
        """
        if self.options.mode not in MODES:
            raise SpecError(f"unknown mode {self.options.mode}, use one of {', '.join(MODES)}")
        if self.options.retries < 1:
            raise SpecError(f"--retries must be at least 1, not {self.options.retries}")
        return getattr(self, self.options.mode)()

    def execute(self):
        """Run do() and map the outcome onto an exit code."""
        try:
            (code, msg) = self.do()
        except SpecIOError as err:
            (code, msg) = (EXIT_IO_ERROR, str(err))
        except SpecError as err:
            (code, msg) = (EXIT_SPEC_ERROR, str(err))
        except RuntimeFault as err:
            (code, msg) = (EXIT_RUNTIME_FAULT, str(err))
        except Exception as err:  # pylint: disable=broad-except
            self.log.exception("%s failed in a horrible way: %s", self.name, err)
            (code, msg) = (EXIT_RUNTIME_FAULT, str(err))

        if code == EXIT_OK:
            self.log.info("%s %s: %s", code[1], self.name, msg)
        else:
            self.log.error("%s %s: %s", code[1], self.name, msg)
        return code[0]

    def main(self):
        sys.exit(self.execute())


def main():
    CLI().main()
