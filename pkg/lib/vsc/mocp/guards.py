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
Guard expressions for automaton and monitor transitions.

A guard is a small boolean expression, e.g.,

    payload.amount >= 1000 and subject.user == 'u1'
    fails + 1 >= retries
    phase == 'compensation'

Supported are the comparisons ==, !=, <, <=, >, >=, in and not in, the connectives and, or and not,
integer + and -, string/integer/boolean literals and tuples or lists of literals.
Names refer to monitor variables and parameters; payload.<key> and subject.<key> refer to the
event, phase to its phase. A missing key evaluates to None.
"""
import ast
import operator

from vsc.utils.fancylogger import getLogger
from vsc.mocp.exceptions import GuardError

EVENT_NAMES = ('payload', 'subject')
PHASE_NAME = 'phase'

_COMPARE = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.In: lambda a, b: a in b,
    ast.NotIn: lambda a, b: a not in b,
}

# python < 3.8 parses literals into Num, Str and NameConstant nodes
_OLD_LITERALS = tuple(getattr(ast, name) for name in ('Num', 'Str', 'NameConstant') if hasattr(ast, name))

_BINOP = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
}


class Guard:
    """A compiled guard expression"""

    def __init__(self, expression=None):
        """Initialisation
            @param expression: guard text; None or an empty string gives a guard that always holds
        """
        self.log = getLogger(self.__class__.__name__, fname=False)
        self.expression = (expression or '').strip()
        self.variables = set()
        self.guard_fn = self.parse(self.expression)

    def parse(self, expression):
        """Convert the expression into a function of the evaluation context."""
        if not expression:
            return lambda context: True

        try:
            tree = ast.parse(expression, mode='eval')
        except SyntaxError as exc:
            msg = f"invalid guard {expression!r}: {exc}"
            self.log.error(msg)
            raise GuardError(msg) from exc

        evaluate = self._compile(tree.body)

        def guard_fn(context):
            return bool(evaluate(context))

        return guard_fn

    def _literal(self, node):
        """Return (True, value) if node is a literal, (False, None) otherwise."""
        if isinstance(node, ast.Constant):
            return True, node.value
        if _OLD_LITERALS and isinstance(node, _OLD_LITERALS):
            return True, getattr(node, 'n', getattr(node, 's', getattr(node, 'value', None)))
        if isinstance(node, (ast.Tuple, ast.List)):
            values = []
            for elt in node.elts:
                (ok, value) = self._literal(elt)
                if not ok:
                    return False, None
                values.append(value)
            return True, tuple(values)
        return False, None

    def _compile(self, node):
        (is_literal, value) = self._literal(node)
        if is_literal:
            return lambda context: value

        if isinstance(node, ast.BoolOp):
            parts = [self._compile(v) for v in node.values]
            if isinstance(node.op, ast.And):
                return lambda context: all(p(context) for p in parts)
            return lambda context: any(p(context) for p in parts)

        if isinstance(node, ast.UnaryOp):
            operand = self._compile(node.operand)
            if isinstance(node.op, ast.Not):
                return lambda context: not operand(context)
            if isinstance(node.op, ast.USub):
                return lambda context: -operand(context)

        if isinstance(node, ast.BinOp) and type(node.op) in _BINOP:
            left = self._compile(node.left)
            right = self._compile(node.right)
            fn = _BINOP[type(node.op)]

            def binop(context):
                try:
                    return fn(left(context), right(context))
                except TypeError as exc:
                    raise GuardError(f"cannot evaluate {self.expression!r}: {exc}") from exc
            return binop

        if isinstance(node, ast.Compare):
            left = self._compile(node.left)
            ops = [_COMPARE[type(op)] for op in node.ops if type(op) in _COMPARE]
            if len(ops) != len(node.ops):
                raise GuardError(f"unsupported comparison in guard {self.expression!r}")
            comparators = [self._compile(c) for c in node.comparators]

            def compare(context):
                current = left(context)
                for (fn, comparator) in zip(ops, comparators):
                    other = comparator(context)
                    try:
                        if not fn(current, other):
                            return False
                    except TypeError:
                        # None vs. int and the like never match
                        return False
                    current = other
                return True
            return compare

        if isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name) and node.value.id in EVENT_NAMES:
            section, key = node.value.id, node.attr
            return lambda context: context.get(section, {}).get(key)

        if isinstance(node, ast.Name):
            name = node.id
            if name in EVENT_NAMES:
                raise GuardError(f"{name} needs a key in guard {self.expression!r}, e.g., {name}.amount")
            if name != PHASE_NAME:
                self.variables.add(name)
            return lambda context: context.get(name)

        msg = f"unsupported construct {type(node).__name__} in guard {self.expression!r}"
        self.log.error(msg)
        raise GuardError(msg)

    def holds(self, event=None, variables=None):
        """Evaluate the guard for the given event and monitor variables (and parameters)."""
        context = dict(variables or {})
        if event is not None:
            context['payload'] = event.payload
            context['subject'] = event.subject
            context[PHASE_NAME] = event.phase
        return self.guard_fn(context)

    def __str__(self):
        return self.expression
