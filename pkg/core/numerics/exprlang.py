"""
Petit langage d'expressions pour décrire A(t), f(t) et Phi(t) dans les fichiers de problème.

Grammaire (priorités croissantes, ^ associatif à droite) :

    expression := terme (('+' | '-') terme)*
    terme      := unaire (('*' | '/') unaire)*
    unaire     := '-' unaire | puissance
    puissance  := primaire ('^' unaire)?
    primaire   := nombre | 't' | constante | fonction '(' expression ')' | '(' expression ')'

Constantes : pi, e, i. Fonctions : sin, cos, exp, log, sqrt, abs.
"""
import logging
import math
import re
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from core.exceptions import DomainFault, ExprSyntaxError
from core.numerics.funcspace import SampledMatrixFunction

logger = logging.getLogger(__name__)

MAX_DEPTH = 100

CONSTANTS = {
    'pi': complex(math.pi),
    'e': complex(math.e),
    'i': 1j,
}

FUNCTIONS = {
    'sin': np.sin,
    'cos': np.cos,
    'exp': np.exp,
    'log': np.log,
    'sqrt': np.sqrt,
    'abs': np.abs,
}

PRECEDENCE = {'+': 1, '-': 1, '*': 2, '/': 2, '^': 3}

_TOKEN_RE = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE | re.ASCII)


def _offending_t(t, mask):
    t, mask = np.broadcast_arrays(np.asarray(t, dtype=float), mask)
    return float(t[mask].flat[0])


class Expr:
    """Noeud d'arbre d'expression ; evaluate accepte un scalaire ou un tableau de t"""

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all='ignore'):
            values = np.broadcast_to(np.asarray(self._eval(t), dtype=complex), t.shape)
        bad = ~np.isfinite(values)
        if bad.any():
            raise DomainFault(f"Valeur non finie pour {self}", _offending_t(t, bad))
        return values.copy() if t.ndim else complex(values)

    def _eval(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Expr):
    value: complex

    def _eval(self, t):
        return self.value

    def __str__(self):
        value = complex(self.value)
        if value.imag == 0:
            return repr(value.real)
        return f"({value.real!r} + {value.imag!r} * i)"


@dataclass(frozen=True)
class Variable(Expr):
    name: str = 't'

    def _eval(self, t):
        return t

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Constant(Expr):
    name: str

    def _eval(self, t):
        return CONSTANTS[self.name]

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr

    def _eval(self, t):
        return -self.operand._eval(t)

    def __str__(self):
        return f"(-{self.operand})"


def _left_spine(node):
    """Feuille la plus à gauche et noeuds binaires de la chaîne, de l'intérieur vers la racine"""
    links = []
    while isinstance(node, BinaryOp):
        links.append(node)
        node = node.left
    links.reverse()
    return node, links


@dataclass(frozen=True, eq=False)
class BinaryOp(Expr):
    """Opération binaire ; les chaînes plates (a + b + ... + z) sont parcourues sans récursion"""
    op: str
    left: Expr
    right: Expr

    def _eval(self, t):
        head, links = _left_spine(self)
        value = np.asarray(head._eval(t), dtype=complex)
        for link in links:
            value = link._combine(value, np.asarray(link.right._eval(t), dtype=complex), t)
        return value

    def _combine(self, left, right, t):
        if self.op == '+':
            return left + right
        if self.op == '-':
            return left - right
        if self.op == '*':
            return left * right
        if self.op == '/':
            zero = right == 0
            if zero.any():
                raise DomainFault(f"Division par zéro dans {self}", _offending_t(t, zero))
            return left / right
        return np.power(left, right)

    def _chain(self):
        head, links = _left_spine(self)
        return head, tuple((link.op, link.right) for link in links)

    def __eq__(self, other):
        if not isinstance(other, BinaryOp):
            return NotImplemented
        return self._chain() == other._chain()

    def __hash__(self):
        return hash(self._chain())

    def __str__(self):
        head, links = _left_spine(self)
        text, level = str(head), None
        for link in links:
            if level is not None and (PRECEDENCE[link.op] != level or link.op == '^'):
                text = f"({text})"
            text, level = f"{text} {link.op} {link.right}", PRECEDENCE[link.op]
        return f"({text})"


@dataclass(frozen=True)
class Call(Expr):
    function: str
    argument: Expr

    def _eval(self, t):
        argument = np.asarray(self.argument._eval(t), dtype=complex)
        if self.function == 'log':
            zero = argument == 0
            if zero.any():
                raise DomainFault(f"Logarithme de zéro dans {self}", _offending_t(t, zero))
        return FUNCTIONS[self.function](argument)

    def __str__(self):
        return f"{self.function}({self.argument})"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


class Parser:
    """Analyseur descendant récursif ; une instance par source"""

    def __init__(self, source):
        if isinstance(source, (bytes, bytearray)):
            source = bytes(source).decode('latin-1')
        self.source = source
        self.tokens = self._tokenize()
        self.index = 0
        self.depth = 0

    def _byte_offset(self, position):
        return len(self.source[:position].encode('utf-8', errors='surrogatepass'))

    def _error(self, message, position, expected=None):
        return ExprSyntaxError(message, self._byte_offset(position), expected)

    def _tokenize(self):
        tokens = []
        position = 0
        while position < len(self.source):
            match = _TOKEN_RE.match(self.source, position)
            if match is None:
                raise self._error(f"caractère inattendu {self.source[position]!r}", position)
            kind = match.lastgroup
            if kind != 'space':
                tokens.append(Token(kind, match.group(), position))
            position = match.end()
        tokens.append(Token('end', '', len(self.source)))
        return tokens

    @contextmanager
    def _nested(self):
        self.depth += 1
        try:
            if self.depth > MAX_DEPTH:
                raise self._error("expression trop imbriquée", self._peek().position)
            yield
        finally:
            self.depth -= 1

    def _peek(self):
        return self.tokens[self.index]

    def _advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _at(self, *symbols):
        token = self._peek()
        return token.kind == 'op' and token.text in symbols

    def _expect(self, symbol):
        token = self._peek()
        if not self._at(symbol):
            found = token.text or 'fin de l\'expression'
            raise self._error(f"jeton inattendu '{found}'", token.position, f"'{symbol}'")
        return self._advance()

    def parse(self):
        node = self._expression()
        token = self._peek()
        if token.kind != 'end':
            raise self._error(f"jeton en trop '{token.text}'", token.position, "fin de l'expression")
        return node

    def _expression(self):
        node = self._term()
        while self._at('+', '-'):
            op = self._advance().text
            node = BinaryOp(op, node, self._term())
        return node

    def _term(self):
        node = self._unary()
        while self._at('*', '/'):
            op = self._advance().text
            node = BinaryOp(op, node, self._unary())
        return node

    def _unary(self):
        with self._nested():
            if self._at('-'):
                self._advance()
                return Negate(self._unary())
            return self._power()

    def _power(self):
        base = self._primary()
        if self._at('^'):
            self._advance()
            return BinaryOp('^', base, self._unary())
        return base

    def _primary(self):
        token = self._peek()
        if token.kind == 'number':
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise self._error(f"nombre trop grand '{token.text}'", token.position)
            return Number(complex(value))
        if token.kind == 'name':
            self._advance()
            if token.text == 't':
                return Variable()
            if token.text in CONSTANTS:
                return Constant(token.text)
            if token.text in FUNCTIONS:
                self._expect('(')
                argument = self._expression()
                self._expect(')')
                return Call(token.text, argument)
            raise self._error(f"identifiant inconnu '{token.text}'", token.position,
                              "t, une constante ou une fonction")
        if self._at('('):
            self._advance()
            node = self._expression()
            self._expect(')')
            return node
        found = token.text or "fin de l'expression"
        raise self._error(f"jeton inattendu '{found}'", token.position, "un nombre, t ou '('")


def parse(source):
    """Analyse une expression (str ou bytes) ; lève ExprSyntaxError avec la position fautive"""
    return Parser(source).parse()


def as_expr(value):
    """Expression à partir d'un texte ou d'un nombre déjà décodé"""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return Number(complex(value))
    return parse(value)


def sample(expr, grid, deriv_order=0):
    """Échantillonne une expression scalaire sur la grille (fonction 1x1)"""
    values = as_expr(expr).evaluate(grid.points)
    return SampledMatrixFunction.from_values(grid, values, deriv_order)


def sample_matrix(sources, grid, deriv_order=0):
    """Échantillonne une matrice (liste de lignes) d'expressions"""
    rows = [[as_expr(entry).evaluate(grid.points) for entry in row] for row in sources]
    values = np.array(rows, dtype=complex)          # (rows, cols, N)
    logger.debug("Échantillonnage d'une matrice %dx%d d'expressions sur %d points",
                 values.shape[0], values.shape[1], grid.N)
    return SampledMatrixFunction.from_values(grid, np.moveaxis(values, -1, 0), deriv_order)
