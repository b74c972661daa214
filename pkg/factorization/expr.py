"""
Вирази над змінною k: константи, арифметика та вкладені квадратні корені.

Вузли хешуються при створенні (hash-consing), тому структурно однакові
підвирази в межах одного пулу є одним і тим самим об'єктом. Радикали
нумеруються в порядку створення: внутрішній корінь завжди створюється раніше
за зовнішній, а незалежні корені йдуть у порядку першої появи в тексті.

Гілка кожного радикала задається знаком (+1 | -1), яким множиться головне
значення кореня з уже розв'язаного підкореневого виразу.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .exceptions import (
    DegenerateInputError,
    EvaluationError,
    ExpressionSyntaxError,
    TowerCycleError,
    UnboundSymbolError,
)

logger = logging.getLogger(__name__)

BranchAssignment = tuple[int, ...]
"""Знаки радикалів у порядку вежі; всі +1 на k_anchor означають фізичний лист."""


class Kind(str, Enum):
    VARIABLE = "k"
    CONSTANT = "const"
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    NEG = "neg"
    POW = "^"
    SQRT = "sqrt"


class Expression:
    """
    Вузол незмінного DAG-виразу.

    Створюється лише через ExpressionPool; порівняння за ідентичністю
    збігається зі структурною рівністю в межах пулу.
    """

    def __init__(self, kind: Kind, children: tuple, value, uid: int, radical_id: Optional[int]):
        self.kind = kind
        self.children = children
        self.value = value
        self.uid = uid
        self.radical_id = radical_id

    @cached_property
    def nodes(self) -> tuple[Expression, ...]:
        """Усі вузли піддерева в топологічному порядку (діти раніше за батьків)."""
        seen = {}
        stack = [self]
        while stack:
            node = stack.pop()
            if node.uid in seen:
                continue
            seen[node.uid] = node
            stack.extend(node.children)
        return tuple(seen[uid] for uid in sorted(seen))

    @cached_property
    def tower(self) -> tuple[Expression, ...]:
        """Радикали виразу, впорядковані за radical_id."""
        return tuple(node for node in self.nodes if node.kind is Kind.SQRT)

    @cached_property
    def program(self) -> Program:
        return Program([self])

    @property
    def radicand(self) -> Expression:
        if self.kind is not Kind.SQRT:
            raise AttributeError("only sqrt nodes have a radicand")
        return self.children[0]

    def __repr__(self):
        return f"Expression({self})"

    def __str__(self):
        kind = self.kind
        if kind is Kind.VARIABLE:
            return "k"
        if kind is Kind.CONSTANT:
            return format_complex(self.value)
        if kind is Kind.NEG:
            return f"-({self.children[0]})"
        if kind is Kind.POW:
            return f"({self.children[0]})^{self.value}"
        if kind is Kind.SQRT:
            return f"sqrt({self.children[0]})"
        left, right = self.children
        return f"({left} {kind.value} {right})"


def format_complex(z: complex) -> str:
    """Компактний запис комплексної константи у синтаксисі `a+bi`."""
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    if z.real == 0:
        return f"{z.imag:g}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:g}{sign}{abs(z.imag):g}i"


class ExpressionPool:
    """
    Таблиця хешування вузлів.

    Ключ вузла: (вид, значення, uid дітей). Повторний запит з тим самим ключем
    повертає вже створений вузол.
    """

    def __init__(self):
        self._table: dict[tuple, Expression] = {}
        self._count = 0
        self._radicals = 0

    def make(self, kind: Kind, children: Sequence[Expression] = (), value=None) -> Expression:
        key = (kind, value, tuple(child.uid for child in children))
        node = self._table.get(key)
        if node is not None:
            return node
        radical_id = None
        if kind is Kind.SQRT:
            radical_id = self._radicals
            self._radicals += 1
        node = Expression(kind, tuple(children), value, self._count, radical_id)
        self._count += 1
        self._table[key] = node
        return node

    def variable(self) -> Expression:
        return self.make(Kind.VARIABLE)

    def constant(self, value: complex) -> Expression:
        return self.make(Kind.CONSTANT, value=complex(value))

    def binary(self, kind: Kind, left: Expression, right: Expression) -> Expression:
        return self.make(kind, (left, right))

    def negate(self, operand: Expression) -> Expression:
        return self.make(Kind.NEG, (operand,))

    def power(self, base: Expression, exponent: int) -> Expression:
        return self.make(Kind.POW, (base,), value=int(exponent))

    def sqrt(self, radicand: Expression) -> Expression:
        return self.make(Kind.SQRT, (radicand,))


# ==========================================================
#                         ПАРСЕР
# ==========================================================

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>[ij](?![A-Za-z_0-9]))?"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)

Symbol = Union[complex, float, int, Expression]


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int
    value: object = None


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    position = 0
    end = len(text.rstrip())
    while position < end:
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            offset = position + (len(text[position:]) - len(text[position:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[offset]!r}", offset, text)
        offset = match.start() + len(match.group(0)) - len(match.group(0).lstrip())
        if match.group("number") is not None:
            value = float(match.group("number"))
            value = complex(0, value) if match.group("imag") else complex(value)
            tokens.append(_Token("number", match.group(0).strip(), offset, value))
        elif match.group("name") is not None:
            tokens.append(_Token("name", match.group("name"), offset))
        else:
            op = match.group("op")
            tokens.append(_Token("op", "^" if op == "**" else op, offset))
        position = match.end()
    tokens.append(_Token("end", "", end))
    return tokens


class _Parser:
    """Рекурсивний спуск: expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*."""

    RESERVED = {"k", "i", "sqrt"}

    def __init__(self, text: str, symbols: Mapping[str, Symbol], pool: ExpressionPool):
        self.text = text
        self.symbols = symbols
        self.pool = pool
        self.tokens = _tokenize(text)
        self.position = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.position]

    def advance(self) -> _Token:
        token = self.current
        self.position += 1
        return token

    def expect(self, text: str) -> None:
        if self.current.text != text or self.current.kind == "end":
            raise ExpressionSyntaxError(f"expected '{text}'", self.current.offset, self.text)
        self.advance()

    def parse(self) -> Expression:
        if self.current.kind == "end":
            raise ExpressionSyntaxError("empty expression", self.current.offset, self.text)
        node = self.expression()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{self.current.text}'", self.current.offset, self.text)
        return node

    def expression(self) -> Expression:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            kind = Kind.ADD if self.advance().text == "+" else Kind.SUB
            node = self.pool.binary(kind, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            kind = Kind.MUL if self.advance().text == "*" else Kind.DIV
            node = self.pool.binary(kind, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.current.kind == "op" and self.current.text in "+-":
            sign = self.advance().text
            operand = self.unary()
            return self.pool.negate(operand) if sign == "-" else operand
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            negative = False
            if self.current.kind == "op" and self.current.text in "+-":
                negative = self.advance().text == "-"
            token = self.current
            if token.kind != "number" or token.value.imag != 0 or not token.text.isdigit():
                raise ExpressionSyntaxError("integer exponent expected", token.offset, self.text)
            self.advance()
            exponent = int(token.text)
            return self.pool.power(base, -exponent if negative else exponent)
        return base

    def atom(self) -> Expression:
        token = self.current
        if token.kind == "number":
            self.advance()
            return self.pool.constant(token.value)
        if token.kind == "name":
            self.advance()
            return self.name(token)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expression()
            self.expect(")")
            return node
        raise ExpressionSyntaxError("operand expected", token.offset, self.text)

    def name(self, token: _Token) -> Expression:
        if token.text == "sqrt":
            self.expect("(")
            radicand = self.expression()
            self.expect(")")
            return self.pool.sqrt(radicand)
        if token.text == "k":
            return self.pool.variable()
        if token.text == "i":
            return self.pool.constant(1j)
        if token.text not in self.symbols:
            raise UnboundSymbolError(token.text)
        bound = self.symbols[token.text]
        if isinstance(bound, Expression):
            return bound
        return self.pool.constant(complex(bound))


def _check_tower(expr: Expression) -> None:
    for radical in expr.tower:
        inner = radical.radicand.tower
        if any(node.radical_id >= radical.radical_id for node in inner):
            raise TowerCycleError(f"radical {radical} depends on a radical that is not strictly inner")


def parse_expression(
        text: str,
        symbols: Optional[Mapping[str, Symbol]] = None,
        pool: Optional[ExpressionPool] = None,
) -> Expression:
    """
    Розбирає текст виразу у хешований DAG.

    :param text: Вираз у синтаксисі `sqrt(k0^2 - k^2)`; `i` є уявною одиницею.
    :param symbols: Імена констант (complex) або вже побудованих підвиразів.
    :param pool: Пул вузлів; спільний пул дає спільну нумерацію радикалів.
    :raises ExpressionSyntaxError: Якщо текст не відповідає граматиці.
    :raises UnboundSymbolError: Якщо ім'я не визначене в таблиці символів.
    :return: Кореневий вузол виразу.
    :rtype: Expression
    """
    parser = _Parser(text, symbols or {}, pool if pool is not None else ExpressionPool())
    expr = parser.parse()
    _check_tower(expr)
    return expr


# ==========================================================
#                       ОБЧИСЛЕННЯ
# ==========================================================

def principal_sqrt(z) -> np.ndarray:
    """Головний корінь з аргументом у (-pi, pi]; від'ємна дійсна вісь дає +i."""
    z = np.asarray(z, dtype=complex)
    root = np.sqrt(z)
    on_cut = (z.imag == 0) & (z.real < 0)
    if np.any(on_cut):
        root = np.where(on_cut, 1j * np.sqrt(np.abs(z.real)), root)
    return root


RadicalRule = Callable[[int, np.ndarray], np.ndarray]


class Program:
    """
    Скомпільований список інструкцій для набору коренів DAG.

    Значення радикалів обчислюються знизу вгору; правило `rule(j, radicand)`
    вирішує, яке з двох значень кореня з номером j у вежі взяти. Усі
    значення є масивами форми (batch,), що дозволяє вести кілька листів
    одночасно.
    """

    def __init__(self, roots: Iterable[Expression]):
        self.roots = tuple(roots)
        merged = {}
        for root in self.roots:
            for node in root.nodes:
                merged[node.uid] = node
        self.nodes = tuple(merged[uid] for uid in sorted(merged))
        position = {node.uid: i for i, node in enumerate(self.nodes)}
        self.tower = tuple(node for node in self.nodes if node.kind is Kind.SQRT)
        self.root_positions = tuple(position[root.uid] for root in self.roots)
        self._code = tuple(
            (node.kind, *(position[child.uid] for child in node.children), node.value)
            for node in self.nodes
        )

    def execute(self, k: complex, rule: RadicalRule, batch: int = 1) -> list:
        values: list = [None] * len(self._code)
        radical = 0
        for pos, instruction in enumerate(self._code):
            kind = instruction[0]
            if kind is Kind.VARIABLE:
                value = np.full(batch, k, dtype=complex)
            elif kind is Kind.CONSTANT:
                value = np.full(batch, instruction[1], dtype=complex)
            elif kind is Kind.ADD:
                value = values[instruction[1]] + values[instruction[2]]
            elif kind is Kind.SUB:
                value = values[instruction[1]] - values[instruction[2]]
            elif kind is Kind.MUL:
                value = values[instruction[1]] * values[instruction[2]]
            elif kind is Kind.DIV:
                denominator = values[instruction[2]]
                if np.any(denominator == 0):
                    self._fail(pos, k)
                value = values[instruction[1]] / denominator
            elif kind is Kind.NEG:
                value = -values[instruction[1]]
            elif kind is Kind.POW:
                base, exponent = values[instruction[1]], instruction[2]
                if exponent < 0 and np.any(base == 0):
                    self._fail(pos, k)
                value = base ** exponent
            else:
                value = np.asarray(rule(radical, values[instruction[1]]), dtype=complex)
                radical += 1
            values[pos] = value
        return values

    def _fail(self, pos: int, k: complex):
        node = self.nodes[pos]
        error = EvaluationError(f"division by zero in {node} at k={format_complex(k)}", str(node))
        error.node = node
        raise error

    def root_values(self, k: complex, rule: RadicalRule, batch: int = 1) -> np.ndarray:
        """Значення коренів програми, масив форми (batch, len(roots))."""
        values = self.execute(k, rule, batch)
        return np.stack([values[pos] for pos in self.root_positions], axis=-1)

    def radical_values(self, k: complex, rule: RadicalRule, batch: int = 1) -> np.ndarray:
        """Значення радикалів вежі, масив форми (batch, len(tower))."""
        chosen = np.zeros((batch, len(self.tower)), dtype=complex)

        def record(j, radicand):
            chosen[:, j] = rule(j, radicand)
            return chosen[:, j]

        self.execute(k, record, batch)
        return chosen


def sign_rule(signs: np.ndarray) -> RadicalRule:
    """Правило: головне значення кореня, помножене на знак листа."""
    signs = np.atleast_2d(np.asarray(signs))
    return lambda j, radicand: signs[:, j] * principal_sqrt(radicand)


def fixed_rule(radicals: np.ndarray) -> RadicalRule:
    """Правило: значення радикалів уже відомі (наприклад, після відстеження шляху)."""
    radicals = np.atleast_2d(radicals)
    return lambda j, radicand: radicals[:, j]


def identify_signs(program: Program, k: complex, radicals: np.ndarray) -> np.ndarray:
    """
    Визначає знаки листа за значеннями радикалів у точці k.

    Знак +1 ставиться, якщо значення ближче до головного кореня з підкореневого
    виразу, обчисленого на цьому ж листі.
    """
    radicals = np.atleast_2d(radicals)
    signs = np.ones(radicals.shape, dtype=int)

    def compare(j, radicand):
        reference = principal_sqrt(radicand)
        value = radicals[:, j]
        signs[:, j] = np.where(np.abs(value - reference) <= np.abs(value + reference), 1, -1)
        return value

    program.execute(k, compare, radicals.shape[0])
    return signs


def _check_branches(tower: Sequence[Expression], branches: Sequence[int]) -> np.ndarray:
    if len(branches) != len(tower):
        raise ValueError(f"branch assignment has {len(branches)} signs, tower has {len(tower)} radicals")
    if any(sign not in (1, -1) for sign in branches):
        raise ValueError("branch signs must be +1 or -1")
    return np.asarray(branches, dtype=int)


def evaluate(expr: Expression, k: complex, branches: Sequence[int] = ()) -> complex:
    """
    Обчислює вираз у точці k на листі, заданому знаками радикалів.

    :param expr: Вираз.
    :param k: Точка комплексної площини.
    :param branches: Знаки радикалів у порядку `expr.tower`.
    :raises EvaluationError: Ділення на нуль (нуль під коренем помилкою не є).
    :return: Значення виразу.
    :rtype: complex
    """
    signs = _check_branches(expr.tower, branches)
    return complex(expr.program.root_values(complex(k), sign_rule(signs))[0, 0])


# ==========================================================
#                     МАТРИЦЯ-ФУНКЦІЯ
# ==========================================================

@dataclass(frozen=True, eq=False)
class MatrixFunction:
    """
    Квадратна матриця виразів зі спільною вежею радикалів.

    Фізичний лист: усі знаки +1 у точці `anchor` на дійсній осі.
    """
    entries: tuple[tuple[Expression, ...], ...]
    anchor: complex = 0j

    def __post_init__(self):
        size = len(self.entries)
        if size == 0 or any(len(row) != size for row in self.entries):
            raise ValueError("matrix must be square and non-empty")

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @cached_property
    def program(self) -> Program:
        return Program(entry for row in self.entries for entry in row)

    @cached_property
    def radical_program(self) -> Program:
        """Програма лише для радикалів (без елементів матриці) для відстеження шляхів."""
        return Program(self.tower)

    @property
    def tower(self) -> tuple[Expression, ...]:
        return self.program.tower

    def physical_signs(self) -> BranchAssignment:
        return (1,) * len(self.tower)

    def values(self, k: complex, radicals: np.ndarray) -> np.ndarray:
        """Значення матриці для відомих значень радикалів; форма (batch, N, N)."""
        radicals = np.atleast_2d(radicals)
        batch = radicals.shape[0]
        try:
            flat = self.program.root_values(complex(k), fixed_rule(radicals), batch)
        except EvaluationError as error:
            raise self._locate(error) from None
        size = self.dimension
        return flat.reshape(batch, size, size)

    def values_for_signs(self, k: complex, signs: np.ndarray) -> np.ndarray:
        signs = np.atleast_2d(signs)
        radicals = self.radical_program.radical_values(complex(k), sign_rule(signs), signs.shape[0])
        return self.values(k, radicals)

    def _locate(self, error: EvaluationError) -> EvaluationError:
        node = getattr(error, "node", None)
        for i, row in enumerate(self.entries):
            for j, entry in enumerate(row):
                if node is not None and any(n is node for n in entry.nodes):
                    located = EvaluationError(str(error), error.subexpression, entry=(i, j))
                    located.node = node
                    return located
        return error

    def ensure_nondegenerate(self, seed: int = 0, samples: int = 3) -> None:
        """
        Перевіряє, що det G не дорівнює нулю тотожно.

        :raises DegenerateInputError: Якщо визначник нульовий у всіх випадкових точках.
        """
        rng = np.random.default_rng(seed)
        signs = np.array(self.physical_signs(), dtype=int)
        tested = 0
        for _ in range(samples * 10):
            k = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            try:
                value = self.values_for_signs(k, signs)[0]
            except EvaluationError:
                continue
            tested += 1
            scale = max(1.0, float(np.abs(value).max())) ** self.dimension
            if abs(np.linalg.det(value)) > 1e-13 * scale:
                return
            if tested >= samples:
                break
        raise DegenerateInputError("det G(k) vanishes identically")


def evaluate_matrix(G: MatrixFunction, k: complex, branches: Sequence[int] = ()) -> np.ndarray:
    """
    Обчислює всі елементи матриці на листі.

    :raises EvaluationError: З координатами елемента, де сталося ділення на нуль.
    :return: Комплексна матриця N x N.
    :rtype: numpy.ndarray
    """
    signs = _check_branches(G.tower, branches)
    return G.values_for_signs(complex(k), signs)[0]


def build_matrix(
        rows: Sequence[Sequence[str]],
        symbols: Optional[Mapping[str, Symbol]] = None,
        anchor: complex = 0j,
        pool: Optional[ExpressionPool] = None,
) -> MatrixFunction:
    """
    Розбирає рядки виразів у MatrixFunction зі спільним пулом вузлів.

    :param rows: Рядки матриці, кожен елемент є текстом виразу.
    :param symbols: Константи та іменовані радикали.
    :param anchor: Точка прив'язки фізичного листа.
    :return: Матриця-функція.
    :rtype: MatrixFunction
    """
    pool = pool if pool is not None else ExpressionPool()
    entries = tuple(
        tuple(parse_expression(str(text), symbols, pool) for text in row)
        for row in rows
    )
    return MatrixFunction(entries, complex(anchor))
