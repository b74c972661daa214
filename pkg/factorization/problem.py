"""
Завантаження опису задачі (TOML) та побудова матриці-функції.

Формат файлу::

    format_version = 1

    [constants]
    k0 = "1+0.5i"

    [radicals]          # від внутрішніх до зовнішніх
    s = "sqrt(k0^2 - k^2)"

    [matrix]
    rows = [["1", "s"], ["-s", "k"]]

    [options]
    samples = 16
"""
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Mapping, Union

from pydantic import ValidationError

from .exceptions import ProblemSpecError
from .expr import ExpressionPool, Kind, MatrixFunction, build_matrix, evaluate, parse_expression
from .schemas import ClassifierOptions, ProblemSpec

logger = logging.getLogger(__name__)

RESERVED = {"k", "i", "sqrt", "e"}


def _validation_message(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"])
    return f"{location}: {first['msg']}" if location else first["msg"]


def parse_problem(data: Mapping) -> ProblemSpec:
    """
    Перевіряє словник задачі.

    :raises ProblemSpecError: Якщо структура або діапазони параметрів некоректні.
    :rtype: ProblemSpec
    """
    try:
        return ProblemSpec.model_validate(dict(data))
    except ValidationError as error:
        raise ProblemSpecError(_validation_message(error)) from None


def load_problem(path: Union[str, Path]) -> ProblemSpec:
    """
    Читає TOML-файл задачі.

    :param path: Шлях до файлу.
    :raises ProblemSpecError: Файл недоступний, не є TOML або не проходить перевірку.
    :return: Опис задачі.
    :rtype: ProblemSpec
    """
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except OSError as error:
        raise ProblemSpecError(f"cannot read {path}: {error.strerror}") from None
    except tomllib.TOMLDecodeError as error:
        raise ProblemSpecError(f"{path}: {error}") from None
    return parse_problem(data)


def with_overrides(spec: ProblemSpec, overrides: Mapping) -> ProblemSpec:
    """Прапорці командного рядка мають пріоритет над секцією [options]."""
    if not overrides:
        return spec
    try:
        options = ClassifierOptions.model_validate({**spec.options.model_dump(), **overrides})
    except ValidationError as error:
        raise ProblemSpecError(_validation_message(error)) from None
    return spec.model_copy(update={"options": options})


def _check_name(name: str) -> None:
    if name in RESERVED or not name.isidentifier():
        raise ProblemSpecError(f"'{name}' cannot be used as a symbol name")


def _constant(text, symbols: Mapping[str, complex], what: str) -> complex:
    if isinstance(text, (int, float)):
        return complex(text)
    expr = parse_expression(str(text), symbols)
    if any(node.kind is Kind.VARIABLE for node in expr.nodes):
        raise ProblemSpecError(f"{what} must not depend on k")
    return evaluate(expr, 0, (1,) * len(expr.tower))


def build_problem(spec: ProblemSpec) -> MatrixFunction:
    """
    Будує MatrixFunction: константи обчислюються, радикали розбираються у
    спільний пул у порядку оголошення, тому внутрішні отримують менші номери.

    :raises ExpressionSyntaxError: Помилка у виразі.
    :raises UnboundSymbolError: Невідоме ім'я.
    :raises DegenerateInputError: det G тотожно дорівнює нулю.
    :rtype: MatrixFunction
    """
    constants: dict[str, complex] = {}
    for name, value in spec.constants.items():
        _check_name(name)
        constants[name] = _constant(value, constants, f"constant '{name}'")
    pool = ExpressionPool()
    symbols: dict = dict(constants)
    for name, text in spec.radicals.items():
        _check_name(name)
        if name in symbols:
            raise ProblemSpecError(f"'{name}' is defined twice")
        symbols[name] = parse_expression(text, symbols, pool)
    anchor = _constant(spec.options.anchor, constants, "anchor")
    G = build_matrix(spec.matrix.rows, symbols, anchor, pool)
    G.ensure_nondegenerate(spec.options.seed)
    logger.debug("problem built: %dx%d, %d radicals", G.dimension, G.dimension, len(G.tower))
    return G
