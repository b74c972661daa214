"""
Матриці-функції для тестів: задачі з каталогу specs/ та кілька вбудованих.
"""
from pathlib import Path

from django.conf import settings

from factorization.expr import ExpressionPool, MatrixFunction, build_matrix, parse_expression
from factorization.problem import build_problem, load_problem
from factorization.schemas import ProblemSpec

SPECS_DIR = Path(settings.BASE_DIR) / "specs"

NESTED_K1 = 5
NESTED_K2 = 2


def spec(name: str) -> ProblemSpec:
    return load_problem(SPECS_DIR / f"{name}.toml")


def matrix(name: str) -> MatrixFunction:
    return build_problem(spec(name))


def with_radicals(radicals: dict[str, str], rows, constants=None) -> MatrixFunction:
    """Матриця з іменованими радикалами (від внутрішніх до зовнішніх)."""
    pool = ExpressionPool()
    symbols = dict(constants or {})
    for name, text in radicals.items():
        symbols[name] = parse_expression(text, symbols, pool)
    return build_matrix(rows, symbols, pool=pool)


def daniele_constants() -> dict[str, complex]:
    return {"k0": 1 + 0.5j, "k1": 0.7 + 0.2j, "k2": 1.3 - 0.4j}


def scalar_root() -> MatrixFunction:
    return with_radicals({"s": "sqrt(1 + k^2)"}, [["s"]])


def diagonal_root() -> MatrixFunction:
    return with_radicals({"s": "sqrt(1 + k^2)"}, [["s", "0"], ["0", "k + 2"]])


def swap_root() -> MatrixFunction:
    return with_radicals({"s": "sqrt(k^2 + 4)"}, [["1", "s"], ["s", "1"]])


def branch_commutative() -> dict[str, MatrixFunction]:
    return {
        "daniele": matrix("daniele"),
        "pencil": matrix("pencil"),
        "scalar": scalar_root(),
        "diagonal": diagonal_root(),
        "swap": swap_root(),
    }


def unnested() -> dict[str, MatrixFunction]:
    """Матриці без вкладених радикалів (для аналітичної монодромії)."""
    return {
        "daniele": matrix("daniele"),
        "printed_pencil": matrix("printed_pencil"),
        "unbalanced": matrix("unbalanced"),
        "two_roots": with_radicals(
            {"p": "sqrt(k^2 + 1)", "q": "sqrt((k - 2)*(k + 3) + 2i)"},
            [["p", "q"], ["q", "p + k"]],
        ),
    }


def nested_pair(k1: complex, k2: complex) -> MatrixFunction:
    """Задача nested_pair з іншими сталими."""
    return with_radicals(
        {"s1": "sqrt(k1^2 - k^2)", "s2": "sqrt(k2^2 - s1)"},
        [["s1", "s2"], ["-s2", "k*s1"]],
        {"k1": complex(k1), "k2": complex(k2)},
    )


def nested_symmetrizer_diagonal(k: complex, k1: complex = NESTED_K1, k2: complex = NESTED_K2) -> complex:
    """S[1][1] для задачі nested_pair при f = 1."""
    u = k1 ** 2 - k ** 2
    return 4 * u / ((k * u + k2 ** 2) ** 2 - u)
