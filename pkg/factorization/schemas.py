from typing import Annotated, Literal, Optional, Union

from ninja import Field, Schema
from pydantic import BeforeValidator, ConfigDict, PlainSerializer, field_validator

from .conf import get_defaults


def _to_complex(value):
    """Приймає [re, im], число або рядок `a+bi`."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        from .expr import evaluate, parse_expression

        return evaluate(parse_expression(value), 0)
    return value


Complex = Annotated[
    complex,
    BeforeValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float]),
]
"""Комплексне число у JSON: пара [re, im]."""

Residual = Annotated[
    float,
    BeforeValidator(lambda value: float(value)),
    PlainSerializer(lambda x: f"{x:.6e}", return_type=str),
]
"""Нев'язка у JSON: рядок у науковому записі."""


# --- Вхідні дані ---
class ClassifierOptions(Schema):
    """
    Параметри одного запуску класифікатора.

    Значення за замовчуванням беруться з settings.FACTORIZATION.
    """
    model_config = ConfigDict(extra="forbid")

    tol: float = Field(default_factory=lambda: get_defaults()['TOL'], gt=0, le=1e-2)
    """Поріг відносної нев'язки для вердиктів комутативності та відновлення."""

    samples: int = Field(default_factory=lambda: get_defaults()['SAMPLES'], ge=1, le=512)
    """Кількість випадкових точок k для перевірок комутативності."""

    seed: int = Field(default_factory=lambda: get_defaults()['SEED'], ge=0)
    """Зерно генератора випадкових чисел (вибірки та проби)."""

    max_degree: int = Field(default_factory=lambda: get_defaults()['MAX_DEGREE'], ge=0, le=24)
    """Обмеження степенів чисельника і знаменника під час раціонального відновлення."""

    anchor: str = Field(default_factory=lambda: str(get_defaults()['ANCHOR']))
    """Точка прив'язки фізичного листа (вираз без k, наприклад `0` або `0.5`)."""

    axis_tilt: Union[Literal["auto"], float] = Field(default_factory=lambda: get_defaults()['AXIS_TILT'])
    """Нахил прямої розділу півплощин: `auto` або кут у радіанах."""

    symmetrizer_probe: Literal["constant", "random"] = "constant"
    """Початкова проба симетризатора: f = 1 або випадкова лінійна комбінація."""

    @field_validator("anchor", mode="before")
    @classmethod
    def anchor_as_text(cls, value):
        return str(value)

    @field_validator("axis_tilt", mode="before")
    @classmethod
    def tilt_value(cls, value):
        if isinstance(value, str) and value != "auto":
            return float(value)
        return value


class MatrixSection(Schema):
    rows: list[list[Union[str, float, int]]]
    """Рядки матриці; кожен елемент - текст виразу."""

    @field_validator("rows")
    @classmethod
    def square(cls, rows):
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError("matrix must be square with N >= 1")
        return rows


class ProblemSpec(Schema):
    """
    Опис задачі: константи, радикали (від внутрішніх до зовнішніх), матриця та параметри.
    """
    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1] = 1
    constants: dict[str, Union[str, float, int]] = {}
    radicals: dict[str, str] = {}
    matrix: MatrixSection
    options: ClassifierOptions = Field(default_factory=ClassifierOptions)


# --- Звіт ---
class AffixOut(Schema):
    label: str
    """Літера обходу (a1, b2, ...)."""

    value: Complex
    hemisphere: str
    order: int
    """Порядок точки розгалуження (НСК довжин циклів)."""

    permutation: list[int]
    """Образи листів після додатного обходу."""


class SheetOut(Schema):
    index: int
    word: str
    """Найкоротше слово, що веде на лист."""

    signs: list[int]
    """Знаки радикалів на k_anchor."""


class AtlasOut(Schema):
    sheet_count: int
    axis_tilt: float
    affixes: list[AffixOut]
    sheets: list[SheetOut]
    dropped_candidates: list[Complex] = []
    """Нулі підкореневих виразів без монодромії."""


class BalanceOut(Schema):
    balanced: bool
    witness_sheet: Optional[int] = None
    unreachable_from: Optional[str] = None
    """Півплощина, обходами якої лист недосяжний."""


class WitnessOut(Schema):
    first: str
    second: str
    k: Complex
    residual: Residual


class VerdictOut(Schema):
    verdict: Literal["holds", "fails"]
    residual: Residual
    tolerance: Residual
    samples: int
    witness: Optional[WitnessOut] = None


class RationalOut(Schema):
    numerator: list[Complex]
    """Коефіцієнти за зростанням степеня."""

    denominator: list[Complex]
    """Старший коефіцієнт дорівнює 1."""


class SingleValuedOut(Schema):
    holds: bool
    residual: Residual
    tolerance: Residual


class CoefficientOut(Schema):
    index: int
    kind: Literal["rational", "algebraic, per-sample"]
    closed_form: Optional[RationalOut] = None
    samples: list[list[Complex]] = []
    """Пари [k, g_m(k)] для неальгебраїчно відновлених коефіцієнтів."""


class AnsatzOut(Schema):
    probe: list[Complex]
    normalization: str
    redraws: int
    A: list[list[RationalOut]]
    coefficients: list[CoefficientOut]
    residual: Residual
    """Максимальна відносна похибка суми g_m A^m на відкладених точках."""

    single_valued: SingleValuedOut
    frame_affixes: list[Complex] = []
    """Точки розгалуження матриці власних векторів M(k)."""


class SymmetrizerOut(Schema):
    probe_constant: Complex
    probe_weights: list[list[Complex]]
    redraws: int
    det_degenerate: bool
    S: list[list[RationalOut]]
    single_valued: SingleValuedOut
    commutativity: VerdictOut
    """Перевірка, що G S має комутуючі значення на всіх листах."""


class StageErrorOut(Schema):
    stage: str
    type: str
    message: str


class ClassificationReport(Schema):
    """
    Звіт класифікатора; однакові входи та зерна дають побайтово однаковий JSON.
    """
    format_version: Literal[1] = 1
    tool_version: str
    content_hash: str
    input: ProblemSpec
    seeds: dict[str, int]
    atlas: Optional[AtlasOut] = None
    balance: Optional[BalanceOut] = None
    branch_commutativity: Optional[VerdictOut] = None
    bypass_commutativity: Optional[VerdictOut] = None
    ansatz: Optional[AnsatzOut] = None
    symmetrizer: Optional[SymmetrizerOut] = None
    verdict: str
    conclusion: str
    errors: list[StageErrorOut] = []
    timing: Optional[dict[str, float]] = None


# --- HTTP ---
class DiagramOut(Schema):
    text: str
    dot: str


class RunSummaryOut(Schema):
    id: int
    content_hash: str
    verdict: str
    sheet_count: Optional[int]
    created_at: str

    @staticmethod
    def resolve_created_at(obj):
        return obj.created_at.isoformat()


class ErrorOut(Schema):
    detail: str
