"""
Ієрархія помилок класифікатора.

Кожна помилка несе `stage` (на якому кроці конвеєра вона виникла) та `code`,
який CLI перетворює на код завершення процесу: 2 для помилок вхідних даних,
3 для числових і структурних збоїв.
"""
from typing import Optional


class FactorizationError(Exception):
    """Базова помилка бібліотеки."""

    code = 3
    stage = "classify"

    def __init__(self, message: str, *, stage: Optional[str] = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage

    def as_dict(self) -> dict:
        """Повертає опис помилки для JSON-звіту."""
        return {"stage": self.stage, "type": type(self).__name__, "message": str(self)}


# --- Помилки вхідних даних (exit 2) ---

class InputError(FactorizationError):
    code = 2
    stage = "input"


class ExpressionSyntaxError(InputError):
    """Синтаксична помилка у виразі; `offset` вказує на позицію в тексті."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnboundSymbolError(InputError):
    def __init__(self, name: str):
        super().__init__(f"unbound symbol '{name}'")
        self.name = name


class TowerCycleError(InputError):
    pass


class DegenerateInputError(InputError):
    pass


class UnsupportedSurfaceError(InputError):
    stage = "surface"


class ProblemSpecError(InputError):
    pass


# --- Числові збої (exit 3) ---

class NumericError(FactorizationError):
    code = 3


class EvaluationError(NumericError):
    """Ділення на нуль під час обчислення; зберігає підвираз і координати елемента."""

    stage = "evaluate"

    def __init__(self, message: str, subexpression: str = "", entry: Optional[tuple] = None):
        if entry is not None:
            message = f"{message} (entry {entry[0]},{entry[1]})"
        super().__init__(message)
        self.subexpression = subexpression
        self.entry = entry


class TrackingError(NumericError):
    stage = "continuation"


class NearCutError(NumericError):
    stage = "continuation"


class SingularSampleError(NumericError):
    stage = "continuation"


class DegenerateSampleError(NumericError):
    stage = "eigen_frame"


class NormalizationError(NumericError):
    stage = "eigen_frame"


class ReconstructionError(NumericError):
    stage = "ratrecon"

    def __init__(self, message: str, samples=None):
        super().__init__(message)
        self.samples = samples


class ProbeSelectionError(NumericError):
    stage = "build_ansatz"


class DegenerateProbeError(NumericError):
    stage = "build_symmetrizer"


# --- Порушення передумов конструкцій ---

class StructuralError(FactorizationError):
    code = 3
