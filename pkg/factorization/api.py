import logging
from typing import List, Optional

from django.db import transaction
from django.shortcuts import get_object_or_404
from ninja import Router
from ninja.errors import HttpError

from .exceptions import FactorizationError, InputError
from .models import ClassificationRun
from .problem import build_problem
from .report import report_schema, run_problem
from .schemas import ClassificationReport, DiagramOut, ErrorOut, ProblemSpec, RunSummaryOut
from .surface import build_atlas, render_dot, render_text

logger = logging.getLogger(__name__)

router = Router(tags=["Wiener-Hopf classification"])


# ==========================================================
#                        КЛАСИФІКАЦІЯ
# ==========================================================

@router.post("/classify/", response={201: ClassificationReport, 400: ErrorOut, 422: ClassificationReport})
@transaction.atomic
def classify_problem(request, payload: ProblemSpec, timing: bool = False):
    """
    Класифікує матрицю-функцію та зберігає звіт у журналі запусків.

    :param request: Об'єкт HttpRequest.
    :param payload: Опис задачі (константи, радикали, матриця, параметри).
    :type payload: ProblemSpec
    :param timing: Додати до звіту час виконання етапів.
    :raises HttpError 400: Помилка у виразах або вироджена матриця.
    :status 201: Класифікацію завершено.
    :status 422: Вердикт `incomplete`: числовий збій, звіт містить помилки етапів.
    :return: JSON-звіт.
    :rtype: ClassificationReport
    """
    try:
        outcome, report = run_problem(payload, include_timing=timing)
    except InputError as error:
        raise HttpError(400, str(error))

    ClassificationRun.objects.create(
        content_hash=report.content_hash,
        verdict=report.verdict,
        sheet_count=report.atlas.sheet_count if report.atlas else None,
        report=report.model_dump(mode="json"),
    )
    if outcome.exit_code == 2:
        raise HttpError(400, "; ".join(str(error) for error in outcome.errors))
    if outcome.exit_code:
        return 422, report
    return 201, report


@router.post("/diagram/", response={200: DiagramOut, 400: ErrorOut, 422: ErrorOut})
def sheet_diagram(request, payload: ProblemSpec):
    """
    Діаграма листів поверхні у текстовому форматі та форматі Graphviz.

    :param request: Об'єкт HttpRequest.
    :param payload: Опис задачі.
    :type payload: ProblemSpec
    :raises HttpError 400: Помилка у виразах або точка розгалуження на прямій розділу.
    :raises HttpError 422: Числовий збій під час побудови атласу.
    :rtype: DiagramOut
    """
    try:
        atlas = build_atlas(build_problem(payload), axis_tilt=payload.options.axis_tilt)
    except InputError as error:
        raise HttpError(400, str(error))
    except FactorizationError as error:
        logger.error("diagram failed at %s: %s", error.stage, error)
        raise HttpError(422, str(error))
    return DiagramOut(text=render_text(atlas), dot=render_dot(atlas))


# ==========================================================
#                      ЖУРНАЛ ЗАПУСКІВ
# ==========================================================

@router.get("/runs/", response=List[RunSummaryOut])
def list_runs(request, verdict: Optional[str] = None):
    """
    Повертає збережені запуски, новіші першими.

    :param verdict: Необов'язковий фільтр за вердиктом.
    :rtype: List[RunSummaryOut]
    """
    runs = ClassificationRun.objects.all()
    if verdict:
        runs = runs.filter(verdict=verdict)
    return runs


@router.get("/runs/{run_id}/", response=ClassificationReport)
def get_run(request, run_id: int):
    """
    Повний звіт збереженого запуску.

    :param run_id: ID запуску.
    :raises Http404: Якщо запуск не знайдено.
    :rtype: ClassificationReport
    """
    run = get_object_or_404(ClassificationRun, id=run_id)
    return run.report


@router.get("/schema/", response=dict)
def get_report_schema(request):
    """JSON-схема звіту класифікації."""
    return report_schema()
