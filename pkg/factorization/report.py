"""
Збирання JSON-звіту класифікації.

Звіт детермінований: час виконання додається лише на запит, а хеш вмісту
рахується від канонічного JSON вхідних даних.
"""
import hashlib
import json
from typing import Optional

from .classify import AnsatzResult, ClassificationOutcome, CommutativityVerdict, SymmetrizerResult, classify
from .conf import get_defaults
from .problem import build_problem
from .ratrecon import RationalFunction, RationalMatrix, SingleValuedCheck
from .schemas import (
    AffixOut,
    AnsatzOut,
    AtlasOut,
    BalanceOut,
    ClassificationReport,
    CoefficientOut,
    ProblemSpec,
    RationalOut,
    SheetOut,
    SingleValuedOut,
    StageErrorOut,
    SymmetrizerOut,
    VerdictOut,
    WitnessOut,
)
from .surface import SheetAtlas
from .words import Hemisphere


def content_hash(spec: ProblemSpec) -> str:
    canonical = json.dumps(spec.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def seeds_of(seed: int) -> dict[str, int]:
    """Похідні зерна окремих етапів."""
    return {
        "samples": seed,
        "probe": seed + 1,
        "reconstruction": seed + 2,
        "held_out": seed + 3,
        "symmetrizer_probe": seed + 4,
        "determinant_checks": seed + 5,
        "symmetrizer_commutativity": seed + 6,
    }


def _rational(function: RationalFunction) -> RationalOut:
    return RationalOut(numerator=list(function.numerator), denominator=list(function.denominator))


def _matrix(matrix: RationalMatrix) -> list[list[RationalOut]]:
    return [[_rational(entry) for entry in row] for row in matrix.entries]


def _verdict(verdict: Optional[CommutativityVerdict]) -> Optional[VerdictOut]:
    if verdict is None:
        return None
    witness = None
    if verdict.witness is not None:
        witness = WitnessOut(
            first=verdict.witness.first,
            second=verdict.witness.second,
            k=verdict.witness.k,
            residual=verdict.witness.residual,
        )
    return VerdictOut(
        verdict=verdict.verdict,
        residual=verdict.residual,
        tolerance=verdict.tolerance,
        samples=verdict.samples,
        witness=witness,
    )


def _single_valued(check: SingleValuedCheck) -> SingleValuedOut:
    return SingleValuedOut(holds=check.holds, residual=check.residual, tolerance=check.tolerance)


def _hemisphere(hemisphere: Optional[Hemisphere]) -> Optional[str]:
    if hemisphere is None:
        return None
    return "upper" if hemisphere is Hemisphere.UPPER else "lower"


def atlas_summary(atlas: SheetAtlas) -> AtlasOut:
    kept = {affix.value for affix in atlas.affixes}
    return AtlasOut(
        sheet_count=atlas.sheet_count,
        axis_tilt=atlas.geometry.frame.tilt,
        affixes=[
            AffixOut(
                label=affix.label,
                value=affix.value,
                hemisphere=_hemisphere(affix.hemisphere),
                order=affix.order,
                permutation=list(permutation.images),
            )
            for affix, permutation in zip(atlas.affixes, atlas.permutations)
        ],
        sheets=[
            SheetOut(index=index, word=str(word), signs=list(signs))
            for index, (word, signs) in enumerate(zip(atlas.words, atlas.sheets))
        ],
        dropped_candidates=[value for value in atlas.candidates if value not in kept],
    )


def _ansatz(result: AnsatzResult) -> AnsatzOut:
    return AnsatzOut(
        probe=list(result.probe.betas),
        normalization=result.normalization,
        redraws=result.redraws,
        A=_matrix(result.A),
        coefficients=[
            CoefficientOut(
                index=c.index,
                kind=c.kind,
                closed_form=_rational(c.closed_form) if c.closed_form is not None else None,
                samples=[[k, value] for k, value in c.samples],
            )
            for c in result.coefficients
        ],
        residual=result.residual,
        single_valued=_single_valued(result.single_valued),
        frame_affixes=list(result.frame_affixes),
    )


def _symmetrizer(result: SymmetrizerResult) -> SymmetrizerOut:
    return SymmetrizerOut(
        probe_constant=result.probe.constant,
        probe_weights=[list(row) for row in result.probe.weights],
        redraws=result.redraws,
        det_degenerate=result.det_degenerate,
        S=_matrix(result.S),
        single_valued=_single_valued(result.single_valued),
        commutativity=_verdict(result.commutativity),
    )


def build_report(spec: ProblemSpec, outcome: ClassificationOutcome, include_timing: bool = False) -> ClassificationReport:
    """
    Перетворює результат конвеєра на схему звіту.

    :param spec: Вхідна задача (відтворюється у звіті разом із хешем).
    :param outcome: Результат classify.
    :param include_timing: Додати час етапів (звіт тоді не детермінований).
    :rtype: ClassificationReport
    """
    balance = None
    if outcome.balance is not None:
        balance = BalanceOut(
            balanced=outcome.balance.balanced,
            witness_sheet=outcome.balance.witness_sheet,
            unreachable_from=_hemisphere(outcome.balance.unreachable_from),
        )
    return ClassificationReport(
        tool_version=get_defaults()['VERSION'],
        content_hash=content_hash(spec),
        input=spec,
        seeds=seeds_of(spec.options.seed),
        atlas=atlas_summary(outcome.atlas) if outcome.atlas is not None else None,
        balance=balance,
        branch_commutativity=_verdict(outcome.branch),
        bypass_commutativity=_verdict(outcome.bypass),
        ansatz=_ansatz(outcome.ansatz) if outcome.ansatz is not None else None,
        symmetrizer=_symmetrizer(outcome.symmetrizer) if outcome.symmetrizer is not None else None,
        verdict=outcome.verdict.value,
        conclusion=outcome.conclusion,
        errors=[StageErrorOut(**error.as_dict()) for error in outcome.errors],
        timing=dict(sorted(outcome.timing.items())) if include_timing else None,
    )


def render_report(report: ClassificationReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def report_schema() -> dict:
    """JSON-схема звіту у формі, в якій він серіалізується."""
    return ClassificationReport.model_json_schema(mode="serialization")


def run_problem(spec: ProblemSpec, include_timing: bool = False) -> tuple[ClassificationOutcome, ClassificationReport]:
    """
    Будує G за описом задачі, класифікує її та збирає звіт.

    :raises InputError: Помилка в описі задачі (до початку класифікації).
    :return: Результат конвеєра та звіт.
    """
    G = build_problem(spec)
    outcome = classify(G, spec.options)
    return outcome, build_report(spec, outcome, include_timing)
