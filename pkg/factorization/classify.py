"""
Критерії комутативної факторизації та конструкції, що з них випливають.

Перевірки числові: тотожності перевіряються у випадкових точках k з
відступом від розрізів, вердикт визначається порогом на відносну нев'язку.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.optimize

from .conf import get_defaults
from .continuation import safe_inverse, sheet_values
from .exceptions import (
    DegenerateProbeError,
    DegenerateSampleError,
    FactorizationError,
    NearCutError,
    NormalizationError,
    NumericError,
    ProbeSelectionError,
    ReconstructionError,
    StructuralError,
)
from .expr import MatrixFunction, format_complex
from .ratrecon import (
    RationalFunction,
    RationalMatrix,
    SingleValuedCheck,
    reconstruct_matrix,
    reconstruct_rational,
    sample_points,
    verify_single_valued,
)
from .schemas import ClassifierOptions
from .surface import BalanceVerdict, SheetAtlas, build_atlas, is_balanced
from .words import Word

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    BRANCH_COMMUTATIVE = "branch-commutative"
    BYPASS_COMMUTATIVE = "bypass-commutative"
    NOT_FACTORIZABLE = "not-commutatively-factorizable"
    UNBALANCED = "unbalanced"
    INCOMPLETE = "incomplete"


CONCLUSIONS = {
    Verdict.BRANCH_COMMUTATIVE: "commutatively factorizable: sheet values commute, Ansatz form available",
    Verdict.BYPASS_COMMUTATIVE: "rationally reducible to branch-commutative: G S is branch-commutative",
    Verdict.NOT_FACTORIZABLE: "not commutatively factorizable by the sheet and bypass criteria",
    Verdict.UNBALANCED: "criteria inapplicable (unbalanced surface)",
    Verdict.INCOMPLETE: "classification did not complete; see errors",
}


# ==========================================================
#                   ВИБІРКИ ТА КОМУТАТОРИ
# ==========================================================

@dataclass(frozen=True)
class CommutatorWitness:
    first: str
    second: str
    k: complex
    residual: float


@dataclass(frozen=True)
class CommutativityVerdict:
    holds: bool
    residual: float
    tolerance: float
    samples: int
    witness: Optional[CommutatorWitness] = None

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"


def commutator_residual(first: np.ndarray, second: np.ndarray) -> float:
    """||[A, B]||_F / (||A||_F ||B||_F); нуль для нульових матриць."""
    scale = np.linalg.norm(first) * np.linalg.norm(second)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(first @ second - second @ first) / scale)


def _surface_scale(atlas: SheetAtlas) -> float:
    anchor = atlas.geometry.frame.anchor
    return max([1.0] + [abs(a - anchor) for a in atlas.geometry.singularities])


def sample_stream(atlas: SheetAtlas, seed: int) -> Iterator[complex]:
    """
    Нескінченний потік точок у кільці 0.25..1.5 масштабу навколо k_anchor
    з відступом 0.1 масштабу від точок розгалуження та розрізів.
    """
    rng = np.random.default_rng(seed)
    anchor = atlas.geometry.frame.anchor
    scale = _surface_scale(atlas)
    misses = 0
    while True:
        k = complex(anchor + rng.uniform(0.25 * scale, 1.5 * scale) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        if atlas.geometry.is_clear(k, 0.1 * scale):
            misses = 0
            yield k
        else:
            misses += 1
            if misses > 10000:
                raise NearCutError("no sample point clear of cuts could be drawn")


def _sampled(G: MatrixFunction, atlas: SheetAtlas, count: int, seed: int,
             transform: Optional[Callable] = None) -> Iterator[tuple[complex, np.ndarray]]:
    failures = 0
    stream = sample_stream(atlas, seed)
    produced = 0
    while produced < count:
        k = next(stream)
        try:
            stack = sheet_values(G, atlas, k)
            if transform is not None:
                stack = transform(stack, k)
        except NumericError as error:
            failures += 1
            logger.warning("sample k=%s discarded: %s", format_complex(k), error)
            if failures > 10 * count:
                raise
            continue
        produced += 1
        yield k, stack


def _commutativity(samples: Iterator[tuple[complex, np.ndarray]], labels: Sequence[str],
                   count: int, tol: float) -> CommutativityVerdict:
    worst, witness = 0.0, None
    for k, stack in samples:
        for i, j in itertools.combinations(range(len(stack)), 2):
            residual = commutator_residual(stack[i], stack[j])
            if residual > worst or witness is None:
                worst = max(worst, residual)
                witness = CommutatorWitness(labels[i], labels[j], k, residual)
    holds = worst < tol
    return CommutativityVerdict(holds, worst, tol, count, None if holds else witness)


def _settings(samples, tol, seed) -> tuple[int, float, int]:
    defaults = get_defaults()
    return (
        samples if samples is not None else defaults['SAMPLES'],
        tol if tol is not None else defaults['TOL'],
        seed if seed is not None else defaults['SEED'],
    )


def is_branch_commutative(G: MatrixFunction, atlas: SheetAtlas, samples: Optional[int] = None,
                          tol: Optional[float] = None, seed: Optional[int] = None) -> CommutativityVerdict:
    """
    Чи комутують значення G на всіх парах листів.

    :param samples: Кількість точок k.
    :param tol: Поріг відносної нев'язки комутатора.
    :return: Вердикт із найбільшою нев'язкою та свідком (пара листів і k), якщо не виконується.
    :rtype: CommutativityVerdict
    """
    samples, tol, seed = _settings(samples, tol, seed)
    labels = [f"G{{{word}}}" for word in atlas.words]
    verdict = _commutativity(_sampled(G, atlas, samples, seed), labels, samples, tol)
    logger.info("branch-commutativity %s (residual %.3e)", verdict.verdict, verdict.residual)
    return verdict


def is_bypass_commutative(G: MatrixFunction, atlas: SheetAtlas, samples: Optional[int] = None,
                          tol: Optional[float] = None, seed: Optional[int] = None) -> CommutativityVerdict:
    """
    Чи комутують базові матриці обходу G{w_j} G^-1{e}.

    :raises StructuralError: Якщо поверхня не збалансована.
    """
    if not atlas.balance().balanced:
        raise StructuralError("bypass-commutativity needs a balanced surface", stage="bypass")
    samples, tol, seed = _settings(samples, tol, seed)
    basic = atlas.basic_words()
    sheets = [sheet for sheet, _ in basic]

    def bypasses(stack, k):
        inverse = safe_inverse(stack[atlas.physical])
        return np.array([stack[sheet] @ inverse for sheet in sheets]).reshape(len(sheets), *stack.shape[1:])

    labels = [f"G{{{word}}} G^-1{{e}}" for _, word in basic]
    verdict = _commutativity(_sampled(G, atlas, samples, seed, bypasses), labels, samples, tol)
    logger.info("bypass-commutativity %s (residual %.3e)", verdict.verdict, verdict.residual)
    return verdict


# ==========================================================
#                    ВЛАСНІ ВЕКТОРИ ТА ANSATZ
# ==========================================================

@dataclass(frozen=True)
class EigenFrame:
    """Власні значення та нормовані власні вектори (стовпці M) у точці k."""
    k: complex
    sheet: int
    eigenvalues: np.ndarray
    vectors: np.ndarray
    normalization: str = "first-row"


def frame_from_matrix(value: np.ndarray, k: complex = 0j, sheet: int = 0,
                      covector: Optional[np.ndarray] = None) -> EigenFrame:
    """
    Діагоналізує матрицю; кожен стовпець нормується так, що його перший
    елемент (або значення covector на ньому) дорівнює 1.

    :raises DegenerateSampleError: Власні значення майже збігаються.
    :raises NormalizationError: Нормувальний елемент стовпця нульовий.
    """
    eigenvalues, vectors = scipy.linalg.eig(value)
    size = len(eigenvalues)
    scale = float(np.max(np.abs(eigenvalues))) or 1.0
    if size > 1:
        gap = min(abs(a - b) for a, b in itertools.combinations(eigenvalues, 2))
        if gap < 1e-8 * scale:
            raise DegenerateSampleError(f"eigenvalues nearly coincide at k={format_complex(k)}; resample")
    weights = vectors[0] if covector is None else covector @ vectors
    if np.any(np.abs(weights) < 1e-10 * np.linalg.norm(vectors, axis=0)):
        raise NormalizationError(
            f"eigenvector with vanishing normalization component at k={format_complex(k)}"
        )
    vectors = vectors / weights
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    return EigenFrame(
        complex(k), sheet, eigenvalues[order], vectors[:, order],
        "first-row" if covector is None else "covector",
    )


def eigen_frame(G: MatrixFunction, k: complex, w: Word, atlas: SheetAtlas,
                covector: Optional[np.ndarray] = None) -> EigenFrame:
    """
    Власні вектори G(k){w}.

    :raises NearCutError: k надто близько до розрізу.
    :raises DegenerateSampleError: Власні значення майже збігаються.
    """
    sheet = atlas.sheet_of(w)
    return frame_from_matrix(sheet_values(G, atlas, k)[sheet], k, sheet, covector)


def ansatz_matrix(frame: EigenFrame, betas: Sequence[complex]) -> np.ndarray:
    """A = M diag(f) M^-1, f_m = sum_n beta_n M[n, m]."""
    f = np.asarray(betas, dtype=complex) @ frame.vectors
    return frame.vectors @ np.diag(f) @ np.linalg.inv(frame.vectors)


@dataclass(frozen=True)
class AnsatzProbe:
    """Сталі beta_n для f_m = sum_n beta_n M[n, m]."""
    betas: tuple[complex, ...]

    @classmethod
    def draw(cls, size: int, rng: np.random.Generator) -> AnsatzProbe:
        values = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        return cls(tuple(complex(v) for v in values))


@dataclass(frozen=True)
class SymmetrizerProbe:
    """f = constant + sum_ij weights[i][j] (G^-1)_ij на кожному листі."""
    constant: complex
    weights: tuple[tuple[complex, ...], ...]

    @classmethod
    def unit(cls, size: int) -> SymmetrizerProbe:
        return cls(1 + 0j, tuple((0j,) * size for _ in range(size)))

    @classmethod
    def draw(cls, size: int, rng: np.random.Generator) -> SymmetrizerProbe:
        weights = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        constant = complex(rng.standard_normal(), rng.standard_normal())
        return cls(constant, tuple(tuple(complex(w) for w in row) for row in weights))

    def symmetrize(self, inverses: np.ndarray) -> np.ndarray:
        """S = sum over sheets f{w} G^-1{w}."""
        weights = np.array(self.weights, dtype=complex)
        f = self.constant + np.einsum("ij,sij->s", weights, inverses)
        return np.einsum("s,sij->ij", f, inverses)


ProbeFunction = Union[AnsatzProbe, SymmetrizerProbe]


@dataclass(frozen=True)
class CoefficientFunction:
    """g_m: раціональна формула, якщо відновилась, інакше лише значення у точках."""
    index: int
    closed_form: Optional[RationalFunction]
    samples: tuple[tuple[complex, complex], ...]

    @property
    def kind(self) -> str:
        return "rational" if self.closed_form is not None else "algebraic, per-sample"


@dataclass(frozen=True)
class AnsatzResult:
    probe: AnsatzProbe
    A: RationalMatrix
    coefficients: tuple[CoefficientFunction, ...]
    residual: float
    single_valued: SingleValuedCheck
    normalization: str = "first-row"
    redraws: int = 0
    frame_affixes: tuple[complex, ...] = ()


@dataclass(frozen=True)
class SymmetrizerResult:
    probe: SymmetrizerProbe
    S: RationalMatrix
    commutativity: CommutativityVerdict
    single_valued: SingleValuedCheck
    det_degenerate: bool = False
    redraws: int = 0


def _reconstruction_points(G: MatrixFunction, atlas: SheetAtlas, caps: tuple[int, int], seed: int):
    """Точки на двох колах разом зі значеннями G на всіх листах; невдалі точки пропускаються."""
    points = sample_points(atlas.geometry, 4 * max(sum(caps), 2), np.random.default_rng(seed))
    result = []
    for k in points:
        try:
            result.append((k, sheet_values(G, atlas, k)))
        except NumericError as error:
            logger.warning("reconstruction point k=%s skipped: %s", format_complex(k), error)
    return result


def _frames(stacks, physical: int, covector) -> list[EigenFrame]:
    frames = []
    for k, stack in stacks:
        try:
            frames.append(frame_from_matrix(stack[physical], k, physical, covector))
        except DegenerateSampleError as error:
            logger.warning("%s", error)
    return frames


def _vandermonde(frame: EigenFrame, betas: np.ndarray) -> Optional[np.ndarray]:
    f = betas @ frame.vectors
    powers = np.vander(f, len(f), increasing=True)
    if np.linalg.cond(powers) > 1e10:
        return None
    return np.linalg.lstsq(powers, frame.eigenvalues, rcond=None)[0]


def _collides(frames: Sequence[EigenFrame], betas: np.ndarray) -> bool:
    for frame in frames:
        f = betas @ frame.vectors
        if len(f) > 1:
            gap = min(abs(a - b) for a, b in itertools.combinations(f, 2))
            if gap < 1e-6 * max(1.0, float(np.max(np.abs(f)))):
                return True
    return False


def build_ansatz(
        G: MatrixFunction,
        atlas: SheetAtlas,
        probe: Optional[AnsatzProbe] = None,
        samples: Optional[int] = None,
        tol: Optional[float] = None,
        seed: Optional[int] = None,
        max_degree: Optional[int] = None,
        verdict: Optional[CommutativityVerdict] = None,
) -> AnsatzResult:
    """
    Будує подання G = sum_m g_m A^m з раціональною матрицею A.

    :param probe: Сталі beta; якщо не задано, вибираються випадково (з повтором при збігу f).
    :param verdict: Уже обчислений вердикт комутативності листів.
    :raises StructuralError: G не є комутативною на листах.
    :raises ProbeSelectionError: Збіг значень f після 5 повторних виборів.
    :raises ReconstructionError: Елементи A не відновились у межах степенів (з точками).
    :return: Раціональна A, коефіцієнти g_m та нев'язки перевірок.
    :rtype: AnsatzResult
    """
    samples, tol, seed = _settings(samples, tol, seed)
    max_degree = max_degree if max_degree is not None else get_defaults()['MAX_DEGREE']
    verdict = verdict or is_branch_commutative(G, atlas, samples, tol, seed)
    if not verdict.holds:
        raise StructuralError("Ansatz needs a branch-commutative matrix", stage="build_ansatz")
    size = G.dimension
    rng = np.random.default_rng(seed + 1)
    caps = (max_degree, max_degree)
    stacks = _reconstruction_points(G, atlas, caps, seed + 2)

    covector = None
    try:
        frames = _frames(stacks, atlas.physical, None)
    except NormalizationError as error:
        logger.warning("%s; normalizing by a random covector", error)
        covector = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        frames = _frames(stacks, atlas.physical, covector)

    fixed = probe is not None
    probe = probe or AnsatzProbe.draw(size, rng)
    redraws = 0
    while _collides(frames, np.array(probe.betas)):
        if fixed or redraws >= 5:
            raise ProbeSelectionError("eigenvalues of A collide for every probe tried", stage="build_ansatz")
        probe = AnsatzProbe.draw(size, rng)
        redraws += 1
        logger.warning("probe redrawn after f-collision (%d)", redraws)
    betas = np.array(probe.betas)

    points = [frame.k for frame in frames]
    values = np.array([ansatz_matrix(frame, betas) for frame in frames]).reshape(len(frames), size, size)
    try:
        A = reconstruct_matrix(points, values, caps, tol)
    except ReconstructionError as error:
        raise ReconstructionError(str(error), samples=list(zip(points, values))) from None

    def physical_ansatz(stack, k):
        return ansatz_matrix(frame_from_matrix(stack[atlas.physical], k, atlas.physical, covector), betas)

    single_valued = verify_single_valued(physical_ansatz, G, atlas, tol=get_defaults()['VERIFY_TOL'])

    coefficient_samples = []
    for frame in frames:
        g = _vandermonde(frame, betas)
        if g is not None:
            coefficient_samples.append((frame.k, g))
    coefficients = []
    for m in range(size):
        pairs = tuple((k, complex(g[m])) for k, g in coefficient_samples)
        try:
            closed = reconstruct_rational([k for k, _ in pairs], [v for _, v in pairs], caps, tol)
        except ReconstructionError:
            closed = None
        coefficients.append(CoefficientFunction(m, closed, () if closed is not None else pairs))

    residual = 0.0
    for k, stack in _sampled(G, atlas, 10, seed + 3):
        value = stack[atlas.physical]
        try:
            frame = frame_from_matrix(value, k, atlas.physical, covector)
        except DegenerateSampleError:
            continue
        g = _vandermonde(frame, betas)
        if g is None:
            continue
        Ak = A(k)
        total = sum(g[m] * np.linalg.matrix_power(Ak, m) for m in range(size))
        residual = max(residual, float(np.linalg.norm(total - value) / np.linalg.norm(value)))
    logger.info("Ansatz built: held-out residual %.3e, single-valued %s", residual, single_valued.holds)

    return AnsatzResult(
        probe, A, tuple(coefficients), residual, single_valued,
        "first-row" if covector is None else "covector", redraws,
    )


def _discriminant(values: np.ndarray) -> np.complex128:
    """Дискримінант набору значень: добуток квадратів попарних різниць."""
    if len(values) < 2:
        return np.complex128(1)
    return np.complex128(np.prod([(a - b) ** 2 for a, b in itertools.combinations(values, 2)]))


def _dedupe(values: np.ndarray) -> np.ndarray:
    kept: list[complex] = []
    for value in values:
        if all(abs(value - other) > 1e-8 * max(1.0, abs(value)) for other in kept):
            kept.append(complex(value))
    return np.array(kept)


def _odd_points(function: RationalFunction) -> list[complex]:
    points = []
    for roots in (function.zeros(), function.poles()):
        groups: list[list[complex]] = []
        for root in roots:
            for group in groups:
                if abs(group[0] - root) < 1e-6 * (1 + abs(root)):
                    group.append(root)
                    break
            else:
                groups.append([root])
        points += [complex(np.mean(g)) for g in groups if len(g) % 2]
    return points


def _fiber_signs(G: MatrixFunction) -> np.ndarray:
    """Усі набори знаків вежі радикалів."""
    count = len(G.tower)
    return np.array(list(itertools.product((1, -1), repeat=count)), dtype=int).reshape(2 ** count, count)


def _row_values(G: MatrixFunction, k: complex, signs: np.ndarray) -> np.ndarray:
    """Різні значення другого рядка M(k) по всіх наборах знаків."""
    stack = G.values_for_signs(k, signs)
    return _dedupe(np.concatenate([frame_from_matrix(value, k).vectors[1] for value in stack]))


def _frame_monodromy(G: MatrixFunction, point: complex, radius: float, signs: np.ndarray,
                     steps: int = 96) -> bool:
    """
    Чи переставляє обхід навколо point значення другого рядка M.

    Набір значень по всіх знаках вежі однозначний, тому його елементи можна
    вести по колу, зіставляючи сусідні точки призначенням за відстанню.

    :raises DegenerateSampleError: Значення злипаються на колі.
    """
    start = _row_values(G, point + radius, signs)
    current = start
    for theta in 2 * np.pi * np.arange(1, steps + 1) / steps:
        following = _row_values(G, point + radius * np.exp(1j * theta), signs)
        if len(following) != len(current):
            raise DegenerateSampleError(f"eigenvector values collide on the loop around {format_complex(point)}")
        _, columns = scipy.optimize.linear_sum_assignment(np.abs(current[:, None] - following[None, :]))
        current = following[columns]
    scale = max(1.0, float(np.max(np.abs(start))))
    return bool(np.any(np.abs(current - start) > 1e-6 * scale))


def frame_branch_affixes(G: MatrixFunction, atlas: SheetAtlas, seed: Optional[int] = None,
                         max_degree: Optional[int] = None, tol: Optional[float] = None) -> list[complex]:
    """
    Точки розгалуження матриці власних векторів M(k).

    Набір значень другого рядка M на всіх листах інваріантний щодо обходів,
    тому його дискримінант раціональний. Кандидати - нулі та полюси
    дискримінанта непарної кратності; кандидат лишається, якщо обхід
    навколо нього справді переставляє значення.
    """
    _, tol, seed = _settings(None, tol, seed)
    max_degree = max_degree if max_degree is not None else get_defaults()['MAX_DEGREE']
    if G.dimension < 2:
        return []
    caps = (max_degree, max_degree)
    points, discriminants = [], []
    count = None
    for k, stack in _reconstruction_points(G, atlas, caps, seed + 2):
        try:
            row = np.concatenate([frame_from_matrix(value, k).vectors[1] for value in stack])
        except (DegenerateSampleError, NormalizationError):
            continue
        row = _dedupe(row)
        count = count or len(row)
        if len(row) != count:
            continue
        points.append(k)
        discriminants.append(_discriminant(row))

    candidates: list[complex] = []
    for point in _odd_points(reconstruct_rational(points, discriminants, caps, tol)):
        if all(abs(point - c) > 1e-6 * (1 + abs(point)) for c in candidates):
            candidates.append(point)

    signs = _fiber_signs(G)
    affixes: list[complex] = []
    for point in candidates:
        others = [abs(point - q) for q in (*candidates, *atlas.geometry.singularities)
                  if abs(point - q) > 1e-6 * (1 + abs(point))]
        radius = 0.25 * min(others, default=1.0)
        try:
            if not _frame_monodromy(G, point, radius, signs):
                logger.debug("eigenframe candidate %s dropped: no monodromy", format_complex(point))
                continue
        except (NumericError, np.linalg.LinAlgError) as error:
            logger.warning("eigenframe candidate %s kept unverified: %s", format_complex(point), error)
        affixes.append(point)
    return sorted(affixes, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def _det_degenerate(S: RationalMatrix, points: Sequence[complex]) -> bool:
    for k in points:
        value = S(k)
        scale = np.linalg.norm(value) ** value.shape[0]
        if scale > 0 and abs(np.linalg.det(value)) > 1e-10 * scale:
            return False
    return True


def build_symmetrizer(
        G: MatrixFunction,
        atlas: SheetAtlas,
        probe: Union[SymmetrizerProbe, str, None] = None,
        samples: Optional[int] = None,
        tol: Optional[float] = None,
        seed: Optional[int] = None,
        max_degree: Optional[int] = None,
        verdict: Optional[CommutativityVerdict] = None,
) -> SymmetrizerResult:
    """
    Раціональна матриця S = sum_w f{w} G^-1{w}, для якої G S комутативна на листах.

    :param probe: Задана проба (використовується як є), `constant` (f = 1 з
        повторним вибором при виродженому det S) або None (випадкова).
    :raises StructuralError: Поверхня не збалансована або G не bypass-комутативна.
    :raises DegenerateProbeError: det S тотожно нуль після 5 повторних виборів.
    :rtype: SymmetrizerResult
    """
    if not atlas.balance().balanced:
        raise StructuralError("symmetrizer needs a balanced surface", stage="build_symmetrizer")
    samples, tol, seed = _settings(samples, tol, seed)
    max_degree = max_degree if max_degree is not None else get_defaults()['MAX_DEGREE']
    verdict = verdict or is_bypass_commutative(G, atlas, samples, tol, seed)
    if not verdict.holds:
        raise StructuralError("symmetrizer needs a bypass-commutative matrix", stage="build_symmetrizer")
    size = G.dimension
    rng = np.random.default_rng(seed + 4)
    caps = (max_degree, max_degree)

    inverses = []
    for k, stack in _reconstruction_points(G, atlas, caps, seed + 2):
        try:
            inverses.append((k, np.array([safe_inverse(value) for value in stack])))
        except NumericError as error:
            logger.warning("reconstruction point k=%s skipped: %s", format_complex(k), error)
    points = [k for k, _ in inverses]
    checks = [k for k, _ in itertools.islice(_sampled(G, atlas, 5, seed + 5), 5)]

    fixed = isinstance(probe, SymmetrizerProbe)
    if probe == "constant":
        probe = SymmetrizerProbe.unit(size)
    elif probe is None:
        probe = SymmetrizerProbe.draw(size, rng)
    redraws = 0
    while True:
        values = np.array([probe.symmetrize(inverse) for _, inverse in inverses])
        S = reconstruct_matrix(points, values, caps, tol)
        degenerate = _det_degenerate(S, checks)
        if not degenerate or fixed:
            break
        if redraws >= 5:
            raise DegenerateProbeError("det S vanishes identically for every probe tried")
        probe = SymmetrizerProbe.draw(size, rng)
        redraws += 1
        logger.warning("symmetrizer probe redrawn after degenerate det S (%d)", redraws)

    single_valued = verify_single_valued(
        lambda stack, k: probe.symmetrize(np.array([np.linalg.inv(value) for value in stack])),
        G, atlas, tol=get_defaults()['VERIFY_TOL'],
    )
    labels = [f"G{{{word}}} S" for word in atlas.words]
    product = _commutativity(
        _sampled(G, atlas, samples, seed + 6, lambda stack, k: stack @ S(k)),
        labels, samples, get_defaults()['VERIFY_TOL'],
    )
    logger.info("symmetrizer built: G S branch-commutativity %s (%.3e)", product.verdict, product.residual)
    return SymmetrizerResult(probe, S, product, single_valued, degenerate, redraws)


# ==========================================================
#                        КОНВЕЄР
# ==========================================================

@dataclass
class ClassificationOutcome:
    """Результат конвеєра; поля заповнюються в міру проходження етапів."""
    options: ClassifierOptions
    verdict: Verdict = Verdict.INCOMPLETE
    atlas: Optional[SheetAtlas] = None
    balance: Optional[BalanceVerdict] = None
    branch: Optional[CommutativityVerdict] = None
    bypass: Optional[CommutativityVerdict] = None
    ansatz: Optional[AnsatzResult] = None
    symmetrizer: Optional[SymmetrizerResult] = None
    errors: list[FactorizationError] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def conclusion(self) -> str:
        return CONCLUSIONS[self.verdict]

    @property
    def exit_code(self) -> int:
        if self.verdict is not Verdict.INCOMPLETE:
            return 0
        return max((error.code for error in self.errors), default=3)


class _Stage:
    def __init__(self, outcome: ClassificationOutcome, name: str):
        self.outcome = outcome
        self.name = name

    def __enter__(self):
        self.started = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.outcome.timing[self.name] = time.perf_counter() - self.started
        return False


def classify(G: MatrixFunction, options: Optional[ClassifierOptions] = None) -> ClassificationOutcome:
    """
    Повна перевірка: атлас, збалансованість, комутативність листів
    (і Ansatz) або комутативність обходів (і симетризатор).

    Помилки етапів збираються в `errors`; помилка під час побудови Ansatz
    чи симетризатора вердикту не скасовує.
    """
    options = options or ClassifierOptions()
    outcome = ClassificationOutcome(options)
    common = dict(samples=options.samples, tol=options.tol, seed=options.seed)
    try:
        with _Stage(outcome, "atlas"):
            G.ensure_nondegenerate(options.seed)
            atlas = outcome.atlas = build_atlas(G, axis_tilt=options.axis_tilt)
        with _Stage(outcome, "balance"):
            outcome.balance = is_balanced(G, atlas)
        if not outcome.balance.balanced:
            outcome.verdict = Verdict.UNBALANCED
            return outcome
        with _Stage(outcome, "branch_commutativity"):
            outcome.branch = is_branch_commutative(G, atlas, **common)
        if not outcome.branch.holds:
            with _Stage(outcome, "bypass_commutativity"):
                outcome.bypass = is_bypass_commutative(G, atlas, **common)
    except FactorizationError as error:
        logger.error("classification stopped at %s: %s", error.stage, error)
        outcome.errors.append(error)
        return outcome

    if outcome.branch.holds:
        outcome.verdict = Verdict.BRANCH_COMMUTATIVE
        with _Stage(outcome, "build_ansatz"):
            outcome.ansatz = _construct(outcome, lambda: _ansatz_with_frame(G, atlas, options, outcome.branch))
    elif outcome.bypass.holds:
        outcome.verdict = Verdict.BYPASS_COMMUTATIVE
        with _Stage(outcome, "build_symmetrizer"):
            outcome.symmetrizer = _construct(outcome, lambda: build_symmetrizer(
                G, atlas, options.symmetrizer_probe, max_degree=options.max_degree,
                verdict=outcome.bypass, **common,
            ))
    else:
        outcome.verdict = Verdict.NOT_FACTORIZABLE
    logger.info("verdict: %s", outcome.verdict.value)
    return outcome


def _ansatz_with_frame(G: MatrixFunction, atlas: SheetAtlas, options: ClassifierOptions,
                       verdict: CommutativityVerdict) -> AnsatzResult:
    result = build_ansatz(G, atlas, samples=options.samples, tol=options.tol, seed=options.seed,
                          max_degree=options.max_degree, verdict=verdict)
    if G.dimension < 2 or result.normalization != "first-row":
        return result
    try:
        affixes = frame_branch_affixes(G, atlas, options.seed, options.max_degree, options.tol)
    except FactorizationError as error:
        logger.warning("eigenframe branch affixes not recovered: %s", error)
        return result
    return AnsatzResult(
        result.probe, result.A, result.coefficients, result.residual, result.single_valued,
        result.normalization, result.redraws, tuple(affixes),
    )


def _construct(outcome: ClassificationOutcome, build: Callable):
    try:
        return build()
    except FactorizationError as error:
        logger.error("%s failed: %s", error.stage, error)
        outcome.errors.append(error)
        return None
