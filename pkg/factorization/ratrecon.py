"""
Відновлення раціональних функцій за значеннями в точках.

Лінеаризована задача p(x) - v q(x) = 0 розв'язується через сингулярний
вектор найменшого сингулярного числа; степені перебираються за зростанням
сумарного степеня, перша підстановка, що проходить перевірку на відкладених
точках, приймається.

Тут же перевірка однозначності: функція від значень листів не має
змінюватися після обходу будь-якої точки розгалуження.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from .continuation import SurfaceGeometry, track_loop
from .exceptions import ReconstructionError
from .expr import MatrixFunction, format_complex

if TYPE_CHECKING:
    from .surface import SheetAtlas

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RationalFunction:
    """p(k)/q(k); коефіцієнти за зростанням степеня, старший коефіцієнт q дорівнює 1."""
    numerator: tuple[complex, ...]
    denominator: tuple[complex, ...] = (1 + 0j,)

    @classmethod
    def zero(cls) -> RationalFunction:
        return cls((0j,), (1 + 0j,))

    @property
    def is_zero(self) -> bool:
        return not any(self.numerator)

    @property
    def degrees(self) -> tuple[int, int]:
        return len(self.numerator) - 1, len(self.denominator) - 1

    def __call__(self, k):
        return P.polyval(np.asarray(k, dtype=complex), self.numerator) / \
            P.polyval(np.asarray(k, dtype=complex), self.denominator)

    def zeros(self) -> np.ndarray:
        return P.polyroots(self.numerator) if len(self.numerator) > 1 else np.zeros(0, dtype=complex)

    def poles(self) -> np.ndarray:
        return P.polyroots(self.denominator) if len(self.denominator) > 1 else np.zeros(0, dtype=complex)

    def __str__(self):
        def poly(coeffs):
            return " + ".join(f"({format_complex(c)})k^{j}" for j, c in enumerate(coeffs) if c != 0) or "0"
        return f"[{poly(self.numerator)}] / [{poly(self.denominator)}]"


@dataclass(frozen=True)
class RationalMatrix:
    entries: tuple[tuple[RationalFunction, ...], ...]

    def __call__(self, k: complex) -> np.ndarray:
        return np.array([[entry(k) for entry in row] for row in self.entries], dtype=complex)

    @property
    def max_degrees(self) -> tuple[int, int]:
        degrees = [entry.degrees for row in self.entries for entry in row]
        return max(d[0] for d in degrees), max(d[1] for d in degrees)


def _trim(coeffs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    scale = np.abs(coeffs).max()
    if scale == 0:
        return np.zeros(1, dtype=complex)
    cleaned = np.where(np.abs(coeffs) < tol * scale, 0, coeffs)
    trimmed = np.trim_zeros(cleaned, "b")
    return trimmed if trimmed.size else np.zeros(1, dtype=complex)


def _fit(x: np.ndarray, v: np.ndarray, weights: np.ndarray, p: int, q: int):
    columns = [x ** j for j in range(p + 1)] + [-v * x ** j for j in range(q + 1)]
    system = np.stack(columns, axis=1) * weights[:, None]
    _, _, vh = scipy.linalg.svd(system)
    vector = vh[-1].conj()
    return vector[:p + 1], vector[p + 1:]


def reconstruct_rational(
        points: Sequence[complex],
        values: Sequence[complex],
        max_degree: tuple[int, int] = (12, 12),
        tol: float = 1e-8,
        scale: Optional[float] = None,
        atol: Optional[float] = None,
) -> RationalFunction:
    """
    Знаходить раціональну функцію мінімального сумарного степеня за вибіркою.

    :param points: Точки k.
    :param values: Значення функції в цих точках.
    :param max_degree: Обмеження степенів чисельника та знаменника.
    :param tol: Допустима відносна похибка на відкладених точках (кожна четверта).
    :param scale: Масштаб змінної x = k / scale; за замовчуванням медіана |k|.
    :param atol: Якщо всі |значення| не перевищують atol, повертається нуль.
    :raises ReconstructionError: Жодна пара степенів не пройшла перевірку.
    :return: Раціональна функція змінної k.
    :rtype: RationalFunction
    """
    k = np.asarray(points, dtype=complex)
    v = np.asarray(values, dtype=complex)
    magnitude = float(np.max(np.abs(v))) if v.size else 0.0
    if magnitude == 0 or (atol is not None and magnitude <= atol):
        return RationalFunction.zero()
    if k.size < 4:
        raise ReconstructionError("at least 4 samples are needed", samples=k.size)

    rho = scale or max(1.0, float(np.median(np.abs(k))))
    x = k / rho
    held = np.arange(k.size) % 4 == 3
    fit = ~held
    median = float(np.median(np.abs(v[fit]))) or 1.0
    weights = 1.0 / np.maximum(1.0, np.abs(v[fit]) / median)

    p_cap, q_cap = max_degree
    best = math.inf
    for total in range(p_cap + q_cap + 1):
        for q in range(min(total, q_cap) + 1):
            p = total - q
            if p > p_cap or p + q + 2 > fit.sum():
                continue
            a, b = _fit(x[fit], v[fit], weights, p, q)
            denominator = P.polyval(x[held], b)
            if not np.any(b) or np.any(denominator == 0):
                continue
            approx = P.polyval(x[held], a) / denominator
            residual = float(np.linalg.norm(approx - v[held]) / np.linalg.norm(v[held]))
            best = min(best, residual)
            if residual < tol:
                return _to_k(a, b, rho)
    raise ReconstructionError(
        f"no rational fit with degrees up to {p_cap}/{q_cap} (best held-out residual {best:.3e})",
        samples=k.size,
    )


def _to_k(a: np.ndarray, b: np.ndarray, rho: float) -> RationalFunction:
    a = np.array([c / rho ** j for j, c in enumerate(a)], dtype=complex)
    b = _trim(np.array([c / rho ** j for j, c in enumerate(b)], dtype=complex))
    lead = b[-1]
    a = _trim(a / lead)
    b = b / lead
    return RationalFunction(tuple(complex(c) for c in a), tuple(complex(c) for c in b))


def reconstruct_matrix(
        points: Sequence[complex],
        values: np.ndarray,
        max_degree: tuple[int, int] = (12, 12),
        tol: float = 1e-8,
) -> RationalMatrix:
    """
    Поелементне відновлення матриці; елементи, малі порівняно з усією
    матрицею (1e-10), вважаються тотожними нулями.

    :param values: Масив форми (samples, N, N).
    :raises ReconstructionError: Із координатами елемента, що не відновився.
    """
    values = np.asarray(values, dtype=complex)
    atol = 1e-10 * max(float(np.max(np.abs(values))), 1e-300)
    rows = []
    for i in range(values.shape[1]):
        row = []
        for j in range(values.shape[2]):
            try:
                row.append(reconstruct_rational(points, values[:, i, j], max_degree, tol, atol=atol))
            except ReconstructionError as error:
                raise ReconstructionError(f"entry {i},{j}: {error}", samples=error.samples) from None
        rows.append(tuple(row))
    return RationalMatrix(tuple(rows))


def sample_points(geometry: SurfaceGeometry, count: int, rng: np.random.Generator) -> list[complex]:
    """
    Точки на двох колах радіусів 0.75 і 1.25 масштабу поверхні навколо
    k_anchor, з відступом від точок розгалуження та розрізів.
    """
    anchor = geometry.frame.anchor
    scale = max([1.0] + [abs(a - anchor) for a in geometry.singularities])
    clearance = 0.05 * scale
    points: list[complex] = []
    per_circle = max(count // 2, 2)
    attempt = 0
    while len(points) < count:
        if attempt > 20:
            raise ReconstructionError(f"could only place {len(points)} of {count} sample points")
        offset = rng.uniform(0, 2 * np.pi)
        angles = offset + 2 * np.pi * np.arange(per_circle * (attempt + 1)) / (per_circle * (attempt + 1))
        points = []
        for radius in (0.75 * scale, 1.25 * scale):
            points += [anchor + radius * np.exp(1j * t) for t in angles]
        points = [complex(k) for k in points if geometry.is_clear(k, clearance)]
        attempt += 1
    ordered = sorted(range(len(points)), key=lambda n: rng.random())
    return [points[n] for n in ordered[:count]]


@dataclass(frozen=True)
class SingleValuedCheck:
    holds: bool
    residual: float
    tolerance: float
    worst_affix: Optional[complex] = None


def verify_single_valued(
        fn: Callable[[np.ndarray, complex], np.ndarray],
        G: MatrixFunction,
        atlas: SheetAtlas,
        tol: float = 1e-7,
        fractions: Sequence[float] = (1.0, 0.75, 0.5),
) -> SingleValuedCheck:
    """
    Перевіряє, що функція від значень листів не змінюється після обходу
    кожної точки розгалуження (на кількох радіусах обходу).

    :param fn: fn(stack, k), де stack має форму (sheets, N, N).
    :return: Найбільша відносна зміна та точка, де її досягнуто.
    """
    worst, where = 0.0, None
    for index, affix in enumerate(atlas.geometry.affixes):
        for fraction in fractions:
            base, before, after = track_loop(G, atlas, index, fraction)
            first = np.asarray(fn(G.values(base, before), base))
            second = np.asarray(fn(G.values(base, after), base))
            residual = float(np.linalg.norm(second - first) / max(np.linalg.norm(first), 1e-300))
            if residual > worst:
                worst, where = residual, affix
    holds = worst < tol
    if not holds:
        logger.warning("function changes by %.3e around affix %s", worst, where)
    return SingleValuedCheck(holds, worst, tol, where)
