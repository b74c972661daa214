"""
Чисельне аналітичне продовження вздовж шляхів.

Шляхи складаються з відрізків та дуг. Радикали ведуться всі одночасно (для
кількох листів пакетом): на кожному кроці береться той із двох коренів, що
ближчий до попереднього значення; надто великий відносний стрибок зменшує
крок удвічі.

Геометрія розрізів: пряма розділу проходить через k_anchor (дійсна вісь або
нахилена на малий кут, див. surface.resolve_tilt); розріз кожної точки
розгалуження йде від неї перпендикулярно до прямої, геть від неї. Шлях до
точки k: уздовж прямої до проєкції k, далі перпендикулярно до k.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from .exceptions import NearCutError, SingularSampleError, StructuralError, TrackingError
from .expr import Expression, MatrixFunction, Program, fixed_rule, identify_signs, principal_sqrt, sign_rule
from .words import AffixOrders, Side, Word, compose, truncate

if TYPE_CHECKING:
    from .surface import SheetAtlas

logger = logging.getLogger(__name__)


# ==========================================================
#                         ШЛЯХИ
# ==========================================================

@dataclass(frozen=True)
class Line:
    start: complex
    end: complex

    def at(self, s: float) -> complex:
        return self.start + s * (self.end - self.start)

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    @property
    def sweep(self) -> float:
        return 0.0

    def reversed(self) -> Line:
        return Line(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """Дуга кола; theta1 > theta0 означає додатний обхід (проти годинникової стрілки)."""
    center: complex
    radius: float
    theta0: float
    theta1: float

    def at(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * (self.theta0 + s * (self.theta1 - self.theta0)))

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    @property
    def sweep(self) -> float:
        return abs(self.theta1 - self.theta0)

    def reversed(self) -> Arc:
        return Arc(self.center, self.radius, self.theta1, self.theta0)


Segment = Union[Line, Arc]


@dataclass(frozen=True)
class PathSpec:
    """Кусково-лінійний або дуговий шлях у площині k."""
    segments: tuple[Segment, ...]

    @classmethod
    def polyline(cls, points: Sequence[complex]) -> PathSpec:
        segments = tuple(
            Line(complex(a), complex(b)) for a, b in zip(points, points[1:]) if a != b
        )
        if not segments:
            segments = (Line(complex(points[0]), complex(points[0])),)
        return cls(segments)

    @property
    def start(self) -> complex:
        return self.segments[0].at(0.0)

    @property
    def end(self) -> complex:
        return self.segments[-1].at(1.0)

    @property
    def length(self) -> float:
        return sum(segment.length for segment in self.segments)

    def then(self, other: PathSpec) -> PathSpec:
        return PathSpec(self.segments + other.segments)

    def reversed(self) -> PathSpec:
        return PathSpec(tuple(segment.reversed() for segment in reversed(self.segments)))


@dataclass(frozen=True)
class Frame:
    """Пряма розділу через anchor з напрямком exp(-i*tilt); h > 0 означає верхню півплощину."""
    anchor: complex = 0j
    tilt: float = 0.0

    @property
    def direction(self) -> complex:
        return cmath.exp(-1j * self.tilt)

    def coords(self, k: complex) -> tuple[float, float]:
        z = (complex(k) - self.anchor) / self.direction
        return z.real, z.imag

    def point(self, t: float, h: float) -> complex:
        return self.anchor + self.direction * complex(t, h)


@dataclass(frozen=True)
class SurfaceGeometry:
    """
    Точки розгалуження разом із радіусами обходу та розрізами.

    `singularities` містить також відкинуті кандидати (без монодромії): біля
    них лише обмежується крок.
    """
    frame: Frame
    affixes: tuple[complex, ...] = ()
    radii: tuple[float, ...] = ()
    singularities: tuple[complex, ...] = ()

    @classmethod
    def build(cls, frame: Frame, affixes: Sequence[complex], singularities: Sequence[complex] = ()) -> SurfaceGeometry:
        affixes = tuple(complex(a) for a in affixes)
        points = tuple(dict.fromkeys((*affixes, *(complex(s) for s in singularities))))
        radii = []
        for affix in affixes:
            others = [abs(affix - p) for p in points if p != affix]
            nearest = min(others) if others else math.inf
            radii.append(0.25 * min(nearest, abs(frame.coords(affix)[1])))
        return cls(frame, affixes, tuple(radii), points)

    def side(self, index: int) -> int:
        return 1 if self.frame.coords(self.affixes[index])[1] > 0 else -1

    def _violation(self, k: complex, clearance: float) -> str:
        t, h = self.frame.coords(k)
        for affix, radius in zip(self.affixes, self.radii):
            margin = max(radius, clearance)
            if abs(k - affix) < margin:
                return f"k={k} lies within {margin:.3g} of branch affix {affix}"
            t_a, h_a = self.frame.coords(affix)
            if h * h_a > 0 and abs(h) > abs(h_a) - margin and abs(t - t_a) < margin:
                return f"k={k} lies within {margin:.3g} of the cut from {affix}"
        return ""

    def is_clear(self, k: complex, clearance: float = 0.0) -> bool:
        return not self._violation(complex(k), clearance)

    def check_clear(self, k: complex, clearance: float = 0.0) -> None:
        """
        :raises NearCutError: Якщо точка надто близько до розрізу або точки розгалуження.
        """
        problem = self._violation(complex(k), clearance)
        if problem:
            raise NearCutError(problem + "; perturb k")

    def _leg(self, t: float, h_to: float, skip: int = -1) -> list[complex]:
        """Перпендикулярна ділянка з прямокутними обходами точок, що лежать на ній."""
        sigma = 1.0 if h_to > 0 else -1.0
        blockers = []
        for index, (affix, radius) in enumerate(zip(self.affixes, self.radii)):
            if index == skip:
                continue
            t_a, h_a = self.frame.coords(affix)
            if h_a * sigma > 0 and abs(h_a) < abs(h_to) and abs(t_a - t) < radius:
                blockers.append((abs(h_a), t_a, h_a, radius))
        points = [self.frame.point(t, 0.0)]
        for _, t_a, h_a, radius in sorted(blockers):
            points += [
                self.frame.point(t, h_a - sigma * radius),
                self.frame.point(t_a + radius, h_a - sigma * radius),
                self.frame.point(t_a + radius, h_a + sigma * radius),
                self.frame.point(t, h_a + sigma * radius),
            ]
        points.append(self.frame.point(t, h_to))
        return points

    def transport_path(self, k: complex) -> PathSpec:
        """Шлях від k_anchor до k, що не перетинає розрізів."""
        self.check_clear(k)
        t, h = self.frame.coords(k)
        return PathSpec.polyline([self.frame.anchor, self.frame.point(t, 0.0), complex(k)])

    def loop_path(self, index: int, fraction: float = 1.0) -> tuple[PathSpec, PathSpec]:
        """
        Обхід точки розгалуження в додатному напрямку.

        :return: (шлях від anchor до базової точки, коло навколо точки).
        """
        affix = self.affixes[index]
        radius = self.radii[index] * fraction
        t_a, h_a = self.frame.coords(affix)
        sigma = 1.0 if h_a > 0 else -1.0
        out = PathSpec.polyline([self.frame.anchor, *self._leg(t_a, h_a - sigma * radius, skip=index)])
        theta0 = -sigma * math.pi / 2 - self.frame.tilt
        circle = PathSpec((Arc(affix, radius, theta0, theta0 + 2 * math.pi),))
        return out, circle


# ==========================================================
#                   ВІДСТЕЖЕННЯ РАДИКАЛІВ
# ==========================================================

class Tracker:
    """
    Адаптивне відстеження значень радикалів (предиктор - попереднє значення,
    коректор - вибір ближчого з двох коренів).
    """

    def __init__(self, program: Program, singularities: Sequence[complex] = (),
                 min_steps: int = 64, max_jump: float = 0.5):
        self.program = program
        self.singularities = np.asarray(singularities, dtype=complex)
        self.min_steps = min_steps
        self.max_jump = max_jump

    def _step(self, k: complex, previous: np.ndarray):
        jump = 0.0
        ambiguous = False

        def closest(j, radicand):
            nonlocal jump, ambiguous
            root = principal_sqrt(radicand)
            before = previous[:, j]
            d_plus = np.abs(root - before)
            d_minus = np.abs(root + before)
            chosen = np.where(d_plus <= d_minus, root, -root)
            if np.any((np.abs(d_plus - d_minus) <= 1e-13 * (d_plus + d_minus)) & (np.abs(root) > 0)):
                ambiguous = True
            scale = np.maximum(np.abs(before), 1e-300)
            jump = max(jump, float(np.max(np.abs(chosen - before) / scale)))
            return chosen

        values = self.program.radical_values(k, closest, previous.shape[0])
        return values, jump, ambiguous

    def _cap(self, k: complex, length: float) -> float:
        if self.singularities.size == 0:
            return 1.0
        return 0.5 * float(np.min(np.abs(self.singularities - k))) / length

    def track(self, path: PathSpec, radicals: np.ndarray) -> np.ndarray:
        """
        Веде значення радикалів уздовж шляху.

        :param radicals: Початкові значення, форма (batch, len(tower)).
        :raises TrackingError: Крок став меншим за 1e-12 довжини шляху.
        :return: Значення в кінці шляху.
        """
        values = np.array(np.atleast_2d(radicals), dtype=complex)
        if values.shape[1] == 0:
            return values
        floor = 1e-12 * max(path.length, 1e-300)
        for number, segment in enumerate(path.segments):
            length = segment.length
            if length == 0:
                continue
            if segment.sweep:
                pieces = max(4, math.ceil(self.min_steps * segment.sweep / (2 * math.pi)))
            else:
                pieces = 16
            largest = 1.0 / pieces if segment.sweep else 0.25
            s, h = 0.0, 1.0 / pieces
            while 1.0 - s > 1e-15:
                cap = self._cap(segment.at(s), length)
                if cap * length < floor and cap < 1.0 - s:
                    raise TrackingError(f"path runs into a singular point on segment {number} near k={segment.at(s)}")
                h = min(h, 1.0 - s, largest, cap)
                candidate, jump, ambiguous = self._step(segment.at(s + h), values)
                if jump > self.max_jump or ambiguous:
                    h *= 0.5
                    if h * length < floor:
                        reason = "ambiguous branch choice" if ambiguous else "step underflow"
                        raise TrackingError(
                            f"{reason} on segment {number} near k={segment.at(s)}; perturb the path"
                        )
                    continue
                values = candidate
                s += h
                h *= 1.5
        return values


def _radical_program(target: Union[Expression, MatrixFunction]) -> Program:
    if isinstance(target, MatrixFunction):
        return target.radical_program
    return Program(target.tower)


def continue_value(
        target: Union[Expression, MatrixFunction],
        path: PathSpec,
        start_branches: Sequence[int],
        singularities: Sequence[complex] = (),
        min_steps: int = 64,
):
    """
    Продовжує вираз або матрицю вздовж шляху.

    :param target: Expression або MatrixFunction.
    :param path: Шлях, що оминає точки розгалуження.
    :param start_branches: Знаки радикалів у початковій точці шляху.
    :raises TrackingError: Якщо відстеження не вдалося.
    :return: (значення в кінці шляху, знаки листа в кінці шляху).
    """
    program = _radical_program(target)
    signs = np.atleast_2d(np.asarray(start_branches, dtype=int))
    start = program.radical_values(path.start, sign_rule(signs))
    end = Tracker(program, singularities, min_steps).track(path, start)
    assignment = tuple(int(sign) for sign in identify_signs(program, path.end, end)[0])
    if isinstance(target, MatrixFunction):
        return target.values(path.end, end)[0], assignment
    return complex(target.program.root_values(path.end, fixed_rule(end))[0, 0]), assignment


def anchor_radicals(G: MatrixFunction, atlas: SheetAtlas) -> np.ndarray:
    """Значення радикалів усіх листів атласу в точці k_anchor."""
    signs = np.array(atlas.sheets, dtype=int).reshape(len(atlas.sheets), len(G.tower))
    return G.radical_program.radical_values(atlas.geometry.frame.anchor, sign_rule(signs), len(atlas.sheets))


SHEET_CACHE_SIZE = 512


def _sheet_values(G: MatrixFunction, atlas: SheetAtlas, k: complex) -> np.ndarray:
    cache = atlas.value_cache
    key = (G, k)
    if key not in cache:
        if len(cache) >= SHEET_CACHE_SIZE:
            cache.pop(next(iter(cache)))
        path = atlas.geometry.transport_path(k)
        tracker = Tracker(G.radical_program, atlas.geometry.singularities, atlas.min_steps)
        cache[key] = G.values(k, tracker.track(path, anchor_radicals(G, atlas)))
    return cache[key]


def sheet_values(G: MatrixFunction, atlas: SheetAtlas, k: complex) -> np.ndarray:
    """
    Значення G на всіх листах атласу в точці k; форма (sheets, N, N).

    :raises NearCutError: Якщо k надто близько до розрізу.
    """
    return _sheet_values(G, atlas, complex(k)).copy()


def value_on_sheet(G: MatrixFunction, k: complex, w: Word, atlas: SheetAtlas) -> np.ndarray:
    """
    Значення G(k){w}: лист визначається словом через перестановки атласу.

    :raises NearCutError: Якщо k лежить біля розрізу.
    :return: Матриця N x N.
    """
    return sheet_values(G, atlas, k)[atlas.sheet_of(w)]


def track_loop(G: MatrixFunction, atlas: SheetAtlas, index: int, fraction: float = 1.0):
    """
    Веде всі листи атласу до базової точки обходу і навколо точки розгалуження.

    :return: (базова точка, радикали до обходу, радикали після обходу).
    """
    out, circle = atlas.geometry.loop_path(index, fraction)
    tracker = Tracker(G.radical_program, atlas.geometry.singularities, atlas.min_steps)
    before = tracker.track(out, anchor_radicals(G, atlas))
    after = tracker.track(circle, before)
    return out.end, before, after


# ==========================================================
#              ЛАНЦЮЖКИ ПРОДОВЖЕННЯ ТА МАТРИЦІ ОБХОДУ
# ==========================================================

@dataclass(frozen=True)
class ChainFactor:
    word: Word
    inverted: bool = False

    def __str__(self):
        return f"G^-1{{{self.word}}}" if self.inverted else f"G{{{self.word}}}"


@dataclass(frozen=True)
class ContinuationChain:
    """
    Розгорнута права частина формул продовження.

    plus: Q+{w} = [factors] Q+{e};  minus: Q-{w} = Q-{e} [factors].
    """
    side: Side
    factors: tuple[ChainFactor, ...] = ()

    def shifted(self, v: Word, orders: AffixOrders) -> ContinuationChain:
        """Продовження кожного множника вздовж v: G{u} -> G{uv}."""
        return ContinuationChain(
            self.side,
            tuple(ChainFactor(compose(f.word, v, orders), f.inverted) for f in self.factors),
        )

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return " ".join(str(f) for f in self.factors) if self.factors else "I"


def qplus_chain(w: Word) -> ContinuationChain:
    """
    Q+{w} = G{w+} G^-1{w+-} Q+{w+-}, повторено до e.

    Пара G{e} G^-1{e} скорочується, тому для w з W_a ланцюжок порожній.
    """
    factors: list[ChainFactor] = []
    current = w
    while not current.is_identity:
        plus = truncate(current, Side.PLUS)
        plus_minus = truncate(plus, Side.MINUS)
        if plus != plus_minus:
            factors += [ChainFactor(plus), ChainFactor(plus_minus, inverted=True)]
        current = plus_minus
    return ContinuationChain(Side.PLUS, tuple(factors))


def qminus_chain(w: Word) -> ContinuationChain:
    """Дзеркальна формула: Q-{w} = Q-{w-+} G^-1{w-+} G{w-}."""
    factors: list[ChainFactor] = []
    current = w
    while not current.is_identity:
        minus = truncate(current, Side.MINUS)
        minus_plus = truncate(minus, Side.PLUS)
        if minus != minus_plus:
            factors = [ChainFactor(minus_plus, inverted=True), ChainFactor(minus)] + factors
        current = minus_plus
    return ContinuationChain(Side.MINUS, tuple(factors))


def safe_inverse(matrix: np.ndarray) -> np.ndarray:
    """
    Обернена матриця з перевіркою виродженості (|det| < 1e-12 від оцінки Адамара).

    :raises SingularSampleError: Якщо матриця майже вироджена.
    """
    scale = float(np.prod(np.linalg.norm(matrix, axis=0)))
    if scale == 0 or abs(np.linalg.det(matrix)) < 1e-12 * scale:
        raise SingularSampleError("singular factor at this sample; resample k")
    return np.linalg.inv(matrix)


def chain_value(chain: ContinuationChain, stack: np.ndarray, atlas: SheetAtlas) -> np.ndarray:
    """Добуток множників ланцюжка за значеннями листів `stack`."""
    size = stack.shape[-1]
    result = np.eye(size, dtype=complex)
    for factor in chain.factors:
        value = stack[atlas.sheet_of(factor.word)]
        result = result @ (safe_inverse(value) if factor.inverted else value)
    return result


def bypass_matrix(G: MatrixFunction, w: Word, k: complex, atlas: SheetAtlas) -> np.ndarray:
    """
    Матриця обходу P_w(k) = Q+{w} (Q+{e})^-1 як скінченний добуток значень G.

    :raises SingularSampleError: Якщо обернений множник вироджений у k.
    """
    return chain_value(qplus_chain(w), sheet_values(G, atlas, k), atlas)


def chain_cocycle_residual(G: MatrixFunction, atlas: SheetAtlas, w: Word, v: Word, k: complex) -> float:
    """
    Відносна розбіжність P_{wv} та (P_w, продовжена вздовж v) * P_v.
    """
    stack = sheet_values(G, atlas, k)
    left = chain_value(qplus_chain(compose(w, v, atlas.orders)), stack, atlas)
    right = chain_value(qplus_chain(w).shifted(v, atlas.orders), stack, atlas) @ \
        chain_value(qplus_chain(v), stack, atlas)
    return float(np.linalg.norm(left - right) / max(np.linalg.norm(left), 1e-300))


def basic_bypass_matrices(G: MatrixFunction, atlas: SheetAtlas, k: complex) -> list[np.ndarray]:
    """
    Базові матриці обходу G{w_j} G^-1{e} для найкоротших слів з W_b.

    :raises StructuralError: Якщо поверхня не збалансована.
    :raises SingularSampleError: Якщо G{e}(k) вироджена.
    :return: n - 1 матриць у порядку номерів листів.
    """
    if not atlas.balance().balanced:
        raise StructuralError("basic bypass set undefined: surface is not balanced", stage="bypass")
    stack = sheet_values(G, atlas, k)
    inverse = safe_inverse(stack[atlas.physical])
    return [stack[sheet] @ inverse for sheet, _ in atlas.basic_words()]
