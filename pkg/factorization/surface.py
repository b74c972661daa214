"""
Ріманова поверхня матриці G: точки розгалуження, листи та монодромія.

Кандидати в точки розгалуження - нулі та полюси підкореневих виразів після
виключення внутрішніх радикалів (добуток по обох знаках кожного внутрішнього
кореня, sympy). Справжні точки розгалуження відбираються за монодромією:
кандидат, обхід навколо якого не переставляє жодного листа, відкидається.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import sympy
from numpy.polynomial import polynomial as P

from .conf import get_defaults
from .continuation import Frame, SurfaceGeometry, Tracker, anchor_radicals
from .exceptions import DegenerateInputError, EvaluationError, TrackingError, UnsupportedSurfaceError
from .expr import BranchAssignment, Expression, Kind, MatrixFunction, Program, format_complex, identify_signs, sign_rule
from .words import AffixOrders, Hemisphere, Letter, Word, compose

logger = logging.getLogger(__name__)

# кратний корінь після np.roots розпадається на відстань порядку sqrt(eps)
ROOT_MERGE_FLOOR = 1e-6


# ==========================================================
#                  ПЕРЕСТАНОВКИ ТА АТЛАС
# ==========================================================

@dataclass(frozen=True)
class SheetPermutation:
    """Перестановка листів: images[s] - лист після обходу з листа s."""
    images: tuple[int, ...]

    def __call__(self, sheet: int) -> int:
        return self.images[sheet]

    def __len__(self):
        return len(self.images)

    def then(self, other: SheetPermutation) -> SheetPermutation:
        """Спочатку self, потім other."""
        return SheetPermutation(tuple(other(image) for image in self.images))

    def power(self, exponent: int) -> SheetPermutation:
        result = SheetPermutation(tuple(range(len(self))))
        for _ in range(exponent % max(self.order, 1)):
            result = result.then(self)
        return result

    def inverse(self) -> SheetPermutation:
        images = [0] * len(self)
        for sheet, image in enumerate(self.images):
            images[image] = sheet
        return SheetPermutation(tuple(images))

    def cycles(self) -> list[tuple[int, ...]]:
        """Нетривіальні цикли, кожен починається з найменшого листа."""
        seen, result = set(), []
        for start in range(len(self)):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            current = self(start)
            while current != start:
                cycle.append(current)
                seen.add(current)
                current = self(current)
            if len(cycle) > 1:
                result.append(tuple(cycle))
        return result

    @property
    def order(self) -> int:
        return math.lcm(*(len(cycle) for cycle in self.cycles())) if self.cycles() else 1

    @property
    def is_identity(self) -> bool:
        return all(sheet == image for sheet, image in enumerate(self.images))

    def __str__(self):
        cycles = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles) if cycles else "()"


@dataclass(frozen=True)
class BranchAffix:
    """
    Точка розгалуження.

    `radicals` - номери радикалів вежі, чий виключений підкореневий вираз має
    тут нуль або полюс непарної кратності.
    """
    value: complex
    hemisphere: Hemisphere
    index: int
    order: int
    radicals: tuple[int, ...] = ()

    @property
    def letter(self) -> Letter:
        return Letter(self.hemisphere, self.index)

    @property
    def label(self) -> str:
        return str(self.letter)


@dataclass(frozen=True)
class BalanceVerdict:
    balanced: bool
    witness_sheet: Optional[int] = None
    unreachable_from: Optional[Hemisphere] = None
    upper_orbit: tuple[int, ...] = ()
    lower_orbit: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class SheetAtlas:
    """
    Листи поверхні (знаки радикалів на k_anchor), перестановки монодромії
    кожної точки розгалуження та найкоротші слова листів.
    """
    affixes: tuple[BranchAffix, ...]
    sheets: tuple[BranchAssignment, ...]
    permutations: tuple[SheetPermutation, ...]
    geometry: SurfaceGeometry
    min_steps: int = 64
    physical: int = 0
    candidates: tuple[complex, ...] = field(default=())

    @property
    def sheet_count(self) -> int:
        return len(self.sheets)

    @cached_property
    def value_cache(self) -> dict:
        """Значення G на листах у вже відвіданих точках; живе разом з атласом."""
        return {}

    @cached_property
    def orders(self) -> AffixOrders:
        return AffixOrders(
            tuple(a.order for a in self.affixes if a.hemisphere is Hemisphere.UPPER),
            tuple(a.order for a in self.affixes if a.hemisphere is Hemisphere.LOWER),
        )

    @cached_property
    def _positions(self) -> dict[tuple[Hemisphere, int], int]:
        return {affix.letter.generator: pos for pos, affix in enumerate(self.affixes)}

    def affix(self, hemisphere: Hemisphere, index: int) -> BranchAffix:
        return self.affixes[self._positions[(hemisphere, index)]]

    def letter_permutation(self, letter: Letter) -> SheetPermutation:
        return self.permutations[self._positions[letter.generator]].power(letter.exponent)

    def sheet_of(self, word: Word) -> int:
        """Лист, на який веде слово (обходи виконуються зліва направо)."""
        sheet = self.physical
        for letter in word:
            permutation = self.permutations[self._positions[letter.generator]]
            for _ in range(letter.exponent):
                sheet = permutation(sheet)
        return sheet

    def _letters(self, hemisphere: Optional[Hemisphere] = None) -> list[Letter]:
        letters = []
        for generator in self.orders.generators():
            if hemisphere is not None and generator.hemisphere is not hemisphere:
                continue
            n = self.orders.order(*generator.generator)
            letters += [Letter(generator.hemisphere, generator.index, m) for m in range(1, n)]
        return sorted(letters, key=Letter.sort_key)

    def shortest_words(self, hemisphere: Optional[Hemisphere] = None) -> dict[int, Word]:
        """
        Пошук у ширину: для кожного досяжного листа найкоротше слово,
        найменше лексикографічно (a1 < a2 < ... < b1 < ...).
        """
        words = {self.physical: Word()}
        queue = deque([self.physical])
        letters = self._letters(hemisphere)
        while queue:
            sheet = queue.popleft()
            word = words[sheet]
            for letter in letters:
                if word.letters and word.letters[-1].generator == letter.generator:
                    continue
                target = self.letter_permutation(letter)(sheet)
                if target not in words:
                    words[target] = compose(word, Word((letter,)), self.orders)
                    queue.append(target)
        return words

    @cached_property
    def words(self) -> tuple[Word, ...]:
        found = self.shortest_words()
        return tuple(found[sheet] for sheet in range(self.sheet_count))

    def balance(self) -> BalanceVerdict:
        upper = self.shortest_words(Hemisphere.UPPER)
        lower = self.shortest_words(Hemisphere.LOWER)
        for orbit, side in ((upper, Hemisphere.UPPER), (lower, Hemisphere.LOWER)):
            missing = [sheet for sheet in range(self.sheet_count) if sheet not in orbit]
            if missing:
                return BalanceVerdict(False, missing[0], side, tuple(sorted(upper)), tuple(sorted(lower)))
        return BalanceVerdict(True, None, None, tuple(sorted(upper)), tuple(sorted(lower)))

    def basic_words(self) -> list[tuple[int, Word]]:
        """Найкоротші слова з W_b для всіх нефізичних листів."""
        lower = self.shortest_words(Hemisphere.LOWER)
        return [(sheet, lower[sheet]) for sheet in range(self.sheet_count)
                if sheet != self.physical and sheet in lower]


# ==========================================================
#                  ВИКЛЮЧЕННЯ РАДИКАЛІВ
# ==========================================================

_K = sympy.Symbol("k")


def _number(z: complex):
    z = complex(z)
    return sympy.Rational(z.real) + sympy.I * sympy.Rational(z.imag)


def _sympy_table(program: Program) -> tuple[dict[int, sympy.Expr], list[sympy.Symbol]]:
    radicals = list(sympy.symbols(f"r0:{len(program.tower)}")) if program.tower else []
    positions = {node.uid: j for j, node in enumerate(program.tower)}
    table = {}
    for node in program.nodes:
        kind = node.kind
        args = [table[child.uid] for child in node.children]
        if kind is Kind.VARIABLE:
            table[node.uid] = _K
        elif kind is Kind.CONSTANT:
            table[node.uid] = _number(node.value)
        elif kind is Kind.ADD:
            table[node.uid] = args[0] + args[1]
        elif kind is Kind.SUB:
            table[node.uid] = args[0] - args[1]
        elif kind is Kind.MUL:
            table[node.uid] = args[0] * args[1]
        elif kind is Kind.DIV:
            table[node.uid] = args[0] / args[1]
        elif kind is Kind.NEG:
            table[node.uid] = -args[0]
        elif kind is Kind.POW:
            table[node.uid] = args[0] ** node.value
        else:
            table[node.uid] = radicals[positions[node.uid]]
    return table, radicals


def _even_part(expr: sympy.Expr, radical: sympy.Symbol, radicand: sympy.Expr) -> sympy.Expr:
    """Підставляє r^(2m) -> R^m у многочлен від r з лише парними степенями."""
    poly = sympy.Poly(sympy.expand(expr), radical)
    return sympy.expand(sum(
        (coeff.as_expr() * radicand ** (degree // 2) for (degree,), coeff in poly.terms()),
        sympy.Integer(0),
    ))


def _eliminate(expr: sympy.Expr, radical: sympy.Symbol, radicand: sympy.Expr) -> sympy.Expr:
    numerator, denominator = sympy.fraction(sympy.together(expr))
    parts = []
    for part in (numerator, denominator):
        if part.has(radical):
            part = _even_part(part * part.subs(radical, -radical), radical, radicand)
        else:
            part = part ** 2
        parts.append(part)
    return parts[0] / parts[1]


def _coefficients(expr: sympy.Expr) -> np.ndarray:
    expr = sympy.expand(expr)
    if not expr.has(_K):
        return np.array([complex(expr)], dtype=complex)
    coeffs = sympy.Poly(expr, _K).all_coeffs()
    return np.array([complex(c) for c in reversed(coeffs)], dtype=complex)


def elimination_polynomials(G: MatrixFunction) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Чисельник і знаменник підкореневого виразу кожного радикала після
    виключення внутрішніх радикалів; коефіцієнти за зростанням степеня k.

    :raises DegenerateInputError: Якщо підкореневий вираз тотожно нульовий.
    """
    program = G.radical_program
    table, radicals = _sympy_table(program)
    radicands = [table[node.radicand.uid] for node in program.tower]
    result = []
    for j, radicand in enumerate(radicands):
        expr = radicand
        for i in reversed(range(j)):
            if expr.has(radicals[i]):
                expr = _eliminate(expr, radicals[i], radicands[i])
        numerator, denominator = sympy.fraction(sympy.cancel(sympy.together(expr)))
        numerator_coeffs = _coefficients(numerator)
        if not np.any(numerator_coeffs):
            raise DegenerateInputError(f"radicand of {program.tower[j]} vanishes identically")
        result.append((numerator_coeffs, _coefficients(denominator)))
    return result


def _roots(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = np.abs(coeffs).max() if coeffs.size else 0.0
    if scale == 0:
        return np.zeros(0, dtype=complex)
    trimmed = np.trim_zeros(np.where(np.abs(coeffs) < 1e-13 * scale, 0, coeffs), "b")
    if trimmed.size < 2:
        return np.zeros(0, dtype=complex)
    roots = P.polyroots(trimmed)
    derivative = P.polyder(trimmed)
    for _ in range(3):
        slope = P.polyval(roots, derivative)
        step = np.where(slope != 0, P.polyval(roots, trimmed) / np.where(slope != 0, slope, 1), 0)
        roots = roots - step
    return roots


def _same_root(a: complex, b: complex, tol: float) -> bool:
    """Чи збігаються два корені: в межах tol або ROOT_MERGE_FLOOR відносно."""
    return abs(a - b) <= max(tol, ROOT_MERGE_FLOOR * (1 + abs(b)))


def _cluster(values: Sequence[complex], tol: float) -> list[tuple[complex, int]]:
    """Групує близькі корені; повертає (центр, кратність)."""
    groups: list[list[complex]] = []
    for value in sorted(values, key=lambda z: (z.real, z.imag)):
        for group in groups:
            if _same_root(group[0], value, tol):
                group.append(value)
                break
        else:
            groups.append([value])
    return [(complex(np.mean(group)), len(group)) for group in groups]


def _vanishes(radical: Expression, k: complex, tol: float) -> bool:
    """Чи обертається підкореневий вираз у нуль у точці k хоча б на одному листі."""
    program = radical.radicand.program
    count = len(program.tower)
    signs = np.array(list(itertools.product((1, -1), repeat=count)), dtype=int).reshape(2 ** count, count)
    try:
        values = program.root_values(k, sign_rule(signs), signs.shape[0])[:, 0]
    except EvaluationError:
        return False
    return float(np.min(np.abs(values))) < tol * max(1.0, float(np.max(np.abs(values))))


@dataclass(frozen=True)
class AffixCandidate:
    value: complex
    radicals: tuple[int, ...]


def affix_candidates(G: MatrixFunction, cluster_tol: float = 1e-9, verify_tol: float = 1e-7) -> list[AffixCandidate]:
    """
    Кандидати в точки розгалуження: перевірені нулі та полюси виключених
    підкореневих виразів, об'єднані в межах cluster_tol.
    """
    found: list[tuple[complex, int, int]] = []
    tower = G.radical_program.tower
    for j, (numerator, denominator) in enumerate(elimination_polynomials(G)):
        for value, multiplicity in _cluster(_roots(numerator), cluster_tol):
            if _vanishes(tower[j], value, verify_tol):
                found.append((value, j, multiplicity))
        for value, multiplicity in _cluster(_roots(denominator), cluster_tol):
            found.append((value, j, multiplicity))
    merged: list[list] = []
    for value, j, multiplicity in sorted(found, key=lambda item: (item[0].real, item[0].imag, item[1])):
        for entry in merged:
            if _same_root(entry[0], value, cluster_tol):
                entry[1].setdefault(j, 0)
                entry[1][j] += multiplicity
                break
        else:
            merged.append([value, {j: multiplicity}])
    candidates = [
        AffixCandidate(value, tuple(sorted(j for j, m in radicals.items() if m % 2)))
        for value, radicals in merged
    ]
    logger.debug("affix candidates: %s", ", ".join(format_complex(c.value) for c in candidates))
    return candidates


def find_branch_affixes(G: MatrixFunction, **options) -> tuple[BranchAffix, ...]:
    """
    Точки розгалуження з півплощиною, індексом і порядком.

    :raises UnsupportedSurfaceError: Точка розгалуження на прямій розділу або в k_anchor.
    :return: Спочатку верхні, потім нижні; всередині - за (Re, Im).
    """
    return build_atlas(G, **options).affixes


# ==========================================================
#                      ГЕОМЕТРІЯ РОЗРІЗІВ
# ==========================================================

def resolve_tilt(points: Sequence[complex], anchor: complex, option: Union[str, float] = "auto",
                 tol: float = 1e-7) -> float:
    """
    Кут нахилу прямої розділу.

    `auto`: 0, якщо жодна точка не лежить на дійсній осі; інакше пряма
    повертається за годинниковою стрілкою так, що додатні дійсні точки
    опиняються у верхній півплощині, а інші точки не змінюють півплощину.

    :raises UnsupportedSurfaceError: Точка в k_anchor або на прямій розділу.
    """
    relative = [complex(p) - anchor for p in points]
    for z in relative:
        if abs(z) <= tol:
            raise UnsupportedSurfaceError(f"branch affix at the anchor {format_complex(anchor)}; choose another anchor")
    if option != "auto":
        tilt = float(option)
    elif not any(abs(z.imag) <= tol * max(1.0, abs(z)) for z in relative):
        tilt = 0.0
    else:
        angles = [math.atan2(abs(z.imag), abs(z.real)) for z in relative if abs(z.imag) > tol * max(1.0, abs(z))]
        tilt = min(0.1, 0.5 * min(angles)) if angles else 0.1
    frame = Frame(anchor, tilt)
    for p in points:
        if abs(frame.coords(p)[1]) <= tol * max(1.0, abs(complex(p) - anchor)):
            raise UnsupportedSurfaceError(
                f"branch affix {format_complex(p)} lies on the separating line (tilt {tilt:g})"
            )
    return tilt


# ==========================================================
#                  ПОБУДОВА АТЛАСУ ЛИСТІВ
# ==========================================================

def _options(overrides: dict) -> dict:
    defaults = get_defaults()
    return {
        "min_steps": overrides.get("min_steps") or defaults["TRACKING_MIN_STEPS"],
        "cluster_tol": overrides.get("cluster_tol") or defaults["CLUSTER_TOL"],
        "verify_tol": overrides.get("verify_tol") or defaults["VERIFY_TOL"],
        "axis_tilt": overrides.get("axis_tilt") if overrides.get("axis_tilt") is not None else defaults["AXIS_TILT"],
    }


def _loop_images(G: MatrixFunction, geometry: SurfaceGeometry, index: int, signs: np.ndarray,
                 min_steps: int) -> np.ndarray:
    program = G.radical_program
    anchor = geometry.frame.anchor
    out, circle = geometry.loop_path(index)
    tracker = Tracker(program, geometry.singularities, min_steps)
    values = program.radical_values(anchor, sign_rule(signs), signs.shape[0])
    values = tracker.track(out.then(circle).then(out.reversed()), values)
    return identify_signs(program, anchor, values)


def build_atlas(G: MatrixFunction, **overrides) -> SheetAtlas:
    """
    Будує атлас листів: знаходить точки розгалуження, обходить кожну з усіх
    відомих листів і додає нові листи, доки множина не замкнеться.

    :param G: Матриця-функція.
    :param overrides: min_steps, cluster_tol, verify_tol, axis_tilt.
    :raises UnsupportedSurfaceError: Точка розгалуження на прямій розділу.
    :raises TrackingError: Відстеження не вдалося або монодромія не є перестановкою.
    :return: Атлас листів.
    :rtype: SheetAtlas
    """
    options = _options(overrides)
    candidates = affix_candidates(G, options["cluster_tol"], options["verify_tol"])
    values = [c.value for c in candidates]
    anchor = complex(G.anchor)
    tilt = resolve_tilt(values, anchor, options["axis_tilt"], options["verify_tol"])
    frame = Frame(anchor, tilt)
    geometry = SurfaceGeometry.build(frame, values, values)

    sheets: list[BranchAssignment] = [G.physical_signs()]
    index = {sheets[0]: 0}
    images: list[dict[int, int]] = [{} for _ in candidates]
    frontier = [0]
    while frontier:
        signs = np.array([sheets[s] for s in frontier], dtype=int).reshape(len(frontier), len(G.tower))
        discovered = []
        for c in range(len(candidates)):
            for sheet, end in zip(frontier, _loop_images(G, geometry, c, signs, options["min_steps"])):
                end = tuple(int(x) for x in end)
                if end not in index:
                    index[end] = len(sheets)
                    sheets.append(end)
                    discovered.append(index[end])
                images[c][sheet] = index[end]
        frontier = discovered

    permutations = []
    for c, mapping in enumerate(images):
        permutation = SheetPermutation(tuple(mapping[s] for s in range(len(sheets))))
        if sorted(permutation.images) != list(range(len(sheets))):
            raise TrackingError(f"monodromy around {format_complex(values[c])} is not a permutation")
        permutations.append(permutation)

    kept = [c for c, p in enumerate(permutations) if not p.is_identity]
    dropped = [format_complex(values[c]) for c in range(len(candidates)) if c not in kept]
    if dropped:
        logger.debug("candidates without monodromy dropped: %s", ", ".join(dropped))

    ordered = []
    for hemisphere, sign in ((Hemisphere.UPPER, 1), (Hemisphere.LOWER, -1)):
        side = sorted(
            (c for c in kept if (frame.coords(values[c])[1] > 0) == (sign > 0)),
            key=lambda c: (values[c].real, values[c].imag),
        )
        ordered += [(hemisphere, i, c) for i, c in enumerate(side)]

    affixes = tuple(
        BranchAffix(values[c], hemisphere, i, permutations[c].order, candidates[c].radicals)
        for hemisphere, i, c in ordered
    )
    atlas = SheetAtlas(
        affixes=affixes,
        sheets=tuple(sheets),
        permutations=tuple(permutations[c] for _, _, c in ordered),
        geometry=SurfaceGeometry.build(frame, [a.value for a in affixes], values),
        min_steps=options["min_steps"],
        candidates=tuple(values),
    )
    logger.info(
        "atlas: %d sheets, affixes %s",
        atlas.sheet_count,
        ", ".join(f"{a.label}={format_complex(a.value)}" for a in affixes) or "none",
    )
    return atlas


def monodromy_permutation(G: MatrixFunction, atlas: SheetAtlas, affix: BranchAffix,
                          direction: int = 1, fraction: float = 1.0) -> SheetPermutation:
    """
    Перестановка листів атласу під час обходу точки розгалуження.

    :param direction: +1 додатний обхід, -1 від'ємний.
    :param fraction: Частка радіуса обходу (результат від неї не залежить).
    :raises TrackingError: Якщо обхід приводить на лист поза атласом.
    """
    position = atlas.affixes.index(affix)
    out, circle = atlas.geometry.loop_path(position, fraction)
    tracker = Tracker(G.radical_program, atlas.geometry.singularities, atlas.min_steps)
    values = tracker.track(out.then(circle).then(out.reversed()), anchor_radicals(G, atlas))
    ends = identify_signs(G.radical_program, atlas.geometry.frame.anchor, values)
    lookup = {sheet: i for i, sheet in enumerate(atlas.sheets)}
    images = []
    for end in ends:
        end = tuple(int(x) for x in end)
        if end not in lookup:
            raise TrackingError(f"loop around {affix.label} leaves the atlas")
        images.append(lookup[end])
    permutation = SheetPermutation(tuple(images))
    return permutation if direction > 0 else permutation.inverse()


def sign_flip_permutation(G: MatrixFunction, atlas: SheetAtlas, affix: BranchAffix) -> SheetPermutation:
    """
    Монодромія для вежі без вкладених радикалів: обхід змінює знаки тих
    радикалів, чий підкореневий вираз має в точці нуль непарної кратності.

    :raises ValueError: Якщо вежа містить вкладені радикали.
    """
    if any(node.radicand.tower for node in G.tower):
        raise ValueError("sign-flip monodromy needs a tower without nested radicals")
    lookup = {sheet: i for i, sheet in enumerate(atlas.sheets)}
    images = []
    for sheet in atlas.sheets:
        flipped = tuple(-s if j in affix.radicals else s for j, s in enumerate(sheet))
        images.append(lookup[flipped])
    return SheetPermutation(tuple(images))


def is_balanced(G: MatrixFunction, atlas: SheetAtlas) -> BalanceVerdict:
    """
    Чи досяжний кожен лист з фізичного лише верхніми і лише нижніми обходами.

    :return: Вердикт зі свідком (лист і півплощина, з якої він недосяжний).
    """
    verdict = atlas.balance()
    if not verdict.balanced:
        logger.info(
            "surface is unbalanced: sheet %d unreachable by %s-loops",
            verdict.witness_sheet, verdict.unreachable_from.value,
        )
    return verdict


# ==========================================================
#                          ДІАГРАМА
# ==========================================================

def _columns(atlas: SheetAtlas) -> list[tuple[str, tuple[int, ...]]]:
    columns = []
    for affix, permutation in zip(atlas.affixes, atlas.permutations):
        columns += [(affix.label, cycle) for cycle in permutation.cycles()]
    return columns


def _sign_text(sheet: BranchAssignment) -> str:
    return "".join("+" if s > 0 else "-" for s in sheet) or "."


def render_text(atlas: SheetAtlas) -> str:
    """Листи - горизонтальні лінії, цикли монодромії - вертикальні з'єднання."""
    lines = [f"sheets: {atlas.sheet_count}, separating line tilt: {atlas.geometry.frame.tilt:g}"]
    for affix, permutation in zip(atlas.affixes, atlas.permutations):
        lines.append(f"  {affix.label:<4} k = {format_complex(affix.value):<20} order {affix.order}  {permutation}")
    columns = _columns(atlas)
    width = max(len(str(w)) for w in atlas.words) + 2
    prefix = " " * (5 + width)
    lines.append(prefix + "".join(f"{label:^5}" for label, _ in columns))
    for sheet in range(atlas.sheet_count):
        cells, links = [], []
        for _, cycle in columns:
            low, high = min(cycle), max(cycle)
            if sheet in cycle:
                cells.append("--+--")
            elif low < sheet < high:
                cells.append("--|--")
            else:
                cells.append("-----")
            links.append("  |  " if low <= sheet < high else "     ")
        label = f"{sheet:>3}  {str(atlas.words[sheet]):<{width}}"
        lines.append(label + "".join(cells) + f"  [{_sign_text(atlas.sheets[sheet])}]")
        if sheet + 1 < atlas.sheet_count:
            lines.append(prefix + "".join(links).rstrip())
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render_dot(atlas: SheetAtlas) -> str:
    """Та сама діаграма у форматі Graphviz."""
    columns = _columns(atlas)
    lines = ["graph riemann_surface {", "  rankdir=LR;", "  node [shape=point];"]
    for sheet in range(atlas.sheet_count):
        chain = [f'"s{sheet}"'] + [f'"s{sheet}_c{c}"' for c in range(len(columns))] + [f'"s{sheet}_end"']
        lines.append(f'  "s{sheet}" [shape=plaintext, label="{sheet}: {atlas.words[sheet]}"];')
        lines.append(f'  "s{sheet}_end" [shape=plaintext, label="{_sign_text(atlas.sheets[sheet])}"];')
        lines.append("  " + " -- ".join(chain) + " [penwidth=2];")
    for c, (label, cycle) in enumerate(columns):
        ring = cycle + (cycle[0],) if len(cycle) > 2 else cycle
        for a, b in zip(ring, ring[1:]):
            lines.append(f'  "s{a}_c{c}" -- "s{b}_c{c}" [style=dashed, label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_diagram(atlas: SheetAtlas, fmt: str = "text") -> str:
    if fmt == "dot":
        return render_dot(atlas)
    if fmt == "text":
        return render_text(atlas)
    raise ValueError(f"unknown diagram format '{fmt}'")
