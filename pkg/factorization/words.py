"""
Слова обходів: літери a_i (обхід верхньої точки розгалуження) та b_i (нижньої)
зі співвідношеннями a_i^{n_i} = e.

Слова завжди зберігаються в нормальній формі: сусідні літери мають різні
(півплощина, індекс), показники зведені до 1..n-1. Від'ємні обходи
записуються через показник n-1, окремих символів a_i^{-1} немає.
Текстовий запис: `a1 a2 b1^2` (індекси з одиниці), `e` для порожнього слова.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .exceptions import ProblemSpecError


class Hemisphere(str, Enum):
    UPPER = "a"
    LOWER = "b"


class Side(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class Letter:
    """Один обхід: півплощина, індекс точки (з нуля) та показник."""
    hemisphere: Hemisphere
    index: int
    exponent: int = 1

    @property
    def generator(self) -> tuple[Hemisphere, int]:
        return self.hemisphere, self.index

    def sort_key(self) -> tuple[int, int, int]:
        return (0 if self.hemisphere is Hemisphere.UPPER else 1, self.index, self.exponent)

    def __str__(self):
        text = f"{self.hemisphere.value}{self.index + 1}"
        return text if self.exponent == 1 else f"{text}^{self.exponent}"


@dataclass(frozen=True)
class AffixOrders:
    """Порядки n+_i верхніх та n-_i нижніх точок розгалуження."""
    upper: tuple[int, ...] = ()
    lower: tuple[int, ...] = ()

    def __post_init__(self):
        if any(n < 1 for n in (*self.upper, *self.lower)):
            raise ValueError("affix orders must be positive")

    def order(self, hemisphere: Hemisphere, index: int) -> int:
        orders = self.upper if hemisphere is Hemisphere.UPPER else self.lower
        if not 0 <= index < len(orders):
            raise ValueError(f"no {hemisphere.value}{index + 1} affix in this atlas")
        return orders[index]

    def generators(self) -> list[Letter]:
        """Усі літери з показником 1 у порядку a1 < a2 < ... < b1 < ..."""
        return [Letter(Hemisphere.UPPER, i) for i in range(len(self.upper))] + \
            [Letter(Hemisphere.LOWER, i) for i in range(len(self.lower))]


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    @classmethod
    def identity(cls) -> Word:
        return cls()

    @classmethod
    def parse(cls, text: str, orders: AffixOrders) -> Word:
        """
        Розбирає запис `a1 a2 b1^2` і нормалізує його.

        :raises ProblemSpecError: Якщо літера не відповідає синтаксису.
        """
        letters = []
        for item in text.split():
            if item == "e":
                continue
            match = re.fullmatch(r"([ab])(\d+)(?:\^(-?\d+))?", item)
            if match is None or int(match.group(2)) < 1:
                raise ProblemSpecError(f"bad bypass letter '{item}'")
            exponent = int(match.group(3)) if match.group(3) else 1
            letters.append(Letter(Hemisphere(match.group(1)), int(match.group(2)) - 1, exponent))
        return normalize(letters, orders)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return " ".join(str(letter) for letter in self.letters) if self.letters else "e"

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def lies_in(self, hemisphere: Hemisphere) -> bool:
        """Чи належить слово до W_a (UPPER) або W_b (LOWER)."""
        return all(letter.hemisphere is hemisphere for letter in self.letters)


def normalize(letters: Iterable[Letter], orders: AffixOrders) -> Word:
    """Скорочення стеком: об'єднує сусідні однакові генератори за модулем n_i."""
    stack: list[Letter] = []
    for letter in letters:
        n = orders.order(letter.hemisphere, letter.index)
        exponent = letter.exponent % n
        if exponent == 0:
            continue
        if stack and stack[-1].generator == letter.generator:
            exponent = (stack.pop().exponent + exponent) % n
            if exponent == 0:
                continue
        stack.append(Letter(letter.hemisphere, letter.index, exponent))
    return Word(tuple(stack))


def compose(w: Word, v: Word, orders: AffixOrders) -> Word:
    """
    Композиція wv: спочатку обходи w, потім v.

    :return: Нормалізоване слово.
    :rtype: Word
    """
    return normalize((*w.letters, *v.letters), orders)


def invert(w: Word, orders: AffixOrders) -> Word:
    """Обернене слово: зворотний порядок, показник x замінюється на n - x."""
    return normalize(
        (Letter(letter.hemisphere, letter.index, orders.order(*letter.generator) - letter.exponent)
         for letter in reversed(w.letters)),
        orders,
    )


def truncate(w: Word, side: Side) -> Word:
    """
    Оператори усікання.

    plus відкидає найдовший початковий відрізок з W_a, minus - з W_b.
    """
    dropped = Hemisphere.UPPER if side is Side.PLUS else Hemisphere.LOWER
    cut = 0
    while cut < len(w.letters) and w.letters[cut].hemisphere is dropped:
        cut += 1
    return Word(w.letters[cut:])


def other(side: Side) -> Side:
    return Side.MINUS if side is Side.PLUS else Side.PLUS


def truncation_chain(w: Word, start: Side = Side.PLUS) -> list[Word]:
    """
    Послідовність w, w+, w+-, ... до e; тотожні усікання пропускаються.

    Кожне нетривіальне усікання скорочує слово, тому ланцюжок скінченний.
    """
    chain = [w]
    side = start
    while not chain[-1].is_identity:
        nxt = truncate(chain[-1], side)
        if nxt != chain[-1]:
            chain.append(nxt)
        side = other(side)
    return chain
