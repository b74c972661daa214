import numpy as np
from django.test import SimpleTestCase

from factorization.exceptions import ProblemSpecError
from factorization.words import (
    AffixOrders,
    Hemisphere,
    Letter,
    Side,
    Word,
    compose,
    invert,
    normalize,
    truncate,
    truncation_chain,
)

TWO_BY_TWO = AffixOrders(upper=(2, 2), lower=(2, 2))
CUBIC = AffixOrders(upper=(3,), lower=(3,))
CUBIC_PAIR = AffixOrders(upper=(3, 2), lower=(2, 3))


def word(text: str, orders: AffixOrders = TWO_BY_TWO) -> Word:
    return Word.parse(text, orders)


class TruncationTests(SimpleTestCase):
    """Усікання з відомими значеннями для слів a1a2b1b2 та b1b2a1a2."""

    def test_plus_drops_upper_prefix(self):
        w = word("a1 a2 b1 b2")
        self.assertEqual(str(truncate(w, Side.PLUS)), "b1 b2")

    def test_minus_keeps_word_starting_with_upper_letter(self):
        w = word("a1 a2 b1 b2")
        self.assertEqual(truncate(w, Side.MINUS), w)

    def test_plus_then_minus_reaches_identity(self):
        w = word("a1 a2 b1 b2")
        self.assertTrue(truncate(truncate(w, Side.PLUS), Side.MINUS).is_identity)

    def test_mirrored_word(self):
        v = word("b1 b2 a1 a2")
        minus = truncate(v, Side.MINUS)
        self.assertEqual(str(minus), "a1 a2")
        self.assertTrue(truncate(minus, Side.PLUS).is_identity)

    def test_truncation_chain(self):
        chain = truncation_chain(word("a1 a2 b1 b2"))
        self.assertEqual([str(w) for w in chain], ["a1 a2 b1 b2", "b1 b2", "e"])

    def test_chain_skips_identity_truncations(self):
        chain = truncation_chain(word("b1 a1"))
        self.assertEqual([str(w) for w in chain], ["b1 a1", "a1", "e"])

    def test_truncating_identity(self):
        self.assertTrue(truncate(Word.identity(), Side.PLUS).is_identity)


class NormalFormTests(SimpleTestCase):

    def test_powers_reduce_modulo_order(self):
        self.assertTrue(word("a1 a1").is_identity)
        self.assertEqual(str(word("a1 a1", CUBIC)), "a1^2")
        self.assertEqual(str(word("b1^4", CUBIC)), "b1")

    def test_cancellation_cascades(self):
        self.assertEqual(str(word("a1 b1 b1 a1 a2")), "a2")

    def test_negative_exponent(self):
        self.assertEqual(str(word("a1^-1", CUBIC)), "a1^2")

    def test_compose_and_invert(self):
        w = word("a1 b1^2", CUBIC)
        inverse = invert(w, CUBIC)
        self.assertEqual(str(inverse), "b1 a1^2")
        self.assertTrue(compose(w, inverse, CUBIC).is_identity)
        self.assertTrue(compose(inverse, w, CUBIC).is_identity)

    def test_normalize_letters(self):
        letters = [Letter(Hemisphere.UPPER, 0), Letter(Hemisphere.UPPER, 0, 2), Letter(Hemisphere.LOWER, 0)]
        self.assertEqual(str(normalize(letters, CUBIC)), "b1")

    def test_hemisphere_membership(self):
        self.assertTrue(word("a1 a2").lies_in(Hemisphere.UPPER))
        self.assertFalse(word("a1 b2").lies_in(Hemisphere.UPPER))
        self.assertTrue(Word.identity().lies_in(Hemisphere.LOWER))

    def test_identity_text(self):
        self.assertEqual(str(word("e")), "e")
        self.assertEqual(len(word("a1 b1 a2")), 3)


class WordAlgebraTests(SimpleTestCase):
    """Властивості нормальної форми та усікань на випадкових словах."""

    def setUp(self):
        self.rng = np.random.default_rng(17)
        self.generators = CUBIC_PAIR.generators()

    def random_letters(self, length):
        return [
            Letter(g.hemisphere, g.index, int(self.rng.integers(-3, 4)))
            for g in (self.generators[i] for i in self.rng.integers(0, len(self.generators), length))
        ]

    def random_word(self, max_length=12):
        return normalize(self.random_letters(int(self.rng.integers(0, max_length + 1))), CUBIC_PAIR)

    def test_normal_form_does_not_depend_on_grouping(self):
        for _ in range(200):
            letters = self.random_letters(int(self.rng.integers(0, 13)))
            cut = int(self.rng.integers(0, len(letters) + 1))
            left, right = normalize(letters[:cut], CUBIC_PAIR), normalize(letters[cut:], CUBIC_PAIR)
            with self.subTest(letters=[str(letter) for letter in letters], cut=cut):
                self.assertEqual(compose(left, right, CUBIC_PAIR), normalize(letters, CUBIC_PAIR))

    def test_normal_form_is_fixed_point(self):
        for _ in range(100):
            w = self.random_word()
            self.assertEqual(normalize(w.letters, CUBIC_PAIR), w)

    def test_truncation_is_idempotent(self):
        for _ in range(100):
            w = self.random_word()
            for side in (Side.PLUS, Side.MINUS):
                once = truncate(w, side)
                self.assertEqual(truncate(once, side), once)

    def test_alternating_truncation_terminates(self):
        for _ in range(100):
            w = self.random_word(12)
            for start in (Side.PLUS, Side.MINUS):
                chain = truncation_chain(w, start)
                self.assertTrue(chain[-1].is_identity)
                self.assertLessEqual(len(chain), len(w) + 1)
                lengths = [len(v) for v in chain]
                self.assertEqual(lengths, sorted(lengths, reverse=True))

    def test_inverse_is_involution_and_reverses_products(self):
        for _ in range(100):
            w, v = self.random_word(6), self.random_word(6)
            self.assertEqual(invert(invert(w, CUBIC_PAIR), CUBIC_PAIR), w)
            self.assertEqual(
                invert(compose(w, v, CUBIC_PAIR), CUBIC_PAIR),
                compose(invert(v, CUBIC_PAIR), invert(w, CUBIC_PAIR), CUBIC_PAIR),
            )

    def test_minus_first_chain(self):
        chain = truncation_chain(word("b1 b2 a1 a2"), Side.MINUS)
        self.assertEqual([str(w) for w in chain], ["b1 b2 a1 a2", "a1 a2", "e"])


class ParseErrorsTests(SimpleTestCase):

    def test_bad_letter(self):
        with self.assertRaises(ProblemSpecError):
            word("c1")

    def test_zero_index(self):
        with self.assertRaises(ProblemSpecError):
            word("a0")

    def test_unknown_affix(self):
        with self.assertRaises(ValueError):
            word("a3")
