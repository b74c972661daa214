import math

import numpy as np
from django.test import SimpleTestCase

from factorization.classify import sample_stream
from factorization.continuation import (
    Arc,
    Frame,
    PathSpec,
    SurfaceGeometry,
    Tracker,
    basic_bypass_matrices,
    bypass_matrix,
    chain_cocycle_residual,
    continue_value,
    qminus_chain,
    qplus_chain,
    sheet_values,
    value_on_sheet,
)
from factorization.exceptions import NearCutError, StructuralError, TrackingError
from factorization.expr import evaluate_matrix, parse_expression
from factorization.ratrecon import verify_single_valued
from factorization.surface import build_atlas
from factorization.words import AffixOrders, Word, normalize

from . import corpus

ORDERS = AffixOrders(upper=(2, 2), lower=(2, 2))


class PathTests(SimpleTestCase):

    def test_polyline_and_reverse(self):
        path = PathSpec.polyline([0, 1, 1 + 1j])
        self.assertEqual(path.start, 0)
        self.assertEqual(path.end, 1 + 1j)
        self.assertAlmostEqual(path.length, 2.0)
        self.assertEqual(path.reversed().start, 1 + 1j)

    def test_frame_coordinates(self):
        frame = Frame(anchor=1, tilt=0.0)
        self.assertEqual(frame.coords(3 + 2j), (2.0, 2.0))
        self.assertAlmostEqual(frame.point(2.0, 2.0), 3 + 2j)

    def test_transport_path_is_l_shaped(self):
        geometry = SurfaceGeometry.build(Frame(), [1j, -1j])
        path = geometry.transport_path(2 + 0.5j)
        self.assertEqual([s.at(1.0) for s in path.segments], [2, 2 + 0.5j])

    def test_points_near_cuts_are_rejected(self):
        geometry = SurfaceGeometry.build(Frame(), [1j, -1j])
        with self.assertRaises(NearCutError):
            geometry.transport_path(3j)
        self.assertTrue(geometry.is_clear(0.5 + 3j))

    def test_loop_starts_below_the_affix(self):
        geometry = SurfaceGeometry.build(Frame(), [1j, -1j])
        out, circle = geometry.loop_path(0)
        radius = geometry.radii[0]
        self.assertAlmostEqual(out.end, 1j - radius * 1j)
        self.assertAlmostEqual(circle.start, out.end)
        self.assertAlmostEqual(circle.end, out.end)


class TrackerTests(SimpleTestCase):

    def setUp(self):
        self.expr = parse_expression("sqrt(k)")
        self.program = self.expr.program

    def loop(self, center, radius=1.0):
        return PathSpec((Arc(center, radius, 0.0, 2 * math.pi),))

    def test_loop_around_branch_point_flips_sign(self):
        start = np.array([[1.0 + 0j]])
        end = Tracker(self.program, [0j]).track(self.loop(0), start)
        self.assertAlmostEqual(complex(end[0, 0]), -1)

    def test_loop_away_from_branch_point_returns(self):
        start = np.array([[1.0 + 0j]])
        path = PathSpec((Arc(2, 1.0, math.pi, 3 * math.pi),))
        end = Tracker(self.program, [0j]).track(path, start)
        self.assertAlmostEqual(complex(end[0, 0]), 1)

    def test_continue_value_reports_end_sheet(self):
        path = PathSpec.polyline([1, 1j]).then(PathSpec.polyline([1j, -1, -1j, 1]))
        value, signs = continue_value(self.expr, path, (1,), singularities=[0j])
        self.assertAlmostEqual(value, -1)
        self.assertEqual(signs, (-1,))

    def test_underflow_raises(self):
        path = PathSpec.polyline([-1, 1])
        with self.assertRaises(TrackingError):
            Tracker(self.program, [0j]).track(path, np.array([[1j]]))


class ContinuationChainTests(SimpleTestCase):

    def chain(self, text):
        return str(qplus_chain(Word.parse(text, ORDERS)))

    def test_upper_words_have_empty_chain(self):
        self.assertEqual(self.chain("a1 a2"), "I")

    def test_known_chains(self):
        self.assertEqual(self.chain("b1"), "G{b1} G^-1{e}")
        self.assertEqual(self.chain("a1 b1 a2"), "G{b1 a2} G^-1{a2}")
        self.assertEqual(self.chain("b1 a1 b2"), "G{b1 a1 b2} G^-1{a1 b2} G{b2} G^-1{e}")

    def test_minus_chain_mirror(self):
        chain = qminus_chain(Word.parse("a1 b1", ORDERS))
        self.assertEqual(str(chain), "G^-1{b1} G{a1 b1}")
        self.assertEqual(str(qminus_chain(Word.parse("b1 b2", ORDERS))), "I")


class SheetValueTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.G = corpus.matrix("daniele")
        cls.atlas = build_atlas(cls.G)

    def test_physical_sheet_near_anchor_is_principal(self):
        k = 0.1 + 0.05j
        stack = sheet_values(self.G, self.atlas, k)
        np.testing.assert_allclose(stack[self.atlas.physical], evaluate_matrix(self.G, k, (1,)), rtol=1e-12)
        np.testing.assert_allclose(stack[1 - self.atlas.physical], evaluate_matrix(self.G, k, (-1,)), rtol=1e-12)

    def test_value_on_sheet_uses_words(self):
        k = 0.3 - 0.2j
        a1 = Word.parse("a1", self.atlas.orders)
        b1 = Word.parse("b1", self.atlas.orders)
        np.testing.assert_allclose(value_on_sheet(self.G, k, a1, self.atlas),
                                   value_on_sheet(self.G, k, b1, self.atlas))
        np.testing.assert_allclose(value_on_sheet(self.G, k, Word(), self.atlas),
                                   sheet_values(self.G, self.atlas, k)[self.atlas.physical])

    def test_bypass_cocycle_for_random_words(self):
        rng = np.random.default_rng(11)
        generators = self.atlas.orders.generators()
        points = sample_stream(self.atlas, 5)
        for _ in range(100):
            w, v = (
                normalize([generators[i] for i in rng.integers(0, len(generators), rng.integers(0, 7))],
                          self.atlas.orders)
                for _ in range(2)
            )
            k = next(points)
            with self.subTest(w=str(w), v=str(v)):
                self.assertLess(chain_cocycle_residual(self.G, self.atlas, w, v, k), 1e-7)

    def test_bypass_matrix_of_lower_letter(self):
        k = 0.4 + 0.1j
        b1 = Word.parse("b1", self.atlas.orders)
        stack = sheet_values(self.G, self.atlas, k)
        expected = stack[self.atlas.sheet_of(b1)] @ np.linalg.inv(stack[self.atlas.physical])
        np.testing.assert_allclose(bypass_matrix(self.G, b1, k, self.atlas), expected)
        basic = basic_bypass_matrices(self.G, self.atlas, k)
        self.assertEqual(len(basic), 1)
        np.testing.assert_allclose(basic[0], expected)

    def test_single_valued_functions(self):
        check = verify_single_valued(lambda stack, k: stack.sum(axis=0), self.G, self.atlas)
        self.assertTrue(check.holds)
        check = verify_single_valued(lambda stack, k: stack[self.atlas.physical], self.G, self.atlas)
        self.assertFalse(check.holds)
        self.assertIsNotNone(check.worst_affix)

    def test_values_are_cached_per_atlas(self):
        k = 0.2 - 0.3j
        atlas = build_atlas(self.G)
        self.assertEqual(atlas.value_cache, {})
        first = sheet_values(self.G, atlas, k)
        first[:] = 0
        self.assertEqual(len(atlas.value_cache), 1)
        self.assertNotEqual(np.abs(sheet_values(self.G, atlas, k)).max(), 0)
        self.assertEqual(build_atlas(self.G).value_cache, {})


class LoopContinuationTests(SimpleTestCase):
    """Значення на листі слова збігається з продовженням уздовж відповідних обходів."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.G = corpus.matrix("nested_pair")
        cls.atlas = build_atlas(cls.G)

    def loops(self, word):
        geometry = self.atlas.geometry
        segments = ()
        for letter in word:
            out, circle = geometry.loop_path(self.atlas.affixes.index(self.atlas.affix(*letter.generator)))
            segments += (out.then(circle).then(out.reversed()).segments) * letter.exponent
        return PathSpec(segments)

    def test_words_match_tracked_loops(self):
        k = 0.4 + 0.3j
        orders = self.atlas.orders
        for text in ("a1", "b2", "a2 b1", "b1 a1"):
            word = Word.parse(text, orders)
            with self.subTest(word=text):
                path = self.loops(word).then(self.atlas.geometry.transport_path(k))
                value, _ = continue_value(
                    self.G, path, self.atlas.sheets[self.atlas.physical],
                    self.atlas.geometry.singularities, self.atlas.min_steps,
                )
                np.testing.assert_allclose(value, value_on_sheet(self.G, k, word, self.atlas), rtol=1e-8)



class UnbalancedBypassTests(SimpleTestCase):

    def test_basic_bypass_set_needs_balance(self):
        G = corpus.matrix("unbalanced")
        atlas = build_atlas(G)
        with self.assertRaises(StructuralError):
            basic_bypass_matrices(G, atlas, 0.5 + 0.5j)
