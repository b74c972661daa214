import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from factorization.exceptions import UnsupportedSurfaceError
from factorization.expr import build_matrix
from factorization.surface import (
    SheetPermutation,
    affix_candidates,
    build_atlas,
    elimination_polynomials,
    find_branch_affixes,
    is_balanced,
    monodromy_permutation,
    render_diagram,
    resolve_tilt,
    sign_flip_permutation,
)
from factorization.words import Hemisphere, Letter, normalize

from . import corpus


def close_to(values, expected, tol=1e-7):
    return len(values) == len(expected) and all(
        min(abs(v - e) for v in values) < tol for e in expected
    )


class SheetPermutationTests(SimpleTestCase):

    def test_cycle_structure(self):
        p = SheetPermutation((1, 2, 0, 3))
        self.assertEqual(p.cycles(), [(0, 1, 2)])
        self.assertEqual(p.order, 3)
        self.assertEqual(str(p), "(0 1 2)")
        self.assertEqual(p.inverse().images, (2, 0, 1, 3))
        self.assertTrue(p.power(3).is_identity)
        self.assertEqual(p.then(p).images, p.power(2).images)

    def test_order_is_lcm_of_cycles(self):
        self.assertEqual(SheetPermutation((1, 0, 3, 4, 2)).order, 6)
        self.assertEqual(SheetPermutation((0, 1)).order, 1)


class AffixDetectionTests(SimpleTestCase):

    def test_rational_matrix_has_single_sheet(self):
        G = build_matrix([["k + 1", "2"], ["0", "k - 3"]])
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 1)
        self.assertEqual(atlas.affixes, ())

    def test_daniele_matrix(self):
        G = corpus.matrix("daniele")
        k0 = corpus.daniele_constants()["k0"]
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 2)
        self.assertTrue(close_to([a.value for a in atlas.affixes], [k0, -k0]))
        upper = atlas.affix(Hemisphere.UPPER, 0)
        self.assertAlmostEqual(upper.value, k0)
        self.assertEqual(upper.order, 2)
        self.assertEqual(upper.label, "a1")
        self.assertEqual(atlas.affix(Hemisphere.LOWER, 0).label, "b1")

    def test_single_radical_without_inner_tower(self):
        G = corpus.with_radicals({"s": "sqrt(1 - k^2)"}, [["s"]])
        values = [c.value for c in affix_candidates(G)]
        self.assertTrue(close_to(values, [1, -1]))
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 2)
        self.assertAlmostEqual(atlas.affix(Hemisphere.UPPER, 0).value, 1)
        self.assertAlmostEqual(atlas.affix(Hemisphere.LOWER, 0).value, -1)

    def test_double_root_is_one_even_point(self):
        G = corpus.with_radicals({"s": "sqrt((k - 1)^2*(k + 2))"}, [["s"]])
        candidates = sorted(affix_candidates(G), key=lambda c: c.value.real)
        self.assertEqual(len(candidates), 2)
        self.assertAlmostEqual(candidates[0].value, -2)
        self.assertEqual(candidates[0].radicals, (0,))
        self.assertAlmostEqual(candidates[1].value, 1, places=6)
        self.assertEqual(candidates[1].radicals, ())

    def test_nested_elimination(self):
        G = corpus.matrix("balanced_nested")
        polynomials = elimination_polynomials(G)
        numerator, denominator = polynomials[1]
        roots = np.roots(numerator[::-1])
        self.assertTrue(close_to(list(roots), [1j, -1j]))
        self.assertEqual(len(denominator), 1)
        values = [c.value for c in affix_candidates(G)]
        self.assertTrue(close_to(values, [1j, -1j, math.sqrt(2) * 1j, -math.sqrt(2) * 1j]))

    def test_real_affixes_tilt_the_separating_line(self):
        G = corpus.matrix("nested_pair")
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 4)
        self.assertGreater(atlas.geometry.frame.tilt, 0)
        upper = [a.value for a in atlas.affixes if a.hemisphere is Hemisphere.UPPER]
        lower = [a.value for a in atlas.affixes if a.hemisphere is Hemisphere.LOWER]
        self.assertTrue(close_to(upper, [3, 5]))
        self.assertTrue(close_to(lower, [-5, -3]))

    def test_affixes_sorted_within_hemisphere(self):
        affixes = find_branch_affixes(corpus.matrix("nested_pair"))
        upper = [a.value for a in affixes if a.hemisphere is Hemisphere.UPPER]
        self.assertLess(upper[0].real, upper[1].real)
        self.assertEqual([a.index for a in affixes], [0, 1, 0, 1])

    def test_explicit_zero_tilt_with_real_affix(self):
        with self.assertRaises(UnsupportedSurfaceError):
            build_atlas(corpus.matrix("nested_pair"), axis_tilt=0.0)

    def test_affix_at_anchor(self):
        with self.assertRaises(UnsupportedSurfaceError):
            resolve_tilt([0j, 1j], 0j)

    def test_auto_tilt_keeps_real_axis_when_possible(self):
        self.assertEqual(resolve_tilt([1 + 1j, -1 - 1j], 0j), 0.0)
        tilt = resolve_tilt([3, 1 + 0.1j], 0j)
        self.assertGreater(tilt, 0)
        self.assertLessEqual(tilt, 0.05)


class BalanceTests(SimpleTestCase):

    def test_nested_root_is_balanced(self):
        G = corpus.matrix("balanced_nested")
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 4)
        verdict = is_balanced(G, atlas)
        self.assertTrue(verdict.balanced)
        self.assertIsNone(verdict.witness_sheet)

    def test_two_independent_roots_are_unbalanced(self):
        G = corpus.matrix("unbalanced")
        atlas = build_atlas(G)
        self.assertEqual(atlas.sheet_count, 4)
        verdict = is_balanced(G, atlas)
        self.assertFalse(verdict.balanced)
        self.assertIs(verdict.unreachable_from, Hemisphere.UPPER)
        self.assertNotIn(verdict.witness_sheet, verdict.upper_orbit)
        self.assertEqual(atlas.sheets[verdict.witness_sheet], (-1, 1))

    def test_shortest_words_reach_every_sheet(self):
        G = corpus.matrix("nested_pair")
        atlas = build_atlas(G)
        self.assertEqual(str(atlas.words[atlas.physical]), "e")
        for sheet, word in enumerate(atlas.words):
            self.assertEqual(atlas.sheet_of(word), sheet)
        basic = atlas.basic_words()
        self.assertEqual(len(basic), 3)
        self.assertTrue(all(word.lies_in(Hemisphere.LOWER) for _, word in basic))

    def test_shortest_words_are_shortlex_minimal(self):
        atlas = build_atlas(corpus.matrix("nested_pair"))
        letters = sorted(
            (Letter(g.hemisphere, g.index, e) for g in atlas.orders.generators()
             for e in range(1, atlas.orders.order(g.hemisphere, g.index))),
            key=Letter.sort_key,
        )
        first = {}
        for length in range(4):
            for combination in itertools.product(letters, repeat=length):
                w = normalize(combination, atlas.orders)
                if len(w) == length:
                    first.setdefault(atlas.sheet_of(w), w)
        self.assertEqual([str(w) for w in atlas.words], [str(first[s]) for s in range(atlas.sheet_count)])


class MonodromyTests(SimpleTestCase):
    """Відстежена монодромія збігається зі зміною знаків радикалів."""

    def test_tracked_loops_match_sign_flips(self):
        for name, G in corpus.unnested().items():
            atlas = build_atlas(G)
            for affix in atlas.affixes:
                expected = sign_flip_permutation(G, atlas, affix)
                for fraction in (1.0, 0.75, 0.5):
                    with self.subTest(matrix=name, affix=affix.label, fraction=fraction):
                        tracked = monodromy_permutation(G, atlas, affix, fraction=fraction)
                        self.assertEqual(tracked.images, expected.images)

    def test_negative_loop_is_inverse(self):
        G = corpus.matrix("nested_pair")
        atlas = build_atlas(G)
        for affix, permutation in zip(atlas.affixes, atlas.permutations):
            backwards = monodromy_permutation(G, atlas, affix, direction=-1)
            self.assertTrue(permutation.then(backwards).is_identity)

    def test_atlas_permutations_match_fresh_loops(self):
        G = corpus.matrix("balanced_nested")
        atlas = build_atlas(G)
        for affix, permutation in zip(atlas.affixes, atlas.permutations):
            self.assertEqual(monodromy_permutation(G, atlas, affix).images, permutation.images)

    def test_sign_flip_needs_unnested_tower(self):
        G = corpus.matrix("balanced_nested")
        atlas = build_atlas(G)
        with self.assertRaises(ValueError):
            sign_flip_permutation(G, atlas, atlas.affixes[0])


class DiagramTests(SimpleTestCase):

    def test_text_diagram_rows(self):
        atlas = build_atlas(corpus.matrix("nested_pair"))
        text = render_diagram(atlas, "text")
        rows = [line for line in text.splitlines() if line.rstrip().endswith("]")]
        self.assertEqual(len(rows), 4)
        self.assertTrue(text.startswith("sheets: 4"))

    def test_two_sheet_diagram_links_both_affixes(self):
        atlas = build_atlas(corpus.matrix("daniele"))
        dot = render_diagram(atlas, "dot")
        self.assertTrue(dot.startswith("graph riemann_surface {"))
        self.assertIn('label="a1"', dot)
        self.assertIn('label="b1"', dot)

    def test_rational_diagram_has_no_links(self):
        atlas = build_atlas(build_matrix([["k"]]))
        dot = render_diagram(atlas, "dot")
        self.assertNotIn("dashed", dot)
        self.assertEqual(render_diagram(atlas).count("[.]"), 1)

    def test_unknown_format(self):
        atlas = build_atlas(build_matrix([["k"]]))
        with self.assertRaises(ValueError):
            render_diagram(atlas, "svg")
