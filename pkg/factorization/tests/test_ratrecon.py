import numpy as np
from django.test import SimpleTestCase

from factorization.continuation import Frame, SurfaceGeometry
from factorization.exceptions import ReconstructionError
from factorization.ratrecon import RationalFunction, reconstruct_matrix, reconstruct_rational, sample_points


def circle(count=24, radius=2.0):
    return [complex(radius * np.exp(2j * np.pi * (n + 0.3) / count)) for n in range(count)]


def known(k):
    return (k ** 2 + 1) / (k - 3)


class ReconstructRationalTests(SimpleTestCase):

    def test_recovers_known_function(self):
        points = circle()
        result = reconstruct_rational(points, [known(k) for k in points])
        self.assertEqual(result.degrees, (2, 1))
        np.testing.assert_allclose(result.numerator, [1, 0, 1], atol=1e-8)
        np.testing.assert_allclose(result.denominator, [-3, 1], atol=1e-8)
        self.assertAlmostEqual(complex(result(0.5 + 1j)), known(0.5 + 1j))

    def test_zeros_and_poles(self):
        points = circle()
        result = reconstruct_rational(points, [known(k) for k in points])
        np.testing.assert_allclose(sorted(result.zeros(), key=lambda z: z.imag), [-1j, 1j], atol=1e-8)
        np.testing.assert_allclose(result.poles(), [3], atol=1e-8)

    def test_polynomial_has_trivial_denominator(self):
        points = circle(12)
        result = reconstruct_rational(points, [2 * k - 1j for k in points])
        self.assertEqual(result.degrees, (1, 0))

    def test_zero_function(self):
        points = circle(8)
        self.assertTrue(reconstruct_rational(points, [0] * 8).is_zero)
        self.assertTrue(reconstruct_rational(points, [1e-14] * 8, atol=1e-12).is_zero)
        self.assertEqual(RationalFunction.zero().degrees, (0, 0))

    def test_degrees_are_minimal(self):
        rng = np.random.default_rng(23)
        points = circle(24)
        for _ in range(50):
            p, q = (int(d) for d in rng.integers(0, 4, 2))
            zeros = rng.uniform(-1, 1, p) + 1j * rng.uniform(-1, 1, p)
            poles = rng.uniform(-1, 1, q) + 1j * rng.uniform(-1, 1, q)
            scale = rng.uniform(0.5, 2) * np.exp(2j * np.pi * rng.uniform())

            def function(k):
                return scale * np.prod(k - zeros) / np.prod(k - poles)

            with self.subTest(p=p, q=q):
                result = reconstruct_rational(points, [function(k) for k in points])
                self.assertEqual(result.degrees, (p, q))
                np.testing.assert_allclose(complex(result(0.3 - 1.7j)), function(0.3 - 1.7j), rtol=1e-6)

    def test_too_few_samples(self):
        with self.assertRaises(ReconstructionError) as caught:
            reconstruct_rational([1, 2, 3], [1, 2, 3])
        self.assertEqual(caught.exception.samples, 3)

    def test_degree_caps_too_small(self):
        points = circle()
        with self.assertRaises(ReconstructionError):
            reconstruct_rational(points, [known(k) for k in points], max_degree=(1, 0))


class ReconstructMatrixTests(SimpleTestCase):

    def test_entries_and_identical_zeros(self):
        points = circle(16)
        values = np.array([[[1, k], [0, 1 / (k + 4)]] for k in points], dtype=complex)
        result = reconstruct_matrix(points, values)
        self.assertTrue(result.entries[1][0].is_zero)
        np.testing.assert_allclose(result(1j), [[1, 1j], [0, 1 / (4 + 1j)]], atol=1e-10)
        self.assertEqual(result.max_degrees, (1, 1))

    def test_error_names_the_entry(self):
        points = circle(16)
        values = np.array([[[1, k], [0, 1]] for k in points], dtype=complex)
        with self.assertRaises(ReconstructionError) as caught:
            reconstruct_matrix(points, values, max_degree=(0, 0))
        self.assertIn("entry 0,1", str(caught.exception))


class SamplePointsTests(SimpleTestCase):

    def test_points_lie_on_two_circles(self):
        geometry = SurfaceGeometry.build(Frame(), ())
        points = sample_points(geometry, 10, np.random.default_rng(3))
        self.assertEqual(len(points), 10)
        for k in points:
            self.assertTrue(min(abs(abs(k) - 0.75), abs(abs(k) - 1.25)) < 1e-12)

    def test_points_are_reproducible_and_clear(self):
        geometry = SurfaceGeometry.build(Frame(), [1j, -1j])
        first = sample_points(geometry, 12, np.random.default_rng(5))
        second = sample_points(geometry, 12, np.random.default_rng(5))
        self.assertEqual(first, second)
        self.assertTrue(all(geometry.is_clear(k) for k in first))
