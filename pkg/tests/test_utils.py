import numpy as np
import pytest

from src.utils.finite_differences import FiniteDifferences, differentiation_matrix
from src.utils.stacks import DerivativeStack, one_minus_x2

X = np.linspace(0.1, 0.9, 9)


def test_polynomial_stack():
    stack = DerivativeStack.polynomial(X, (0.0, 0.0, 0.0, 1.0))
    np.testing.assert_allclose(stack[0], X ** 3)
    np.testing.assert_allclose(stack[1], 3 * X ** 2)
    np.testing.assert_allclose(stack[2], 6 * X)
    np.testing.assert_allclose(stack[3], 6.0)
    np.testing.assert_allclose(stack[4], 0.0)


def test_power_of_quadratic_derivatives():
    stack = one_minus_x2(X, 0.5)
    root = np.sqrt(1 - X ** 2)
    np.testing.assert_allclose(stack[0], root, rtol=1e-14)
    np.testing.assert_allclose(stack[1], -X / root, rtol=1e-13)
    np.testing.assert_allclose(stack[2], -1 / root ** 3, rtol=1e-13)


def test_product_rule():
    x = DerivativeStack.identity(X)
    square = x * x
    expected = DerivativeStack.polynomial(X, (0.0, 0.0, 1.0))
    np.testing.assert_allclose(square.data, expected.data, atol=1e-14)


def test_quotient_and_power_agree():
    base = DerivativeStack.polynomial(X, (1.0, 2.0, 0.5))
    np.testing.assert_allclose((1.0 / base.value), base.power(-1.0)[0])
    quotient = DerivativeStack.constant(X, 1.0) / base
    np.testing.assert_allclose(quotient.data, base.power(-1.0).data, rtol=1e-12)


def test_power_at_zero_base_keeps_value_finite():
    stack = DerivativeStack.power_of_quadratic(np.array([0.0, 0.5]), 0.0, 1.0, 0.0, 1.5)
    assert stack[0][0] == 0.0
    assert stack[1][0] == 0.0
    assert np.isinf(stack[2][0])


def test_derivative_shifts_orders():
    stack = DerivativeStack.polynomial(X, (1.0, 1.0, 1.0, 1.0, 1.0))
    shifted = stack.derivative()
    np.testing.assert_allclose(shifted[0], stack[1])
    assert np.all(np.isnan(shifted[4]))
    assert shifted.top == 3
    assert np.all(shifted.is_finite())


def test_known_order_follows_arithmetic():
    stack = DerivativeStack.polynomial(X, (1.0, 2.0, 3.0))
    mixed = one_minus_x2(X, 0.5) * stack.derivative() + stack
    assert mixed.top == 3
    assert (mixed * 2.0).sqrt().top == 3
    assert mixed.take([0, 1]).top == 3
    assert np.all(mixed.is_finite())
    np.testing.assert_array_equal(mixed.is_finite(order=4), mixed.is_finite(order=3))
    with pytest.raises(ValueError):
        DerivativeStack(np.zeros((5, 2)), top=5)


def test_stack_shape_is_checked():
    with pytest.raises(ValueError):
        DerivativeStack(np.zeros((3, 4)))


def test_centered_weights():
    np.testing.assert_allclose(FiniteDifferences.weights((-1, 0, 1), 1), [-0.5, 0.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(FiniteDifferences.weights((-1, 0, 1), 2), [1.0, -2.0, 1.0], atol=1e-13)


def test_windows_shift_at_boundaries():
    assert FiniteDifferences.window(5, 11, 2) == (4, 3)
    start, size = FiniteDifferences.window(0, 11, 3)
    assert (start, size) == (0, 5)
    start, size = FiniteDifferences.window(10, 11, 4)
    assert start + size == 11 and size == 6


@pytest.mark.parametrize('order,degree', [(1, 2), (2, 2), (3, 4), (4, 5)])
def test_differentiation_matrix_exact_on_polynomials(order, degree):
    n, h = 101, 0.01
    x = np.arange(n) * h
    coefficients = np.ones(degree + 1)
    values = np.polynomial.polynomial.polyval(x, coefficients)
    expected = np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(coefficients, order))
    result = differentiation_matrix(n, h, order) @ values
    np.testing.assert_allclose(result, expected, rtol=1e-6, atol=1e-5)


@pytest.mark.parametrize('order', [1, 2, 3, 4])
def test_centered_stencils_are_second_order(order):
    errors = []
    for n in (11, 21):
        x = np.linspace(0.0, 1.0, n)
        result = differentiation_matrix(n, 1.0 / (n - 1), order) @ np.exp(x)
        errors.append(abs(result[(n - 1) // 2] - np.exp(0.5)))
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_differentiation_matrix_needs_enough_nodes():
    with pytest.raises(ValueError):
        differentiation_matrix(4, 0.25, 4)


def test_derivative_rows_shape():
    rows = FiniteDifferences.derivative_rows(np.linspace(0, 1, 11) ** 2, 0.1)
    assert rows.shape == (5, 11)
    np.testing.assert_allclose(rows[2], 2.0, atol=1e-10)
