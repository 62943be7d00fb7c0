import numpy as np
import pytest
from scipy.special import roots_jacobi

from stoeuler.core import GasLaw
from stoeuler.quadrature import JacobiQuadrature, golub_welsch


@pytest.mark.parametrize("lam", [-0.25, 0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2, 7, 48])
def test_matches_scipy_roots_jacobi(n, lam):
    nodes, weights = golub_welsch(n, lam)
    ref_x, ref_w = roots_jacobi(n, lam, lam)
    np.testing.assert_allclose(nodes, ref_x, atol=1e-13)
    np.testing.assert_allclose(weights, ref_w, rtol=1e-11)


@pytest.mark.parametrize("gamma", [1.4, 2.0, 3.0])
def test_weights_sum_to_inverse_c_lambda(gamma):
    law = GasLaw.normalized(gamma)
    quad = JacobiQuadrature.for_law(law)
    assert quad.weights.sum() * law.c_lambda == pytest.approx(1.0, rel=1e-13)
    assert quad.mass == pytest.approx(quad.weights.sum(), rel=1e-13)


def test_rule_is_symmetric():
    quad = JacobiQuadrature(0.5, 11)
    np.testing.assert_array_equal(quad.nodes, -quad.nodes[::-1])
    np.testing.assert_array_equal(quad.weights, quad.weights[::-1])
    assert quad.nodes[5] == 0.0


def test_exact_for_high_degree_polynomials():
    # z^(2m) moment of (1 - z^2)^(1/2): B(m + 1/2, 3/2)
    from scipy.special import beta

    quad = JacobiQuadrature(0.5, 8)
    for m in range(8):
        exact = beta(m + 0.5, 1.5)
        assert quad.integrate(lambda z: z ** (2 * m)) == pytest.approx(exact, rel=1e-13)


def test_tables_are_read_only():
    quad = JacobiQuadrature(1.0, 5)
    with pytest.raises(ValueError):
        quad.nodes[0] = 0.0


def test_invalid_arguments():
    with pytest.raises(ValueError):
        golub_welsch(0, 0.5)
    with pytest.raises(ValueError):
        golub_welsch(3, -1.0)
