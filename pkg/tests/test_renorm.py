import numpy as np
import pytest

from modvillain.complex import Box
from modvillain.errors import DomainError
from modvillain.renorm import (coisometry_residual, ft_residuals, operator_norm, random_characters,
                               renormalize_chain, renormalize_step, restriction_chain,
                               subdivision_chain, subdivision_contraction_check,
                               verify_projective_measures)


@pytest.fixture(scope="module")
def chain3():
    return restriction_chain([Box.cube(3, s) for s in (1, 2, 3)])


def test_restriction_chain_shapes(chain3):
    assert [m.shape for m in chain3.maps] == [(5, 28), (28, 81)]
    assert chain3.kind == "restriction" and len(chain3) == 3


def test_renormalized_chain_is_coisometric(chain3):
    grams = renormalize_chain(chain3)
    assert max(grams.coisometry_residuals) < 1e-12
    for beta in (0.01, 0.3, 2.0):
        assert verify_projective_measures(chain3, grams, beta, 50, np.random.default_rng(0)) < 1e-12


def test_base_grams_are_not_consistent(chain3):
    res = ft_residuals(chain3, chain3.base_grams, 0.1, 100, np.random.default_rng(3))
    assert min(res) > 1e-3
    co = coisometry_residual(chain3.maps[0], chain3.base_grams[1], chain3.base_grams[0])
    assert co > 0.1


def test_two_dimensional_chain_already_consistent():
    chain = restriction_chain([Box.cube(2, s) for s in (1, 2, 3)])
    grams = renormalize_chain(chain)
    for r, g in zip(grams.grams_r, chain.base_grams):
        assert np.allclose(r, g, atol=1e-12)


def test_renormalize_step_small_example():
    p = np.array([[1.0, 1.0]])
    r = renormalize_step(np.eye(1), np.eye(2), p)
    assert np.allclose(p @ np.linalg.inv(r) @ p.T, np.eye(1))
    # kernel direction (1,-1) keeps its base length
    k = np.array([1.0, -1.0])
    assert k @ r @ k == pytest.approx(2.0)


def test_renormalize_step_rejects_non_surjective():
    with pytest.raises(DomainError):
        renormalize_step(np.eye(2), np.eye(2), np.array([[1.0, 0.0], [2.0, 0.0]]))


def test_nested_boxes_required():
    with pytest.raises(DomainError):
        restriction_chain([Box.cube(3, 2), Box.cube(3, 1)])


def test_subdivision_chain_renormalizes():
    chain = subdivision_chain(Box.cube(3, 1), 1)
    grams = renormalize_chain(chain)
    assert max(grams.coisometry_residuals) < 1e-10
    assert verify_projective_measures(chain, grams, 0.1, 50, np.random.default_rng(1)) < 1e-10


@pytest.mark.parametrize("d,expected", [(2, 1.0), (3, 2**0.5), (4, 2.0)])
def test_subdivision_operator_norm(d, expected):
    assert subdivision_contraction_check(Box.cube(d, 1)) == pytest.approx(expected, rel=1e-10)


def test_operator_norm_zero_map():
    assert operator_norm(np.zeros((2, 3)), np.eye(3), np.eye(2)) == 0.0


def test_random_characters_sparse():
    xi = random_characters(10, 200, np.random.default_rng(0))
    support = np.count_nonzero(xi, axis=1)
    assert support.min() >= 1 and support.max() <= 3
    assert set(np.unique(xi)) <= {-1, 0, 1}
