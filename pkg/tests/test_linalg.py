import numpy as np
import pytest
import scipy.linalg

from relnet.linalg import (GroundedSolver, SpdError, block_laplacian, check_spd,
                           min_generalized_eig, parallel_combine, psd_geq)

from conftest import random_network, random_spd


def test_check_spd_errors():
    with pytest.raises(SpdError, match="square"):
        check_spd(np.ones((2, 3)))
    with pytest.raises(SpdError, match="symmetric"):
        check_spd([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(SpdError, match="positive definite"):
        check_spd([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(SpdError):
        check_spd([[1.0, 0.0], [0.0, 0.0]])
    assert check_spd(2.0).shape == (1, 1)


def test_parallel_combine_scalar():
    assert parallel_combine([np.array([[2.0]]), np.array([[2.0]])])[0, 0] == pytest.approx(1.0)


def test_min_generalized_eig_matches_scipy(rng):
    for k in (1, 2, 3):
        a, b = random_spd(rng, k), random_spd(rng, k)
        want = scipy.linalg.eigh(a, b, eigvals_only=True)[0]
        assert min_generalized_eig(a, b) == pytest.approx(want, rel=1e-10)
    a = random_spd(rng, 3)
    assert min_generalized_eig(a, a) == 1.0


def test_psd_geq():
    assert psd_geq(np.eye(2) * 2, np.eye(2))
    assert not psd_geq(np.eye(2), np.diag([2.0, 0.5]))


def test_laplacian_rows_sum_to_zero(rng):
    net = random_network(rng, 8, 2)
    lap = net.laplacian.toarray()
    np.testing.assert_allclose(lap.reshape(8, 2, 8, 2).sum(axis=2), 0, atol=1e-12)
    np.testing.assert_allclose(lap, lap.T)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_direct_and_cg_agree(rng, k):
    net = random_network(rng, 20, k)
    direct = GroundedSolver(net.laplacian, k, 0, "direct").node_blocks(range(1, 20))
    cg = GroundedSolver(net.laplacian, k, 0, "cg").node_blocks(range(1, 20))
    np.testing.assert_allclose(direct, cg, rtol=1e-7, atol=1e-9)


def test_block_laplacian_single_edge():
    lap = block_laplacian(2, [0], [1], np.array([[[4.0]]])).toarray()
    np.testing.assert_allclose(lap, [[4, -4], [-4, 4]])
