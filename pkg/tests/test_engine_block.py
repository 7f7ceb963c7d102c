from __future__ import annotations

import math

import numpy as np
import pytest

from qvortex import engine_block as eb
from qvortex.basis import coproduct, conjugate_basis, delta_basis, random_orthogonal
from qvortex.engine_exact import HamiltonianSpec, vorticity_from_density
from qvortex.lattice import LatticeSpec, boundary_angles, build_lattice


def test_single_pair_spectrum():
    lat = build_lattice(LatticeSpec(2, 1))
    ham = eb.build_block_hamiltonian(lat, HamiltonianSpec(1.0, 1.0), None)
    w = np.sort(np.linalg.eigvalsh(ham))
    np.testing.assert_allclose(w, [-0.5, -0.5, 0, 0, 0, 0, 0.5, 0.5], atol=1e-15)


def test_vanishing_couplings_give_zero_hamiltonian():
    # the lone interior site only touches boundary sites with sin(2 theta) = 0
    lat = build_lattice(LatticeSpec(3, 3, 1))
    ang = boundary_angles(lat, 0.0, math.pi / 2)
    ham = eb.build_block_hamiltonian(lat, HamiltonianSpec(1.0, 5.0), ang)
    assert np.abs(ham).max() < 1e-15


def test_symmetric_and_capacity():
    lat = build_lattice(LatticeSpec(4, 5, 1))
    ham = eb.build_block_hamiltonian(lat, HamiltonianSpec(1.0, 2.0, 0.3, 0.1), boundary_angles(lat, 2.0, 0.1))
    assert np.array_equal(ham, ham.T)
    with pytest.raises(eb.BlockCapacityError):
        eb.build_block_hamiltonian(lat, HamiltonianSpec(), boundary_angles(lat, 1, 0), cap=40)


def test_lifted_observable_traces_and_orthogonality():
    lat = build_lattice(LatticeSpec(3, 2))
    d = delta_basis()
    np.testing.assert_array_equal(eb.lifted_observable(lat, (1, 0), np.eye(2))[4:8, 4:8], np.eye(4))
    assert np.trace(eb.lifted_observable(lat, (0, 0), d[0, 0])) == pytest.approx(2.0)
    assert np.trace(eb.lifted_observable(lat, (0, 0), d[0, 1])) == 0.0
    a = eb.lifted_observable(lat, (0, 0), d[0, 0])
    b = eb.lifted_observable(lat, (2, 1), d[1, 1])
    assert not np.any(a @ b)


def test_beta_zero_constant():
    lat = build_lattice(LatticeSpec(5, 4, 1))
    st = eb.block_gibbs(lat, HamiltonianSpec(1.0, 10.0), boundary_angles(lat, 1.0, 0.0), 0.0)
    n = len(lat.sites)
    for s in lat.sites:
        om, oh = vorticity_from_density(st.reduced_density(s), delta_basis())
        np.testing.assert_allclose(om, np.eye(2) / (2 * n), atol=1e-15)
        assert np.abs(oh).max() < 1e-15


def test_reduced_density_reproduces_lifted_traces():
    lat = build_lattice(LatticeSpec(4, 4, 1))
    st = eb.block_gibbs(lat, HamiltonianSpec(1.0, 2.0, 0.5, 0.2), boundary_angles(lat, 1.0, 0.3), 1.2)
    rng = np.random.default_rng(5)
    for s in [(1, 1), (2, 1), (0, 3)]:
        x = rng.normal(size=(2, 2))
        direct = st.expectation(eb.lifted_observable(lat, s, x))
        assert np.trace(st.reduced_density(s) @ x) == pytest.approx(direct, abs=1e-14)
        assert np.trace(st.site_block(s) @ coproduct(x)) == pytest.approx(direct, abs=1e-14)


def test_weights_sum_to_one():
    lat = build_lattice(LatticeSpec(4, 3, 1))
    st = eb.block_gibbs(lat, HamiltonianSpec(1.0, 2.0), boundary_angles(lat, 1.0, 0.0), 3.0)
    total = sum(np.trace(st.reduced_density(s)) for s in lat.sites)
    assert total == pytest.approx(1.0, abs=1e-13)


def test_covariance():
    lat = build_lattice(LatticeSpec(4, 4, 1))
    st = eb.block_gibbs(lat, HamiltonianSpec(1.0, 10.0), boundary_angles(lat, 1.0, 0.0), 1.0)
    rng = np.random.default_rng(11)
    d = delta_basis()
    for _ in range(5):
        p = random_orthogonal(rng)
        for s in lat.sites:
            om, _ = vorticity_from_density(st.reduced_density(s), d)
            op, _ = vorticity_from_density(st.reduced_density(s), conjugate_basis(d, p))
            np.testing.assert_allclose(op, p.T @ om @ p, atol=1e-14)


def test_sublattice_sign_flip_reverses_h_without_field():
    lat = build_lattice(LatticeSpec(4, 5, 1))
    ham = eb.build_block_hamiltonian(lat, HamiltonianSpec(1.0, 3.0, 0.4), boundary_angles(lat, 1.0, 0.2))
    sign = np.repeat([(-1.0) ** (x + y) for x, y in lat.sites], 4)
    np.testing.assert_array_equal(sign[:, None] * ham * sign[None, :], -ham)
