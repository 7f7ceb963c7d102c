"""Site-hopping engine on C^N (x) (C^2 (x) C^2), dimension 4N.

This is a reconstruction: every nearest-neighbour pair ``<i, j>`` places a
4x4 internal coupling ``C_ij`` on the symmetric hop ``|i><j| + |j><i|``.
Internal factor order follows the basis module (left factor = coarse
index).  Pair couplings, before the ``-1/(2(n+k))`` prefactor:

* interior-interior: ``n X(x)X + k Y(x)Y + u Z(x)Z``
* interior-boundary: ``n (X(x)X_b + X_b(x)X) + u (Z(x)Z_b + Z_b(x)Z)``,
  both operator orderings, as the mixed sum is written in the model
* boundary-boundary: ``n X_a(x)X_b + u Z_a(x)Z_b`` with ``a`` before ``b``
  in row-major order

where ``X_b = sin(2 theta_b) Pi_b`` and ``Z_b = cos(2 theta_b) Pi_b`` are
the compressed boundary operators and compressed ``Y`` vanishes.  A
uniform field ``h`` adds ``h * Delta(sigma^z)`` on the diagonal block of
each interior site.  All placement choices live in :func:`pair_coupling`.
"""

from __future__ import annotations

import numpy as np

from .basis import coproduct
from .engine_exact import J, SX, SZ, HamiltonianSpec, compressed_ops
from .lattice import BoundaryAngles, Lattice, Site

DEFAULT_BLOCK_CAP = 8192
LABEL = "block engine (reconstructed)"


class BlockCapacityError(RuntimeError):
    pass


def pair_coupling(lattice: Lattice, spec: HamiltonianSpec, angles, a: Site, b: Site) -> np.ndarray:
    """Internal 4x4 coupling attached to the hop between ``a`` and ``b``."""
    ba, bb = lattice.is_boundary(a), lattice.is_boundary(b)
    if not ba and not bb:
        k = spec.n * np.kron(SX, SX) - spec.k * np.kron(J, J) + spec.u * np.kron(SZ, SZ)
    elif ba and bb:
        oa, ob = compressed_ops(angles[a]), compressed_ops(angles[b])
        k = spec.n * np.kron(oa["x"], ob["x"]) + spec.u * np.kron(oa["z"], ob["z"])
    else:
        ob = compressed_ops(angles[a] if ba else angles[b])
        k = spec.n * (np.kron(SX, ob["x"]) + np.kron(ob["x"], SX))
        k = k + spec.u * (np.kron(SZ, ob["z"]) + np.kron(ob["z"], SZ))
    return spec.prefactor * k


def build_block_hamiltonian(
    lattice: Lattice,
    spec: HamiltonianSpec,
    angles: BoundaryAngles | None,
    cap: int = DEFAULT_BLOCK_CAP,
) -> np.ndarray:
    n_sites = len(lattice.sites)
    dim = 4 * n_sites
    if dim > cap:
        raise BlockCapacityError(f"block dimension 4N = {dim} exceeds cap {cap}; use a smaller lattice or raise the cap")
    if lattice.boundary_sites and angles is None:
        raise ValueError("boundary angles are required when the lattice has a boundary")
    ham = np.zeros((dim, dim))
    for i, j in lattice.nn_pairs:
        c = pair_coupling(lattice, spec, angles, lattice.sites[i], lattice.sites[j])
        ham[4 * i : 4 * i + 4, 4 * j : 4 * j + 4] += c
        ham[4 * j : 4 * j + 4, 4 * i : 4 * i + 4] += c.T
    if spec.h:
        field = spec.h * coproduct(SZ)
        for s in lattice.interior_sites:
            i = lattice.index(s)
            ham[4 * i : 4 * i + 4, 4 * i : 4 * i + 4] += field
    return ham


def lifted_observable(lattice: Lattice, site: Site, x) -> np.ndarray:
    """|i><i| (x) Delta(x) as a dense 4N x 4N matrix."""
    n_sites = len(lattice.sites)
    proj = np.zeros((n_sites, n_sites))
    i = lattice.index(site)
    proj[i, i] = 1.0
    return np.kron(proj, coproduct(x))


class BlockGibbs:
    """exp(-beta H) on the 4N space from one dense eigendecomposition."""

    label = LABEL

    def __init__(self, lattice: Lattice, ham: np.ndarray, beta: float, cap: int = DEFAULT_BLOCK_CAP):
        if ham.shape[0] > cap:
            raise BlockCapacityError(f"block dimension {ham.shape[0]} exceeds cap {cap}")
        if not np.all(np.isfinite(ham)):
            raise ValueError("Hamiltonian has non-finite entries")
        self.lattice = lattice
        self.beta = float(beta)
        energies, vectors = np.linalg.eigh(ham)
        e = -self.beta * energies
        w = np.exp(e - e.max())
        self.probabilities = w / w.sum()
        self.energies = energies
        self._scaled = vectors * np.sqrt(self.probabilities)

    @property
    def register(self) -> tuple[Site, ...]:
        return tuple(self.lattice.sites)

    def site_block(self, site: Site) -> np.ndarray:
        """4x4 diagonal block <i| exp(-beta H) |i> / Tr exp(-beta H)."""
        i = self.lattice.index(site)
        a = self._scaled[4 * i : 4 * i + 4]
        return a @ a.T

    def reduced_density(self, site: Site) -> np.ndarray:
        """2x2 matrix r with Tr(r x) = Tr(block_i Delta(x)) for every 2x2 x.

        ``r`` is the average of the two one-factor partial traces of the
        site block; its trace is the block's total weight, not 1.
        """
        r4 = self.site_block(site).reshape(2, 2, 2, 2)
        return 0.5 * (np.einsum("ajbj->ab", r4) + np.einsum("jajb->ab", r4))

    def expectation(self, op: np.ndarray) -> float:
        a = self._scaled
        return float(np.sum(a * (op @ a)))


def block_gibbs(lattice, spec, angles, beta, cap: int = DEFAULT_BLOCK_CAP) -> BlockGibbs:
    return BlockGibbs(lattice, build_block_hamiltonian(lattice, spec, angles, cap), beta, cap)
