"""Exact many-body engine on the tensor-product space (C^2)^{(x) N_q}.

The quantum register is the list of sites carrying a qubit, in lattice
(row-major) order; register position 0 is the left-most Kronecker factor.
In ``full`` boundary mode every site is in the register and boundary spin
operators are compressed, ``sigma -> Pi(theta) sigma Pi(theta)``.  In
``clamped`` mode boundary sites are additionally frozen in the range of
``Pi(theta)`` and drop out of the register.

All operators are real: ``sigma^y (x) sigma^y = -J (x) J`` with
``J = i sigma^y = [[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import as_basis
from .lattice import BoundaryAngles, Lattice, Site

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
J = np.array([[0.0, 1.0], [-1.0, 0.0]])
I2 = np.eye(2)

FULL = "full"
CLAMPED = "clamped"
DEFAULT_DIM_CAP = 2**14


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class HamiltonianSpec:
    n: float = 1.0
    k: float = 1.0
    u: float = 0.0
    h: float = 0.0
    boundary_mode: str = FULL

    def __post_init__(self):
        if not (self.n > 0 and self.k > 0):
            raise ValueError("couplings n and k must be positive")
        if self.boundary_mode not in (FULL, CLAMPED):
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")

    @property
    def prefactor(self) -> float:
        return -1.0 / (2.0 * (self.n + self.k))


def compression(theta: float) -> np.ndarray:
    """Rank-one projector onto (cos theta, sin theta)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c * c, s * c], [s * c, s * s]])


def compressed_ops(theta: float) -> dict[str, np.ndarray]:
    """Pi sigma Pi for sigma^x, the real y-factor J, and sigma^z.

    ``Pi J Pi = 0`` because ``J`` is antisymmetric and the range of ``Pi``
    is real, so the compressed sigma^y vanishes.
    """
    p = compression(theta)
    return {
        "x": np.sin(2 * theta) * p,
        "y": np.zeros((2, 2)),
        "z": np.cos(2 * theta) * p,
    }


def _site_ops(lattice: Lattice, angles: BoundaryAngles | None, site: Site) -> dict[str, np.ndarray]:
    if lattice.is_boundary(site):
        return compressed_ops(angles[site])
    return {"x": SX, "y": J, "z": SZ}


def register_sites(lattice: Lattice, mode: str) -> tuple[Site, ...]:
    if mode == FULL:
        return tuple(lattice.sites)
    return tuple(lattice.interior_sites)


def embed_ops(nq: int, ops: dict[int, np.ndarray]) -> sp.csr_matrix:
    """Tensor product with ``ops[pos]`` at register position ``pos``, identity elsewhere."""
    out = sp.identity(1, format="csr")
    run = 0  # pending identity factors
    for pos in range(nq):
        if pos in ops:
            if run:
                out = sp.kron(out, sp.identity(2**run), format="csr")
                run = 0
            out = sp.kron(out, sp.csr_matrix(ops[pos]), format="csr")
        else:
            run += 1
    if run:
        out = sp.kron(out, sp.identity(2**run), format="csr")
    return out.tocsr()


def embed_site_operator(register: tuple[Site, ...], site: Site, m) -> sp.csr_matrix:
    try:
        pos = register.index(tuple(site))
    except ValueError:
        raise ValueError(f"site {site} is not in the quantum register") from None
    return embed_ops(len(register), {pos: np.asarray(m)})


def check_capacity(nq: int, cap: int = DEFAULT_DIM_CAP) -> None:
    if 2**nq > cap:
        raise CapacityError(
            f"register of {nq} qubits has dimension 2^{nq} = {2**nq} > cap {cap}; "
            "use clamped mode, the block engine, or raise the cap"
        )


def build_hamiltonian(
    lattice: Lattice,
    spec: HamiltonianSpec,
    angles: BoundaryAngles | None = None,
    cap: int = DEFAULT_DIM_CAP,
) -> sp.csr_matrix:
    """Sparse real symmetric Hamiltonian on the register of ``spec.boundary_mode``.

    Each unordered nearest-neighbour pair contributes once::

        -(n X_i X_j + k Y_i Y_j + u Z_i Z_j) / (2 (n + k))

    with ``Y_i Y_j = -J_i J_j``, plus ``h * sigma^z`` on every interior site.
    """
    register = register_sites(lattice, spec.boundary_mode)
    check_capacity(len(register), cap)
    if lattice.boundary_sites and angles is None:
        raise ValueError("boundary angles are required when the lattice has a boundary")
    return _assemble(lattice, spec, angles, register)


def _assemble(lattice, spec, angles, register, interior_only=False) -> sp.csr_matrix:
    nq = len(register)
    pos = {s: p for p, s in enumerate(register)}
    ham = sp.csr_matrix((2**nq, 2**nq))
    weights = {"x": spec.n, "y": -spec.k, "z": spec.u}
    for a, b in lattice.nn_pairs:
        si, sj = lattice.sites[a], lattice.sites[b]
        if interior_only and (lattice.is_boundary(si) or lattice.is_boundary(sj)):
            continue
        oi, oj = _site_ops(lattice, angles, si), _site_ops(lattice, angles, sj)
        for comp, w in weights.items():
            scalar = spec.prefactor * w
            term = {}
            for s, o in ((si, oi), (sj, oj)):
                if s in pos:
                    term[pos[s]] = o[comp]
                else:
                    # clamped boundary site frozen in range(Pi): <v|Pi sigma Pi|v> = Tr(Pi sigma Pi)
                    scalar *= np.trace(o[comp])
            if not term or scalar == 0 or any(not np.any(m) for m in term.values()):
                continue  # boundary-boundary constants and vanishing terms
            ham = ham + scalar * embed_ops(nq, term)
    if spec.h:
        for s in lattice.interior_sites:
            ham = ham + spec.h * embed_ops(nq, {pos[s]: SZ})
    return ham.tocsr()


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a real symmetric Hamiltonian on a register."""

    energies: np.ndarray
    vectors: np.ndarray
    register: tuple[Site, ...]

    def at(self, beta: float) -> "GibbsState":
        return GibbsState(self, float(beta))


def diagonalize(ham, register: tuple[Site, ...], cap: int = DEFAULT_DIM_CAP) -> Spectrum:
    dense = ham.toarray() if sp.issparse(ham) else np.asarray(ham, dtype=float)
    if dense.shape[0] > cap:
        raise CapacityError(f"dimension {dense.shape[0]} exceeds cap {cap}")
    if not np.all(np.isfinite(dense)):
        raise ValueError("Hamiltonian has non-finite entries")
    if dense.shape[0] != 2 ** len(register):
        raise ValueError("register does not match the Hamiltonian dimension")
    energies, vectors = np.linalg.eigh(dense)
    return Spectrum(energies, vectors, tuple(register))


class GibbsState:
    """A -> Tr(exp(-beta H) A) / Tr(exp(-beta H)), from a cached spectrum."""

    def __init__(self, spectrum: Spectrum, beta: float):
        self.spectrum = spectrum
        self.beta = beta
        e = -beta * spectrum.energies
        # shift by the largest exponent so every weight is <= 1
        self.log_weights = e - e.max()
        w = np.exp(self.log_weights)
        self.log_partition = float(np.log(w.sum()) + e.max())
        self.probabilities = w / w.sum()
        self._scaled = spectrum.vectors * np.sqrt(self.probabilities)

    @property
    def register(self) -> tuple[Site, ...]:
        return self.spectrum.register

    @property
    def dimension(self) -> int:
        return self.spectrum.vectors.shape[0]

    def expectation(self, op) -> float:
        a = self._scaled
        return float(np.sum(a * (op @ a)))

    def reduced_density(self, site: Site) -> np.ndarray:
        try:
            pos = self.register.index(tuple(site))
        except ValueError:
            raise ValueError(f"site {site} is not in the quantum register") from None
        nq = len(self.register)
        a = self._scaled.reshape(2**pos, 2, 2 ** (nq - pos - 1), -1)
        return np.tensordot(a, a, axes=([0, 2, 3], [0, 2, 3]))


def gibbs(ham, beta: float, register: tuple[Site, ...], cap: int = DEFAULT_DIM_CAP) -> GibbsState:
    return diagonalize(ham, register, cap).at(beta)


def vorticity_from_density(rho: np.ndarray, b) -> tuple[np.ndarray, np.ndarray]:
    """Omega[r, c] = Tr(rho b[r, c]) and its traceless part."""
    b = as_basis(b)
    omega = np.einsum("ij,rcji->rc", rho, b)
    omega_hat = omega - 0.5 * np.trace(omega) * I2
    return omega, omega_hat


def vorticity_matrix(state, site: Site, b) -> tuple[np.ndarray, np.ndarray]:
    """Vorticity matrix of ``site`` and its reduced (traceless) part.

    ``state`` is a :class:`GibbsState` or :class:`SectorGibbs`.  With the
    delta basis ``Omega`` is the transpose of the site's reduced density.
    """
    return vorticity_from_density(state.reduced_density(site), b)


class SectorGibbs:
    """Full-mode Gibbs state via the conserved boundary projectors.

    Every boundary operator in full mode is a multiple of its ``Pi_j``, so
    ``[Pi_j, H] = 0`` and the Hilbert space splits into sectors labelled by
    ``s_j in {0, 1}`` (boundary qubit in ``range Pi_j`` or its complement).
    Each sector is an interior problem with fields ``s_j * <v_j|sigma|v_j>``
    and a constant from boundary-boundary pairs.
    """

    def __init__(
        self,
        lattice: Lattice,
        spec: HamiltonianSpec,
        angles: BoundaryAngles,
        beta: float,
        max_sectors: int = 2**20,
        cap: int = DEFAULT_DIM_CAP,
    ):
        self.lattice, self.spec, self.angles, self.beta = lattice, spec, angles, float(beta)
        interior = tuple(lattice.interior_sites)
        boundary = tuple(lattice.boundary_sites)
        check_capacity(len(interior), cap)
        if 2 ** len(boundary) > max_sectors:
            raise CapacityError(f"{2**len(boundary)} boundary sectors exceed the limit {max_sectors}")
        self._interior, self._boundary = interior, boundary
        bpos = {s: i for i, s in enumerate(boundary)}
        pref = spec.prefactor
        scal = {}
        for s in boundary:
            o = compressed_ops(angles[s])
            scal[s] = {c: float(np.trace(o[c])) for c in ("x", "z")}

        # boundary sites touching the interior define the sector Hamiltonians
        adjacent = sorted({bpos[t] for s in interior for t in lattice.neighbors(s) if t in bpos})
        self._adjacent = adjacent
        clamp_terms = []  # (boundary index, interior site, 2x2 field operator)
        const_pairs = []  # (boundary index, boundary index, energy)
        for a, b in lattice.nn_pairs:
            si, sj = lattice.sites[a], lattice.sites[b]
            bi, bj = si in bpos, sj in bpos
            if bi and bj:
                e = pref * (spec.n * scal[si]["x"] * scal[sj]["x"] + spec.u * scal[si]["z"] * scal[sj]["z"])
                const_pairs.append((bpos[si], bpos[sj], e))
            elif bi or bj:
                sb, s_in = (si, sj) if bi else (sj, si)
                field = pref * (spec.n * scal[sb]["x"] * SX + spec.u * scal[sb]["z"] * SZ)
                clamp_terms.append((bpos[sb], s_in, field))

        base = _assemble(lattice, spec, angles, interior, interior_only=True)
        nq = len(interior)

        n_adj = len(adjacent)
        sector_logz = np.empty(2**n_adj)
        sector_rho = np.empty((2**n_adj, nq, 2, 2))
        for code, bits in enumerate(itertools.product((0, 1), repeat=n_adj)):
            on = {adjacent[i] for i, bit in enumerate(bits) if bit}
            ham = base + _clamp_fields(lattice, interior, clamp_terms, on)
            st = gibbs(ham, self.beta, interior, cap)
            sector_logz[code] = st.log_partition
            for p, s in enumerate(interior):
                sector_rho[code, p] = st.reduced_density(s)

        nb = len(boundary)
        patterns = ((np.arange(2**nb)[:, None] >> np.arange(nb)[::-1]) & 1).astype(float)
        energy = np.zeros(len(patterns))
        for i, j, e in const_pairs:
            energy += e * patterns[:, i] * patterns[:, j]
        adj_code = np.zeros(len(patterns), dtype=np.int64)
        for i in adjacent:
            adj_code = adj_code * 2 + patterns[:, i].astype(np.int64)
        logw = sector_logz[adj_code] - self.beta * energy
        w = np.exp(logw - logw.max())
        w /= w.sum()
        self.sector_patterns = patterns
        self.sector_weights = w
        adj_weights = np.bincount(adj_code, weights=w, minlength=2**n_adj)
        self._rho_interior = np.einsum("s,sqij->qij", adj_weights, sector_rho)
        self._p_on = w @ patterns

    @property
    def register(self) -> tuple[Site, ...]:
        return tuple(self.lattice.sites)

    def reduced_density(self, site: Site) -> np.ndarray:
        site = tuple(site)
        if site in self._interior:
            return self._rho_interior[self._interior.index(site)]
        idx = self._boundary.index(site)
        p = compression(self.angles[site])
        q = self._p_on[idx]
        return q * p + (1.0 - q) * (I2 - p)

    def expectation(self, site: Site, m) -> float:
        return float(np.trace(self.reduced_density(site) @ np.asarray(m)))


def _clamp_fields(lattice, interior, clamp_terms, on) -> sp.csr_matrix:
    """Sum of interior fields induced by the boundary sites listed in ``on``."""
    nq = len(interior)
    pos = {s: p for p, s in enumerate(interior)}
    out = sp.csr_matrix((2**nq, 2**nq))
    for bidx, s_in, field in clamp_terms:
        if bidx in on:
            out = out + embed_ops(nq, {pos[s_in]: field})
    return out


def cayley_hamilton_residual(omega_hat: np.ndarray) -> float:
    """Max-norm of Omega_hat^2 + det(Omega_hat) I, zero for any traceless 2x2.

    Note the sign: for traceless 2x2 matrices the square equals
    ``-det * I``, not ``+det * I``.
    """
    m = np.asarray(omega_hat)
    return float(np.max(np.abs(m @ m + np.linalg.det(m) * I2)))
