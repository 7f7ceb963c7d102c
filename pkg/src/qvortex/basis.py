"""Orthonormal bases of real 2x2 matrices ("one-point function" arrays).

A basis ``b = (b1, b2, b3, b4)`` is stored as an array of shape
``(2, 2, 2, 2)`` where ``b[r, c]`` is the 2x2 matrix sitting at row ``r``,
column ``c`` of the 2x2 array of matrices::

    [[b1, b2],
     [b3, b4]]

Kronecker convention, used everywhere in the package: in ``np.kron(A, B)``
the left factor ``A`` indexes the coarse 2x2 blocks.
"""

from __future__ import annotations

import json

import numpy as np

SYMMETRY_TOL = 1e-10
ORTHO_TOL = 1e-12


class BasisError(ValueError):
    pass


def as_basis(mats) -> np.ndarray:
    """Coerce four 2x2 matrices (b1..b4) or a (2,2,2,2) array to a basis array."""
    arr = np.asarray(mats, dtype=float)
    if arr.shape == (4, 2, 2):
        arr = arr.reshape(2, 2, 2, 2)
    if arr.shape != (2, 2, 2, 2):
        raise BasisError(f"expected four 2x2 matrices, got shape {arr.shape}")
    return arr


def elements(b: np.ndarray) -> list[np.ndarray]:
    """The ordered list (b1, b2, b3, b4)."""
    return [b[0, 0], b[0, 1], b[1, 0], b[1, 1]]


def delta_basis() -> np.ndarray:
    """Matrix units: delta_rc has a single 1 at (r, c)."""
    b = np.zeros((2, 2, 2, 2))
    for r in range(2):
        for c in range(2):
            b[r, c, r, c] = 1.0
    return b


def gram(b: np.ndarray) -> np.ndarray:
    """Gram matrix under (A|B) = Tr(B^T A)."""
    flat = as_basis(b).reshape(4, 4)
    return flat @ flat.T


def is_orthonormal(b: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    return bool(np.max(np.abs(gram(b) - np.eye(4))) <= tol)


def matrix_of_traces(b: np.ndarray) -> np.ndarray:
    """2x2 matrix whose (r, c) entry is the normalized trace (Tr/2) of b[r, c]."""
    return 0.5 * np.einsum("rcii->rc", as_basis(b))


def is_symmetric(b: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    b = as_basis(b)
    return bool(
        np.allclose(b[0, 0], b[0, 0].T, atol=tol, rtol=0)
        and np.allclose(b[1, 1], b[1, 1].T, atol=tol, rtol=0)
        and np.allclose(b[1, 0], b[0, 1].T, atol=tol, rtol=0)
    )


def is_delta_symmetric(b: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    """Symmetric, and the matrix of traces is a multiple of the identity."""
    if not is_symmetric(b, tol):
        return False
    t = matrix_of_traces(b)
    return bool(abs(t[0, 1]) <= tol and abs(t[1, 0]) <= tol and abs(t[0, 0] - t[1, 1]) <= tol)


def check_orthogonal(p, tol: float = ORTHO_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2, 2) or np.max(np.abs(p.T @ p - np.eye(2))) > tol:
        raise BasisError("P must be a 2x2 orthogonal matrix")
    return p


def conjugate_basis(b: np.ndarray, p) -> np.ndarray:
    """Form P^T b P treating the entries b[r, c] as scalars.

    ``a[r, c] = sum_{p, q} P[p, r] * b[p, q] * P[q, c]``.
    """
    p = check_orthogonal(p)
    return np.einsum("pr,pqij,qc->rcij", p, as_basis(b), p)


def rotation(s: float) -> np.ndarray:
    c, sn = np.cos(s), np.sin(s)
    return np.array([[c, -sn], [sn, c]])


def random_orthogonal(rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of O(2) (rotation or reflection)."""
    p = rotation(rng.uniform(0, 2 * np.pi))
    if rng.random() < 0.5:
        p = p @ np.diag([1.0, -1.0])
    return p


def coproduct(x) -> np.ndarray:
    """(1 (x) x + x (x) 1) / 2 as a 4x4 matrix."""
    x = np.asarray(x)
    eye = np.eye(2)
    return 0.5 * (np.kron(eye, x) + np.kron(x, eye))


def basis_to_json(b: np.ndarray) -> str:
    return json.dumps([m.tolist() for m in elements(as_basis(b))])


def basis_from_json(text: str) -> np.ndarray:
    return as_basis(json.loads(text))
