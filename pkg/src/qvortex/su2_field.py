"""Degree of su(2)-valued fields along closed contours.

Samples are traceless Hermitian 2x2 matrices ``M = [[a, b], [conj(b), -a]]``
with ``M @ M = lam * I`` and ``lam = a**2 + |b|**2``.  The connection form
``(M^-1 dM - dM M^-1) / 2`` is discretized at segment midpoints, which
keeps every increment exactly antisymmetric for real symmetric fields.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ]
)
SINGULAR_REL = 1e-12
JUMP_EPS = 1e-6


class SingularContourError(ValueError):
    """The field (nearly) vanishes on a contour segment."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class UnderSampledContourError(ValueError):
    pass


def su2(a: float, b: complex = 0.0) -> np.ndarray:
    b = complex(b)
    m = np.array([[a, b], [b.conjugate(), -a]])
    return m.real.copy() if b.imag == 0 else m


def lam(m: np.ndarray) -> float:
    """lam with M^2 = lam * I, i.e. -det M for traceless M."""
    return float(abs(m[0, 0]) ** 2 + abs(m[0, 1]) ** 2)


def rho_increment(m0: np.ndarray, m1: np.ndarray, eps: float = 0.0, segment=None) -> np.ndarray:
    mid = 0.5 * (m0 + m1)
    lam_mid = lam(mid)
    if lam_mid <= eps:
        where = "" if segment is None else f" on segment {segment}"
        raise SingularContourError(f"field vanishes (lambda={lam_mid:.3g}){where}", segment)
    inv = mid / lam_mid
    dm = m1 - m0
    return 0.5 * (inv @ dm - dm @ inv)


@dataclass
class ContourField:
    samples: np.ndarray  # (T, 2, 2)
    contour_id: str = "contour"
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 3 or self.samples.shape[1:] != (2, 2):
            raise ValueError("samples must have shape (T, 2, 2)")
        if len(self.samples) < 3:
            raise ValueError("a closed contour needs at least 3 samples")

    def __len__(self):
        return len(self.samples)

    @property
    def lambdas(self) -> np.ndarray:
        return np.abs(self.samples[:, 0, 0]) ** 2 + np.abs(self.samples[:, 0, 1]) ** 2

    @property
    def is_regular(self) -> bool:
        return bool(self.lambdas.min() > 0)

    def reversed(self) -> "ContourField":
        labels = self.labels[::-1] if self.labels else []
        return ContourField(self.samples[::-1].copy(), self.contour_id + ":reversed", labels)

    def rolled(self, shift: int) -> "ContourField":
        labels = self.labels[shift:] + self.labels[:shift] if self.labels else []
        return ContourField(np.roll(self.samples, -shift, axis=0), self.contour_id, labels)

    def segment_name(self, t: int) -> str:
        t1 = (t + 1) % len(self)
        if self.labels:
            return f"{self.labels[t]}->{self.labels[t1]}"
        return f"{t}->{t1}"


@dataclass
class DegreeReport:
    contour_id: str
    n_samples: int
    integral: np.ndarray
    s_squared: float
    s: float
    winding: int | None
    min_lambda: float
    winding_error: str | None = None

    @property
    def s_abs(self) -> float:
        return abs(self.s)

    def to_dict(self) -> dict:
        return {
            "contour_id": self.contour_id,
            "T": self.n_samples,
            "s_squared": self.s_squared,
            "s": self.s,
            "winding": self.winding,
            "min_lambda": self.min_lambda,
            "winding_error": self.winding_error,
            "integral_re": np.real(self.integral).tolist(),
            "integral_im": np.imag(self.integral).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def contour_integral(cf: ContourField) -> np.ndarray:
    """(1/2pi) * sum of midpoint increments around the closed contour."""
    lams = cf.lambdas
    eps = SINGULAR_REL * float(lams.max())
    if lams.max() == 0:
        raise SingularContourError("field vanishes identically on the contour", 0)
    total = np.zeros((2, 2), dtype=cf.samples.dtype)
    T = len(cf)
    for t in range(T):
        total = total + rho_increment(cf.samples[t], cf.samples[(t + 1) % T], eps, cf.segment_name(t))
    return total / (2 * math.pi)


def contour_degree(cf: ContourField) -> DegreeReport:
    integral = contour_integral(cf)
    s2 = float(np.real(np.linalg.det(integral)))
    sign = 1.0 if np.real(integral[0, 1]) >= 0 else -1.0
    s = sign * math.sqrt(max(s2, 0.0))
    try:
        winding, err = winding_oracle(cf), None
    except (UnderSampledContourError, ValueError) as exc:
        winding, err = None, str(exc)
    return DegreeReport(cf.contour_id, len(cf), integral, s2, s, winding, float(cf.lambdas.min()), err)


def winding_oracle(cf: ContourField, jump_eps: float = JUMP_EPS) -> int:
    """Integer winding of the planar vector (a, Re b) by unwrapped angle steps."""
    a = np.real(cf.samples[:, 0, 0])
    b = np.real(cf.samples[:, 0, 1])
    if np.any(np.hypot(a, b) == 0):
        raise ValueError("winding undefined: field vanishes at a sample")
    ang = np.arctan2(b, a)
    steps = np.diff(np.append(ang, ang[0]))
    steps = np.mod(steps + np.pi, 2 * np.pi) - np.pi
    bad = np.flatnonzero(np.abs(steps) >= np.pi - jump_eps)
    if bad.size:
        raise UnderSampledContourError(
            f"angle jump of {abs(steps[bad[0]]):.6f} rad on segment {cf.segment_name(int(bad[0]))}"
        )
    return int(round(steps.sum() / (2 * np.pi)))


def synthetic_field(n: int, a: float, T: int) -> ContourField:
    """Samples of [[a cos n t, sin n t], [sin n t, -a cos n t]] at t = 2 pi j / T."""
    if a == 0:
        raise ValueError("a = 0 gives a field vanishing wherever sin(n t) = 0")
    if T < 3:
        raise ValueError("need T >= 3 samples")
    t = 2 * np.pi * np.arange(T) / T
    c, s = np.cos(n * t), np.sin(n * t)
    samples = np.stack([np.stack([a * c, s], -1), np.stack([s, -a * c], -1)], -2)
    return ContourField(samples, f"synthetic(n={n},a={a},T={T})")


def flatness_residual(m00, m10, m11, m01, spacing: float = 1.0) -> float:
    """Discrete curvature ``d rho + [rho_x, rho_y]`` of one plaquette per unit area.

    Corners are ordered counter-clockwise from the lower-left.  The loop sum
    of increments approximates ``d rho`` over the plaquette; the bracket uses
    edge increments averaged over opposite edges.
    """
    corners = [np.asarray(m) for m in (m00, m10, m11, m01)]
    lams = [lam(m) for m in corners]
    if min(lams) <= SINGULAR_REL * max(lams) or max(lams) == 0:
        raise SingularContourError("singular plaquette corner")
    bottom = rho_increment(corners[0], corners[1])
    right = rho_increment(corners[1], corners[2])
    top = rho_increment(corners[3], corners[2])
    left = rho_increment(corners[0], corners[3])
    loop = bottom + right - top - left
    rx = 0.5 * (bottom + top)
    ry = 0.5 * (left + right)
    curvature = loop + (rx @ ry - ry @ rx)
    return float(np.linalg.norm(curvature)) / spacing**2


def bloch_to_su2(v) -> np.ndarray:
    """v -> (v1 sigma^x + v2 sigma^y + v3 sigma^z) / 2."""
    return 0.5 * np.einsum("i,ijk->jk", np.asarray(v, dtype=float), SIGMA)


def su2_to_bloch(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.array([2 * m[1, 0].real, 2 * m[1, 0].imag, 2 * m[0, 0].real])


def su2_bracket(x, y) -> np.ndarray:
    """Bracket making bloch_to_su2 a Lie algebra map from (R^3, cross)."""
    return -1j * (x @ y - y @ x)
