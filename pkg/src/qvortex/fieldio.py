"""VorticityField container and its CSV serialization.

CSV layout (format version 1): one ``#`` comment line holding a JSON
metadata object, then a header row and one row per site in lattice order.
Floats are written with 17 significant digits so a write/read round trip
is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import repr_float

FORMAT = "qvortex-field/1"
COLUMNS = [
    "x", "y", "role",
    "Omega11", "Omega12", "Omega21", "Omega22",
    "Omegahat11", "Omegahat12", "Omegahat21", "Omegahat22",
    "eigengap", "principal_angle",
]


class FieldFormatError(ValueError):
    pass


@dataclass
class VorticityField:
    sites: list  # [(x, y), ...]
    roles: list
    omega: np.ndarray  # (S, 2, 2)
    omega_hat: np.ndarray  # (S, 2, 2)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sites = [tuple(int(c) for c in s) for s in self.sites]
        self._index = {s: i for i, s in enumerate(self.sites)}

    def __len__(self):
        return len(self.sites)

    def __contains__(self, site) -> bool:
        return tuple(site) in self._index

    def index(self, site) -> int:
        try:
            return self._index[tuple(site)]
        except KeyError:
            raise KeyError(f"site {site} not in field") from None

    def hat(self, site) -> np.ndarray:
        return self.omega_hat[self.index(site)]

    @property
    def norms(self) -> np.ndarray:
        """Frobenius norm of each reduced vorticity matrix."""
        return np.sqrt(np.sum(self.omega_hat**2, axis=(1, 2)))

    @property
    def eigengaps(self) -> np.ndarray:
        """Difference of the two eigenvalues of each reduced matrix (2 sqrt(-det))."""
        det = self.omega_hat[:, 0, 0] * self.omega_hat[:, 1, 1] - self.omega_hat[:, 0, 1] * self.omega_hat[:, 1, 0]
        return 2.0 * np.sqrt(np.maximum(-det, 0.0))

    @property
    def principal_angles(self) -> np.ndarray:
        """Axis of the larger eigenvalue, in [0, pi)."""
        a = 0.5 * (self.omega_hat[:, 0, 0] - self.omega_hat[:, 1, 1])
        b = 0.5 * (self.omega_hat[:, 0, 1] + self.omega_hat[:, 1, 0])
        return np.mod(0.5 * np.arctan2(b, a), np.pi)


def to_csv_text(vf: VorticityField) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps({"format": FORMAT, **vf.meta}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    gaps, angles = vf.eigengaps, vf.principal_angles
    for i, (x, y) in enumerate(vf.sites):
        nums = list(vf.omega[i].ravel()) + list(vf.omega_hat[i].ravel()) + [gaps[i], angles[i]]
        w.writerow([x, y, vf.roles[i]] + [repr_float(v) for v in nums])
    return buf.getvalue()


def atomic_write(path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_field(vf: VorticityField, path) -> Path:
    return atomic_write(path, to_csv_text(vf))


def read_field(path) -> VorticityField:
    text = Path(path).read_text(encoding="utf-8")
    return parse_field(text, source=str(path))


def parse_field(text: str, source: str = "<string>") -> VorticityField:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise FieldFormatError(f"{source}: missing metadata comment line")
    try:
        meta = json.loads(lines[0][2:])
    except json.JSONDecodeError as exc:
        raise FieldFormatError(f"{source}: bad metadata JSON: {exc}") from None
    if meta.pop("format", None) != FORMAT:
        raise FieldFormatError(f"{source}: not a {FORMAT} file")
    rows = list(csv.reader(lines[1:]))
    if not rows or rows[0] != COLUMNS:
        raise FieldFormatError(f"{source}: header must be {','.join(COLUMNS)}")
    sites, roles, om, oh = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=3):
        if len(row) != len(COLUMNS):
            raise FieldFormatError(f"{source}:{lineno}: expected {len(COLUMNS)} columns")
        try:
            sites.append((int(row[0]), int(row[1])))
            nums = [float(v) for v in row[3:11]]
        except ValueError as exc:
            raise FieldFormatError(f"{source}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in nums):
            raise FieldFormatError(f"{source}:{lineno}: non-finite value")
        roles.append(row[2])
        om.append(np.reshape(nums[:4], (2, 2)))
        oh.append(np.reshape(nums[4:], (2, 2)))
    return VorticityField(sites, roles, np.array(om), np.array(oh), meta)
