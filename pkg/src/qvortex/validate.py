"""Self-check suite behind ``qvortex validate``.

Each check returns ``(ok, detail)``.  Checks look up package functions at
call time, so a broken implementation is caught even when patched in.
"""

from __future__ import annotations

import math
import traceback

import numpy as np

from . import basis, engine_block, engine_exact, su2_field, vortex_analysis
from .lattice import LatticeSpec, boundary_angles, build_lattice

CHECKS = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn

    return deco


@check("projector: Pi^2 = Pi, Pi^T = Pi, Tr Pi = 1")
def _projector():
    worst = 0.0
    for theta in np.linspace(-3, 3, 13):
        p = engine_exact.compression(theta)
        worst = max(worst, np.abs(p @ p - p).max(), np.abs(p - p.T).max(), abs(np.trace(p) - 1))
    return worst <= 1e-12, f"max defect {worst:.2e}"


@check("compressed operators equal Pi sigma Pi")
def _compressed():
    worst = 0.0
    for theta in np.linspace(-3, 3, 13):
        p = engine_exact.compression(theta)
        ops = engine_exact.compressed_ops(theta)
        for key, sig in (("x", engine_exact.SX), ("y", engine_exact.J), ("z", engine_exact.SZ)):
            worst = max(worst, np.abs(ops[key] - p @ sig @ p).max())
    return worst <= 1e-12, f"max defect {worst:.2e}"


@check("basis: conjugation keeps orthonormality, delta-symmetry and trace covariance")
def _basis():
    rng = np.random.default_rng(0)
    d = basis.delta_basis()
    ok = basis.is_orthonormal(d) and basis.is_delta_symmetric(d)
    worst = 0.0
    for _ in range(20):
        p = basis.random_orthogonal(rng)
        a = basis.conjugate_basis(d, p)
        ok &= basis.is_orthonormal(a) and basis.is_delta_symmetric(a)
        worst = max(worst, np.abs(basis.matrix_of_traces(a) - p.T @ basis.matrix_of_traces(d) @ p).max())
    return ok and worst <= 1e-12, f"trace covariance defect {worst:.2e}"


def _small_state(beta, layers=1, mode=engine_exact.FULL, d=1.0):
    lat = build_lattice(LatticeSpec(3, 3, layers))
    ang = boundary_angles(lat, d, 0.3)
    spec = engine_exact.HamiltonianSpec(1.0, 2.0, 0.0, 0.0, mode)
    ham = engine_exact.build_hamiltonian(lat, spec, ang)
    reg = engine_exact.register_sites(lat, mode)
    return lat, spec, ang, ham, engine_exact.gibbs(ham, beta, reg)


@check("Hamiltonians are symmetric (exact and block)")
def _symmetric():
    lat, spec, ang, ham, _ = _small_state(1.0)
    hb = engine_block.build_block_hamiltonian(lat, spec, ang)
    a = abs(ham - ham.T).max()
    b = np.abs(hb - hb.T).max()
    return a == 0 and b == 0, f"exact {a:.1e}, block {b:.1e}"


@check("beta = 0: every site is a vortex")
def _beta_zero():
    _, _, _, _, st = _small_state(0.0)
    vf = vortex_analysis.vorticity_field(st)
    worst = float(vf.norms.max())
    return worst <= 1e-12, f"max |Omega_hat| {worst:.2e}"


@check("Cayley-Hamilton: Omega_hat^2 + det(Omega_hat) I = 0")
def _cayley():
    # the 3x3 instance is fully mixed on every site, so use a 4x3 register
    lat = build_lattice(LatticeSpec(4, 3, 1))
    spec = engine_exact.HamiltonianSpec(1.0, 10.0, 0.4, 0.1)
    st = engine_exact.SectorGibbs(lat, spec, boundary_angles(lat, 1.0, 0.3), 1.3)
    vf = vortex_analysis.vorticity_field(st)
    worst = max(engine_exact.cayley_hamilton_residual(h) for h in vf.omega_hat)
    detail = f"max residual {worst:.2e} (sign note: a traceless 2x2 squares to -det * I)"
    return worst <= 1e-12 and float(vf.norms.max()) > 1e-6, detail


@check("free boundary: reduced vorticity vanishes")
def _free():
    lat = build_lattice(LatticeSpec(3, 2, 0))
    ham = engine_exact.build_hamiltonian(lat, engine_exact.HamiltonianSpec(1.0, 3.0, 0.7))
    st = engine_exact.gibbs(ham, 1.5, lat.sites)
    worst = float(vortex_analysis.vorticity_field(st).norms.max())
    return worst <= 1e-8, f"max |Omega_hat| {worst:.2e}"


@check("basis covariance of vorticity matrices")
def _covariance():
    lat, spec, ang, ham, st = _small_state(1.0)
    rng = np.random.default_rng(1)
    d = basis.delta_basis()
    worst = 0.0
    for _ in range(5):
        p = basis.random_orthogonal(rng)
        a = basis.conjugate_basis(d, p)
        for s in lat.sites:
            om_d, _ = engine_exact.vorticity_matrix(st, s, d)
            om_a, _ = engine_exact.vorticity_matrix(st, s, a)
            worst = max(worst, np.abs(om_a - p.T @ om_d @ p).max())
    return worst <= 1e-10, f"max defect {worst:.2e}"


@check("boundary sectors reproduce the full register")
def _sectors():
    lat, spec, ang, _, st = _small_state(0.8)
    sec = engine_exact.SectorGibbs(lat, spec, ang, 0.8)
    worst = max(np.abs(sec.reduced_density(s) - st.reduced_density(s)).max() for s in lat.sites)
    return worst <= 1e-10, f"max defect {worst:.2e}"


@check("synthetic fields: degree and winding")
def _synthetic():
    worst, ok = 0.0, True
    for n in (1, 2, 3):
        rep = su2_field.contour_degree(su2_field.synthetic_field(n, 0.5, 32 * n))
        worst = max(worst, abs(rep.s - n))
        ok &= rep.winding == n
    return ok and worst <= 0.05, f"max |s - n| {worst:.3f}"


@check("flatness residual refines at second order")
def _flatness():
    def field(x, y):
        return su2_field.bloch_to_su2([math.cos(x + 0.3 * y), math.sin(x * y + 0.5), 1.0 + 0.4 * math.sin(y)])

    res = []
    for h in (0.05, 0.025, 0.0125):
        res.append(su2_field.flatness_residual(field(0.7, 0.4), field(0.7 + h, 0.4), field(0.7 + h, 0.4 + h), field(0.7, 0.4 + h), h))
    ratios = [res[i] / res[i + 1] for i in range(len(res) - 1)]
    return all(3 <= r <= 5 for r in ratios), "ratios " + ", ".join(f"{r:.2f}" for r in ratios)


@check("ferro/antiferro symmetry on an even free-boundary lattice")
def _ferro():
    lat = build_lattice(LatticeSpec(2, 2, 0))
    rep = vortex_analysis.ferro_antiferro_report(lat, engine_exact.HamiltonianSpec(1.0, 2.0), 1.0)
    return rep["max"] <= 1e-10, f"max discrepancy {rep['max']:.2e}"


def run_checks(stream=None) -> bool:
    import sys

    stream = stream or sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"
        all_ok &= bool(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]", file=stream)
    print(f"{'all checks passed' if all_ok else 'validation FAILED'}", file=stream)
    return all_ok
