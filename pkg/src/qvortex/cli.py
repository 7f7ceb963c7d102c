"""Command-line front end: ``qvortex {simulate,degree,table1,validate,render}``.

Exit codes: 0 success, 1 runtime or validation failure, 2 usage or
schema error.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__, engine_block, engine_exact, schemas
from .basis import conjugate_basis, delta_basis, rotation
from .engine_exact import CapacityError, HamiltonianSpec
from .fieldio import FieldFormatError, VorticityField, atomic_write, read_field, write_field
from .lattice import LatticeError, LatticeSpec, boundary_angles, build_lattice, ring_contour
from .render import field_thetas, render_svg
from .su2_field import SingularContourError
from .vortex_analysis import (
    Table1Config,
    VortexOnContourError,
    default_epsilon,
    detect_vortices,
    lattice_degree,
    table1_csv,
    table1_harness,
    table1_text,
    vorticity_field,
)

log = logging.getLogger("qvortex")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_FLOAT_KEYS = ("n", "k", "u", "h", "d", "phi")


class ConfigError(ValueError):
    """Raised for unreadable or schema-violating configuration files."""


# ---------------------------------------------------------------- config


def _schema_message(source, err) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{source}: invalid config at {where}: {err.message}"


def validate_config(raw: dict, schema: dict = schemas.RUN_CONFIG, source: str = "config") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("\n".join(_schema_message(source, e) for e in errors))


def fill_defaults(raw: dict) -> dict:
    """Validated config with defaults filled and numbers normalized."""
    cfg = copy.deepcopy(schemas.CONFIG_DEFAULTS)
    cfg.update(copy.deepcopy(raw))
    cfg["lattice"] = {"layers": 0, **cfg["lattice"]}
    for key in _FLOAT_KEYS:
        cfg[key] = float(cfg[key])
    cfg["beta"] = [float(b) for b in cfg["beta"]]
    if isinstance(cfg["basis"], dict):
        cfg["basis"] = {"rotation": float(cfg["basis"]["rotation"])}
    if cfg["epsilon"] is not None:
        cfg["epsilon"] = float(cfg["epsilon"])
    return cfg


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    validate_config(raw, source=str(path))
    return fill_defaults(raw)


def config_hash(cfg: dict) -> str:
    """sha256 of the canonical filled config, excluding where outputs go."""
    core = {k: v for k, v in cfg.items() if k != "output_dir"}
    text = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _basis_of(cfg):
    if cfg["basis"] == "delta":
        return delta_basis()
    return conjugate_basis(delta_basis(), rotation(cfg["basis"]["rotation"]))


def _lattice_of(cfg):
    lat = cfg["lattice"]
    try:
        return build_lattice(LatticeSpec(lat["width"], lat["height"], lat["layers"]))
    except LatticeError as exc:
        raise ConfigError(f"invalid lattice: {exc}") from None


def _spec_of(cfg) -> HamiltonianSpec:
    return HamiltonianSpec(cfg["n"], cfg["k"], cfg["u"], cfg["h"], cfg["boundary_mode"])


# ---------------------------------------------------------------- simulate


def _field_meta(cfg, digest, beta, i):
    label = engine_block.LABEL if cfg["engine"] == "block" else "exact engine"
    return {
        "engine": cfg["engine"],
        "engine_label": label,
        "exact_solver": cfg["exact_solver"] if cfg["engine"] == "exact" else None,
        "boundary_mode": cfg["boundary_mode"],
        "beta": beta,
        "beta_index": i,
        "n": cfg["n"],
        "k": cfg["k"],
        "u": cfg["u"],
        "h": cfg["h"],
        "d": cfg["d"],
        "phi": cfg["phi"],
        "basis": cfg["basis"],
        "lattice": dict(cfg["lattice"]),
        "config_hash": digest,
    }


def _state_for(cfg, lattice, beta, spectrum=None):
    spec = _spec_of(cfg)
    angles = boundary_angles(lattice, cfg["d"], cfg["phi"])
    if cfg["engine"] == "block":
        return engine_block.block_gibbs(lattice, spec, angles, beta, max(cfg["dim_cap"], 4))
    if cfg["exact_solver"] == "sector":
        return engine_exact.SectorGibbs(lattice, spec, angles, beta, cap=cfg["dim_cap"])
    return spectrum.at(beta)


def compute_field(cfg: dict, i: int, spectrum=None) -> VorticityField:
    """Vorticity field for ``cfg["beta"][i]``."""
    lattice = _lattice_of(cfg)
    beta = cfg["beta"][i]
    state = _state_for(cfg, lattice, beta, spectrum)
    sites = list(state.register)
    roles = [lattice.role(s) for s in sites]
    return vorticity_field(state, _basis_of(cfg), sites, roles, _field_meta(cfg, config_hash(cfg), beta, i))


def _dense_spectrum(cfg):
    lattice = _lattice_of(cfg)
    spec = _spec_of(cfg)
    angles = boundary_angles(lattice, cfg["d"], cfg["phi"])
    ham = engine_exact.build_hamiltonian(lattice, spec, angles, cfg["dim_cap"])
    reg = engine_exact.register_sites(lattice, spec.boundary_mode)
    return engine_exact.diagonalize(ham, reg, cfg["dim_cap"])


def compute_fields(cfg: dict, jobs: int = 1) -> list[VorticityField]:
    if cfg["engine"] == "exact" and cfg["exact_solver"] == "sector" and cfg["boundary_mode"] != "full":
        raise ConfigError("exact_solver 'sector' requires boundary_mode 'full'")
    idx = range(len(cfg["beta"]))
    if cfg["engine"] == "exact" and cfg["exact_solver"] == "dense":
        spectrum = _dense_spectrum(cfg)  # one diagonalization serves every beta
        return [compute_field(cfg, i, spectrum) for i in idx]
    if jobs > 1 and len(cfg["beta"]) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(compute_field, [cfg] * len(idx), idx))
    return [compute_field(cfg, i) for i in idx]


def degree_entries(cfg: dict, vf: VorticityField) -> list[dict]:
    lattice = _lattice_of(cfg)
    eps = cfg["epsilon"] if cfg["epsilon"] is not None else default_epsilon(vf)
    out = []
    for depth in cfg["contour_depths"]:
        entry = {"beta": vf.meta["beta"], "depth": depth}
        try:
            ring = ring_contour(lattice, depth)
            entry["report"] = lattice_degree(vf, ring, f"ring{depth}", eps).to_dict()
        except (LatticeError, VortexOnContourError, SingularContourError, KeyError) as exc:
            entry["error"] = str(exc).strip("'\"")
        out.append(entry)
    return out


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    if args.engine:
        cfg["engine"] = args.engine
    out = Path(args.out or cfg["output_dir"])
    digest = config_hash(cfg)
    fields = compute_fields(cfg, args.jobs)
    t1 = time.perf_counter()

    written, degrees, summary = [], [], []
    for i, vf in enumerate(fields):
        path = write_field(vf, out / f"field_{cfg['engine']}_b{i:03d}.csv")
        written.append(path)
        degrees.extend(degree_entries(cfg, vf))
        vs = detect_vortices(vf, cfg["epsilon"])
        summary.append({"beta": vf.meta["beta"], "sites": len(vf), "vortices": len(vs.sites), "epsilon": vs.epsilon})
        print(f"beta={vf.meta['beta']:g}: {len(vf)} sites, {len(vs.sites)} vortices -> {path}")
    deg_path = atomic_write(
        out / f"degrees_{cfg['engine']}.json",
        _json_text({"format": schemas.DEGREE_VERSION, "config_hash": digest, "entries": degrees}),
    )
    written.append(deg_path)
    for e in degrees:
        if "report" in e:
            r = e["report"]
            print(f"beta={e['beta']:g} ring {e['depth']}: s={r['s']:.6f} winding={r['winding']}")
        else:
            print(f"beta={e['beta']:g} ring {e['depth']}: {e['error']}")

    manifest = {
        "format": schemas.MANIFEST_VERSION,
        "config": cfg,
        "config_hash": digest,
        "versions": {
            "qvortex": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "summary": summary,
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in written],
    }
    atomic_write(out / "manifest.json", _json_text(manifest))
    t2 = time.perf_counter()
    # wall-clock numbers vary run to run, so they stay out of the manifest
    atomic_write(out / "timings.log", f"compute_s {t1 - t0:.3f}\nwrite_s {t2 - t1:.3f}\n")
    return EXIT_OK


# ---------------------------------------------------------------- degree


def _read_field(path) -> VorticityField:
    try:
        return read_field(path)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read field: {exc.strerror or exc}") from None


def _contour_from_args(args, vf: VorticityField):
    if args.contour:
        try:
            pts = json.loads(Path(args.contour).read_text(encoding="utf-8"))
            contour = [(int(p[0]), int(p[1])) for p in pts]
        except (OSError, ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"{args.contour}: contour must be a JSON list of [x, y] pairs ({exc})") from None
        return contour, "contour"
    lat = vf.meta.get("lattice")
    if not lat:
        raise ConfigError(f"{args.field}: field has no lattice metadata; pass --contour")
    try:
        lattice = build_lattice(LatticeSpec(lat["width"], lat["height"], lat.get("layers", 0)))
        return ring_contour(lattice, args.depth), f"ring{args.depth}"
    except LatticeError as exc:
        raise ConfigError(str(exc)) from None


def cmd_degree(args) -> int:
    vf = _read_field(args.field)
    contour, cid = _contour_from_args(args, vf)
    missing = [s for s in contour if s not in vf]
    if missing:
        raise ConfigError(f"{args.field}: contour site {missing[0]} not in field")
    report = lattice_degree(vf, contour, cid, args.epsilon)
    doc = {
        "format": schemas.DEGREE_VERSION,
        "field": Path(args.field).name,
        "contour": [list(s) for s in contour],
        "report": report.to_dict(),
    }
    text = _json_text(doc)
    out = Path(args.out) if args.out else Path(args.field).parent
    path = atomic_write(out / f"degree_{Path(args.field).stem}_{cid}.json", text)
    print(text, end="")
    log.info("wrote %s", path)
    return EXIT_OK


# ---------------------------------------------------------------- table1


def _finite_or_none(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def cmd_table1(args) -> int:
    overrides = {}
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
        validate_config(overrides, schemas.TABLE1_CONFIG, str(args.config))
    out = Path(args.out or overrides.pop("output_dir", "table1_out"))
    overrides.pop("output_dir", None)
    kw = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    cfg = Table1Config(**kw, jobs=args.jobs)
    report = table1_harness(cfg)
    text = table1_text(report)
    atomic_write(out / "table1.txt", text)
    atomic_write(out / "table1.csv", table1_csv(report))
    rows = [{k: _finite_or_none(v) for k, v in r.items()} for r in report.rows]
    doc = {
        "engine": engine_block.LABEL,
        "mapping": report.mapping,
        "mapping_errors": {f"{c:g}": _finite_or_none(e) for c, e in report.mapping_errors.items()},
        "rows": rows,
    }
    atomic_write(out / "table1.json", _json_text(doc))
    print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------- validate / render


def cmd_validate(args) -> int:
    from .validate import run_checks

    return EXIT_OK if run_checks(sys.stdout) else EXIT_FAIL


def cmd_render(args) -> int:
    vf = _read_field(args.field)
    svg = render_svg(vf, field_thetas(vf), args.epsilon, title=Path(args.field).stem)
    if args.out and args.out.endswith(".svg"):
        path = Path(args.out)
    else:
        base = Path(args.out) if args.out else Path(args.field).parent
        path = base / (Path(args.field).stem + ".svg")
    atomic_write(path, svg)
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qvortex", description="Vorticity fields of compressed-boundary XY lattices.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="compute vorticity fields for every beta in a config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (overrides output_dir)")
    s.add_argument("--engine", choices=["exact", "block"])
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("degree", help="degree of a field along a ring or explicit contour")
    d.add_argument("field")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--depth", type=int, default=1)
    g.add_argument("--contour", help="JSON file with a list of [x, y] sites")
    d.add_argument("--epsilon", type=float)
    d.add_argument("--out")
    d.set_defaults(func=cmd_degree)

    t = sub.add_parser("table1", help="block-engine degree table with d calibration")
    t.add_argument("--config")
    t.add_argument("--out")
    t.add_argument("--jobs", type=int, default=1)
    t.set_defaults(func=cmd_table1)

    v = sub.add_parser("validate", help="run the invariant self-checks")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="SVG of principal directions and vortices")
    r.add_argument("field")
    r.add_argument("--epsilon", type=float)
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, FieldFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VortexOnContourError, SingularContourError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (CapacityError, engine_block.BlockCapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
