"""Versioned JSON schemas for run configs and reports.

The field CSV layout is documented in ``fieldio``; its version string is
``fieldio.FORMAT``.
"""

from __future__ import annotations

CONFIG_VERSION = "qvortex-config/1"
DEGREE_VERSION = "qvortex-degree/1"
MANIFEST_VERSION = "qvortex-manifest/1"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

RUN_CONFIG = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": CONFIG_VERSION,
    "type": "object",
    "additionalProperties": False,
    "required": ["lattice", "beta"],
    "properties": {
        "lattice": {
            "type": "object",
            "additionalProperties": False,
            "required": ["width", "height"],
            "properties": {
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1},
                "layers": {"type": "integer", "minimum": 0},
            },
        },
        "engine": {"enum": ["exact", "block"]},
        "boundary_mode": {"enum": ["full", "clamped"]},
        "exact_solver": {"enum": ["dense", "sector"]},
        "n": _pos,
        "k": _pos,
        "u": _num,
        "h": _num,
        "beta": {"type": "array", "items": _num, "minItems": 1},
        "d": _num,
        "phi": _num,
        "basis": {
            "oneOf": [
                {"const": "delta"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["rotation"],
                    "properties": {"rotation": _num},
                },
            ]
        },
        "contour_depths": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "epsilon": {"oneOf": [{"type": "null"}, _pos]},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "dim_cap": {"type": "integer", "minimum": 1},
    },
}

CONFIG_DEFAULTS = {
    "engine": "exact",
    "boundary_mode": "full",
    "exact_solver": "dense",
    "n": 1.0,
    "k": 1.0,
    "u": 0.0,
    "h": 0.0,
    "d": 1.0,
    "phi": 0.0,
    "basis": "delta",
    "contour_depths": [1],
    "epsilon": None,
    "output_dir": "out",
    "seed": 0,
    "dim_cap": 2**14,
}

TABLE1_CONFIG = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "total_width": {"type": "integer", "minimum": 3},
        "total_height": {"type": "integer", "minimum": 3},
        "boundary_layers": {"type": "integer", "minimum": 1},
        "beta": _num,
        "n": _pos,
        "ks": {"type": "array", "items": _pos, "minItems": 1},
        "given_degrees": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "depths": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "phi": _num,
        "zero_row_phi": _num,
        "d_scan": {"type": "array", "items": _num, "minItems": 1},
        "mappings": {"type": "array", "items": _pos, "minItems": 1},
        "output_dir": {"type": "string"},
    },
}

_matrix = {"type": "array", "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}}

DEGREE_REPORT = {
    "type": "object",
    "required": ["format", "field", "contour", "report"],
    "properties": {
        "format": {"const": DEGREE_VERSION},
        "field": {"type": "string"},
        "contour": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "report": {
            "type": "object",
            "additionalProperties": False,
            "required": ["contour_id", "T", "s_squared", "s", "winding", "min_lambda"],
            "properties": {
                "contour_id": {"type": "string"},
                "T": {"type": "integer"},
                "s_squared": _num,
                "s": _num,
                "winding": {"type": ["integer", "null"]},
                "min_lambda": _num,
                "winding_error": {"type": ["string", "null"]},
                "integral_re": _matrix,
                "integral_im": _matrix,
            },
        },
    },
}
