"""TOML loaders for parameter, domain and field files."""
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import geometry
from .errors import ConfigError, EqkitError
from .flows import AffineField
from .maxwellian import MaxwellianParams


def read_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _check_keys(data, allowed, where):
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def params_from_dict(data):
    _check_keys(data, {"r0", "alpha", "beta", "gamma", "w1", "w2", "lambda0", "dim"}, "params")
    dim = data.get("dim", len(data["w1"]) if "w1" in data else None)
    if dim not in (2, 3):
        raise ConfigError("params: 'dim' must be 2 or 3 (or inferable from w1)")
    try:
        return MaxwellianParams(
            r0=data.get("r0", 1.0),
            alpha=data.get("alpha", 0.0),
            beta=data.get("beta", 0.0),
            gamma=data.get("gamma", 1.0),
            lambda0=data.get("lambda0", np.zeros(1 if dim == 2 else 3)),
            w1=data.get("w1", np.zeros(dim)),
            w2=data.get("w2", np.zeros(dim)),
        )
    except (ValueError, EqkitError) as exc:
        raise ConfigError(f"params: {exc}") from None


def _bbox(value, key):
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise ConfigError(f"domain: '{key}' must be [[lo...], [hi...]]") from None
    return lo, hi


# kind -> (constructor, required keys, optional keys)
_DOMAINS = {
    "half_space": (geometry.HalfSpace, ("normal", "offset"), ("extent",)),
    "slab": (geometry.Slab, ("normal", "x1", "x2"), ("extent",)),
    "ball": (geometry.Ball, ("center", "radius"), ()),
    "annulus": (geometry.Annulus, ("center", "r_inner", "r_outer"), ()),
    "cylinder": (geometry.Cylinder, ("axis_point", "axis_dir", "radius"), ("half_length",)),
    "coaxial_cylinders": (geometry.CoaxialCylinders,
                          ("axis_point", "axis_dir", "r_inner", "r_outer"), ("half_length",)),
    "ellipsoid": (geometry.Ellipsoid, ("center", "semi_axes"), ("rotation",)),
    "torus": (geometry.Torus, ("center", "axis_dir", "major_r", "minor_r"), ()),
    "helical": (geometry.HelicalSurface,
                ("axis_point", "axis_dir", "pitch", "profile", "profile_bbox"), ("turns",)),
    "generalized_cylinder": (geometry.GeneralizedCylinder,
                             ("direction", "cross_section", "section_bbox"),
                             ("half_length", "origin")),
    "implicit": (geometry.Implicit, ("expr", "bbox"), ()),
}


def domain_from_dict(data):
    kind = data.get("kind")
    if kind not in _DOMAINS:
        raise ConfigError(f"domain: 'kind' must be one of {', '.join(_DOMAINS)}, got {kind!r}")
    cls, required, optional = _DOMAINS[kind]
    body = {k: v for k, v in data.items() if k not in ("kind", "dim")}
    _check_keys(body, set(required) | set(optional), f"domain ({kind})")
    missing = [k for k in required if k not in body]
    if missing:
        raise ConfigError(f"domain ({kind}): missing key(s) {', '.join(missing)}")
    for key in ("bbox", "profile_bbox", "section_bbox"):
        if key in body:
            body[key] = _bbox(body[key], key)
    try:
        shape = cls(**body)
    except (ValueError, TypeError, EqkitError) as exc:
        raise ConfigError(f"domain ({kind}): {exc}") from None
    if "dim" in data and data["dim"] != shape.dim:
        raise ConfigError(f"domain ({kind}): dim={data['dim']} but the shape is {shape.dim}-dimensional")
    return shape


def field_from_dict(data):
    kind = data.get("kind")
    if kind == "dilation":
        _check_keys(data, {"kind", "alpha", "c"}, "field")
        build = lambda: AffineField.dilation(data.get("alpha", 0.0), data["c"])
    elif kind == "screw":
        _check_keys(data, {"kind", "lambda", "beta", "c"}, "field")
        build = lambda: AffineField.screw(data.get("lambda", 0.0 if len(data["c"]) == 2 else [0, 0, 0]),
                                          data.get("beta", 0.0), data["c"])
    else:
        raise ConfigError(f"field: 'kind' must be dilation or screw, got {kind!r}")
    if "c" not in data:
        raise ConfigError("field: missing key c")
    try:
        return build()
    except (ValueError, EqkitError) as exc:
        raise ConfigError(f"field: {exc}") from None


def load_params(path):
    return params_from_dict(read_toml(path))


def load_domain(path):
    return domain_from_dict(read_toml(path))


def load_field(path):
    return field_from_dict(read_toml(path))
