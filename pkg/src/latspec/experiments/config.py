"""Experiment config validation: every field checked before any compute,
unknown keys rejected, defaults resolved explicitly."""

import json

from ..errors import ConfigError

EXPERIMENT_NAMES = (
    "green-check",
    "growth",
    "spiral-compare",
    "kls-exponent",
    "borel",
    "dalpha",
    "transport",
    "stark-envelope",
)


class Field:
    def __init__(self, name, kind, default=None, required=False, check=None):
        self.name = name
        self.kind = kind
        self.default = default
        self.required = required
        self.check = check


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _coerce(field, value, where):
    k = field.kind
    ok = True
    if k == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif k == "float":
        ok = _is_number(value)
        value = float(value) if ok else value
    elif k == "str":
        ok = isinstance(value, str)
    elif k == "bool":
        ok = isinstance(value, bool)
    elif k == "dict":
        ok = isinstance(value, dict)
    elif k == "list":
        ok = isinstance(value, list)
    elif k == "number_list":
        ok = isinstance(value, list) and len(value) > 0 and all(
            _is_number(v) for v in value
        )
        if ok:
            value = [float(v) for v in value]
    elif k == "int_list":
        ok = isinstance(value, list) and len(value) > 0 and all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        )
    if not ok:
        raise ConfigError(f"{where}: field '{field.name}' must be a {k}")
    if field.check is not None:
        err = field.check(value)
        if err:
            raise ConfigError(f"{where}: field '{field.name}' {err}")
    return value


def validate_fields(cfg, fields, where):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where}: expected a mapping")
    known = {f.name for f in fields}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    out = {}
    for f in fields:
        if f.name in cfg and cfg[f.name] is not None:
            out[f.name] = _coerce(f, cfg[f.name], where)
        elif f.required:
            raise ConfigError(f"{where}: missing required field '{f.name}'")
        else:
            out[f.name] = f.default
    return out


def positive(v):
    return None if v > 0 else "must be positive"


def non_negative(v):
    return None if v >= 0 else "must be >= 0"


def validate_domain_config(cfg, where="domain"):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(f"{where}: needs a 'kind' key")
    kind = cfg["kind"]
    if kind == "box":
        return validate_fields(
            cfg,
            [
                Field("kind", "str"),
                Field("d", "int", required=True,
                      check=lambda v: None if v in (1, 2, 3) else "must be 1, 2 or 3"),
                Field("half_width", "int", required=True, check=positive),
            ],
            where,
        )
    if kind == "chain":
        return validate_fields(
            cfg,
            [
                Field("kind", "str"),
                Field("n_sites", "int", required=True, check=positive),
            ],
            where,
        )
    if kind == "spiral":
        return validate_fields(
            cfg,
            [
                Field("kind", "str"),
                Field("turns", "int", required=True, check=positive),
            ],
            where,
        )
    raise ConfigError(f"{where}: unknown domain kind {kind!r}")


def validate_potential_config(cfg, where="potential"):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(f"{where}: needs a 'kind' key")
    kind = cfg["kind"]
    if kind == "free":
        return validate_fields(cfg, [Field("kind", "str")], where)
    if kind == "periodic":
        return validate_fields(
            cfg,
            [Field("kind", "str"), Field("cell", "number_list", required=True)],
            where,
        )
    if kind == "random_decaying":
        return validate_fields(
            cfg,
            [
                Field("kind", "str"),
                Field("coupling", "float", required=True, check=non_negative),
                Field("seed", "int", default=0),
            ],
            where,
        )
    if kind == "anderson":
        return validate_fields(
            cfg,
            [
                Field("kind", "str"),
                Field("width", "float", required=True, check=non_negative),
                Field("seed", "int", default=0),
            ],
            where,
        )
    if kind == "table":
        return validate_fields(
            cfg,
            [Field("kind", "str"), Field("entries", "list", required=True)],
            where,
        )
    raise ConfigError(f"{where}: unknown potential kind {kind!r}")


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
