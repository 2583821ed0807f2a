"""Run configuration: one TOML document validated into a RunConfig.

Blocks: [model] (lam, mu0, horizon and/or r), [distribution] (uniform or
tabulated), [task] (name plus task-specific fields), optional [output]
(dir, formats). Validation is strict: unknown keys, missing fields, or
type mismatches raise ConfigError with a machine-readable reason before
any computation starts.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

from .errors import ConfigError

TASKS = (
    "solve",
    "free-trial",
    "frontier",
    "check",
    "simulate",
    "oracle",
    "tiered",
    "welfare",
    "extension",
)
FORMATS = ("json", "csv", "png")
FAMILIES = ("trial", "tiered", "freemium")
EXTENSIONS = ("infinite-horizon", "cancellable", "bad-news", "mixed-news")

# per-task schema: field -> (type tag, default); _REQUIRED means no default
_REQUIRED = object()
_TASK_FIELDS: dict[str, dict[str, tuple[str, Any]]] = {
    "solve": {"wl": ("float", _REQUIRED), "selection": ("float", 0.0)},
    "free-trial": {},
    "frontier": {"grid": ("int", 33), "weights": ("float_list", None)},
    "check": {
        "wl": ("float", 0.0),
        "family": ("str", "trial"),
        "screening": ("pair_list", None),
    },
    "simulate": {
        "wl": ("float", 0.0),
        "family": ("str", "trial"),
        "screening": ("pair_list", None),
        "paths": ("int", 100_000),
        "seed": ("int", 0),
        "antithetic": ("bool", True),
    },
    "oracle": {
        "wl": ("float", _REQUIRED),
        "bins": ("int", 6),
        "value_points": ("int", 5),
        "mode": ("str", "restricted"),
    },
    "tiered": {"wl": ("float", _REQUIRED), "screening": ("pair_list", _REQUIRED)},
    "welfare": {"mu0_values": ("float_list", None)},
    "extension": {
        "which": ("str", _REQUIRED),
        "wl": ("float", _REQUIRED),
        "u": ("float", 0.0),
        "c": ("float", 0.0),
        "l": ("float", 0.0),
        "mu_H": ("float", 1.0),
        "mu_L": ("float", 0.0),
        "p_H": ("float", 1.0),
        "p_L": ("float", 0.0),
        "vbar": ("float", 0.0),
        "vlow": ("float", 0.0),
    },
}

# extension variants that require explicit task fields
_EXTENSION_NEEDS = {
    "infinite-horizon": (),
    "cancellable": ("u", "c", "mu_H", "mu_L", "p_H", "p_L"),
    "bad-news": ("l", "u"),
    "mixed-news": ("vbar", "vlow"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; build model objects via the helpers."""

    lam: float
    mu0: float
    horizon: float | None
    r: float | None
    dist_kind: str
    dist_lo: float | None
    dist_hi: float | None
    dist_points: tuple[tuple[float, float], ...] | None
    task: str
    args: dict[str, Any]
    out_dir: str
    formats: tuple[str, ...]

    def params(self):
        from .primitives import ModelParams

        if self.horizon is None:
            raise ConfigError(
                "missing_field:model.horizon",
                f"task {self.task!r} needs a finite horizon",
            )
        return ModelParams(lam=self.lam, horizon=self.horizon, mu0=self.mu0)

    def distribution(self):
        from .primitives import ValueDistribution

        if self.dist_kind == "uniform":
            return ValueDistribution.uniform(self.dist_lo, self.dist_hi)
        return ValueDistribution.tabulated(self.dist_points)


def load_config(path: str) -> dict:
    """Read and parse the TOML document at ``path``."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("unreadable_config", f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("invalid_toml", f"{path}: {exc}") from exc


def _require_table(doc: dict, name: str) -> dict:
    if name not in doc:
        raise ConfigError(f"missing_block:{name}")
    block = doc[name]
    if not isinstance(block, dict):
        raise ConfigError(f"bad_type:{name}", f"[{name}] must be a table")
    return block


def _no_unknown(block: dict, name: str, allowed) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown_field:{name}.{key}")


def _get_float(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"bad_type:{name}.{key}", f"{name}.{key} must be a number")
    return float(val)


def _get_int(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"bad_type:{name}.{key}", f"{name}.{key} must be an integer")
    return val


def _get_str(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    if not isinstance(val, str):
        raise ConfigError(f"bad_type:{name}.{key}", f"{name}.{key} must be a string")
    return val


def _get_bool(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    if not isinstance(val, bool):
        raise ConfigError(f"bad_type:{name}.{key}", f"{name}.{key} must be a boolean")
    return val


def _get_float_list(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    if not isinstance(val, list) or not val:
        raise ConfigError(
            f"bad_type:{name}.{key}", f"{name}.{key} must be a nonempty list"
        )
    out = []
    for item in val:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(
                f"bad_type:{name}.{key}", f"{name}.{key} must contain numbers"
            )
        out.append(float(item))
    return out


def _get_pair_list(block: dict, name: str, key: str, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            raise ConfigError(f"missing_field:{name}.{key}")
        return default
    val = block[key]
    ok = isinstance(val, list) and val
    if ok:
        for item in val:
            if (
                not isinstance(item, list)
                or len(item) != 2
                or any(
                    isinstance(x, bool) or not isinstance(x, (int, float))
                    for x in item
                )
            ):
                ok = False
                break
    if not ok:
        raise ConfigError(
            f"bad_type:{name}.{key}",
            f"{name}.{key} must be a nonempty list of [x, y] pairs",
        )
    return tuple((float(a), float(b)) for a, b in val)


_GETTERS = {
    "float": _get_float,
    "int": _get_int,
    "str": _get_str,
    "bool": _get_bool,
    "float_list": _get_float_list,
    "pair_list": _get_pair_list,
}


def _parse_model(doc: dict) -> tuple[float, float, float | None, float | None]:
    block = dict(_require_table(doc, "model"))
    if "lambda" in block:
        if "lam" in block:
            raise ConfigError(
                "conflicting_fields:model.lam,model.lambda",
                "give the arrival rate once",
            )
        block["lam"] = block.pop("lambda")
    _no_unknown(block, "model", ("lam", "mu0", "horizon", "r"))
    lam = _get_float(block, "model", "lam")
    mu0 = _get_float(block, "model", "mu0")
    horizon = _get_float(block, "model", "horizon", None)
    r = _get_float(block, "model", "r", None)
    if horizon is None and r is None:
        raise ConfigError(
            "missing_field:model.horizon", "give a horizon, a discount rate, or both"
        )
    return lam, mu0, horizon, r


def _parse_distribution(doc: dict):
    block = _require_table(doc, "distribution")
    kind = _get_str(block, "distribution", "kind")
    if kind == "uniform":
        _no_unknown(block, "distribution", ("kind", "lo", "hi"))
        lo = _get_float(block, "distribution", "lo")
        hi = _get_float(block, "distribution", "hi")
        return kind, lo, hi, None
    if kind == "tabulated":
        _no_unknown(block, "distribution", ("kind", "points"))
        points = _get_pair_list(block, "distribution", "points")
        return kind, None, None, points
    raise ConfigError(f"unknown_distribution:{kind}")


def _parse_task(doc: dict) -> tuple[str, dict[str, Any]]:
    block = _require_table(doc, "task")
    name = _get_str(block, "task", "name")
    if name not in TASKS:
        raise ConfigError(f"unknown_task:{name}")
    schema = _TASK_FIELDS[name]
    _no_unknown(block, "task", ("name", *schema))
    args: dict[str, Any] = {}
    for key, (tag, default) in schema.items():
        args[key] = _GETTERS[tag](block, "task", key, default)

    if name == "frontier" and block.get("weights") is not None and "grid" in block:
        raise ConfigError(
            "conflicting_fields:task.grid,task.weights", "give one weight source"
        )
    if name in ("check", "simulate"):
        if args["family"] not in FAMILIES:
            raise ConfigError(f"unknown_family:{args['family']}")
        if args["family"] == "tiered" and args["screening"] is None:
            raise ConfigError("missing_field:task.screening")
    if name == "extension":
        which = args["which"]
        if which not in EXTENSIONS:
            raise ConfigError(f"unknown_extension:{which}")
        for field_name in _EXTENSION_NEEDS[which]:
            if field_name not in block:
                raise ConfigError(f"missing_field:task.{field_name}")
    if name == "oracle" and args["mode"] not in ("restricted", "unrestricted"):
        raise ConfigError(f"unknown_mode:{args['mode']}")
    return name, args


def _parse_output(doc: dict) -> tuple[str, tuple[str, ...]]:
    if "output" not in doc:
        return "out", FORMATS
    block = _require_table(doc, "output")
    _no_unknown(block, "output", ("dir", "formats"))
    out_dir = _get_str(block, "output", "dir", "out")
    raw = block.get("formats")
    if raw is None:
        return out_dir, FORMATS
    if not isinstance(raw, list) or not raw:
        raise ConfigError(
            "bad_type:output.formats", "output.formats must be a nonempty list"
        )
    for fmt in raw:
        if fmt not in FORMATS:
            raise ConfigError(f"unknown_format:{fmt}")
    return out_dir, tuple(dict.fromkeys(raw))


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed TOML document; raises ConfigError on any defect."""
    if not isinstance(doc, dict):
        raise ConfigError("bad_type:document", "config root must be a table")
    for name in doc:
        if name not in ("model", "distribution", "task", "output"):
            raise ConfigError(f"unknown_block:{name}")
    lam, mu0, horizon, r = _parse_model(doc)
    kind, lo, hi, points = _parse_distribution(doc)
    task, args = _parse_task(doc)
    out_dir, formats = _parse_output(doc)

    needs_horizon = task != "extension" or args.get("which") != "infinite-horizon"
    if needs_horizon and horizon is None:
        raise ConfigError(
            "missing_field:model.horizon", f"task {task!r} needs a finite horizon"
        )
    if task == "extension" and args.get("which") == "infinite-horizon" and r is None:
        raise ConfigError(
            "missing_field:model.r", "the discounted variant needs model.r"
        )
    return RunConfig(
        lam=lam,
        mu0=mu0,
        horizon=horizon,
        r=r,
        dist_kind=kind,
        dist_lo=lo,
        dist_hi=hi,
        dist_points=points,
        task=task,
        args=args,
        out_dir=out_dir,
        formats=formats,
    )
