"""Config ingestion and result writers."""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import json
import math
import re
from pathlib import Path
from typing import Iterable, Optional, Sequence

import yaml

from .config import ScenarioConfig, SweepSpec, dbm_to_linear, snr_db_to_power
from .exceptions import ConfigError

__all__ = [
    "CSV_SCHEMA_VERSION",
    "CSV_COLUMNS",
    "load_config",
    "parse_override",
    "write_sweep_csv",
    "write_jsonl",
    "write_trace_csv",
    "write_manifest",
    "build_manifest",
]

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "sweep_param", "value", "mean_cmi_per_ue", "se_cmi", "mean_smi", "se_smi",
    "mean_sc_rate", "se_sc_rate", "n_trials", "n_failed", "mean_iters",
    "omega", "snr_db",
)

_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_SWEEP_FIELDS = {"omega_values", "snr_values_db", "n_trials", "master_seed"}
_DBM_FIELDS = {"noise_power_comm", "noise_power_sense", "path_var_los", "path_var_nlos",
               "target_gain_var", "power_budget"}


def parse_override(item: str):
    """Split ``KEY=VALUE``; the value is parsed as YAML (numbers, lists, bools)."""
    if "=" not in item:
        raise ConfigError(item, "override must look like KEY=VALUE")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(item, "override has an empty key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(key, f"cannot parse value {raw!r}: {exc}") from None
    return key, value


_FLOAT_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


def _coerce(value):
    # YAML 1.1 reads "1e-9" as a string; treat numeric-looking strings as floats
    if isinstance(value, str) and _FLOAT_RE.match(value.strip()):
        return float(value)
    if isinstance(value, list):
        return [_coerce(v) for v in value]
    return value


def _route(key: str):
    # -> (section, field) ; section in {"scenario", "sweep"}
    if "." in key:
        section, name = key.split(".", 1)
        if section not in ("scenario", "sweep"):
            raise ConfigError(key, "unknown section; use scenario.<key> or sweep.<key>")
        return section, name
    if key in _SWEEP_FIELDS:
        return "sweep", key
    return "scenario", key


def _scenario_entry(key: str, value, out: dict):
    if key == "snr_db":
        out["power_budget"] = snr_db_to_power(_number(key, value))
    elif key == "clutter_gain_vars_dbm":
        out["clutter_gain_vars"] = tuple(dbm_to_linear(_number(key, v)) for v in value)
    elif key.endswith("_dbm") and key[:-4] in _DBM_FIELDS:
        out[key[:-4]] = dbm_to_linear(_number(key, value))
    elif key in _SCENARIO_FIELDS:
        if isinstance(value, list):
            value = tuple(value)
        out[key] = value
    else:
        raise ConfigError(key, "unknown scenario key")


def _number(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def load_config(path: Optional[str] = None, overrides: Sequence[str] = ()):
    """Build ``(ScenarioConfig, SweepSpec)`` from a YAML/JSON file plus overrides.

    The file may hold ``scenario:`` and ``sweep:`` mappings, or flat keys
    that are routed by name. Power-like scenario keys accept a ``_dbm``
    suffix, and ``snr_db`` sets the power budget. Overrides are applied
    after the file.
    """
    entries = []
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError("config", f"file not found: {path}")
        try:
            doc = yaml.safe_load(p.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError("config", f"cannot parse {path}: {exc}") from None
        doc = {} if doc is None else doc
        if not isinstance(doc, dict):
            raise ConfigError("config", "top level must be a mapping")
        for key, value in doc.items():
            if key in ("scenario", "sweep"):
                if not isinstance(value, dict):
                    raise ConfigError(key, "section must be a mapping")
                entries.extend((f"{key}.{k}", v) for k, v in value.items())
            else:
                entries.append((key, value))
    entries.extend(parse_override(o) for o in overrides)

    scenario, sweep = {}, {}
    for key, value in entries:
        value = _coerce(value)
        section, name = _route(key)
        if section == "scenario":
            _scenario_entry(name, value, scenario)
        else:
            if name not in _SWEEP_FIELDS:
                raise ConfigError(key, "unknown sweep key")
            sweep[name] = tuple(value) if isinstance(value, list) else value

    try:
        cfg = ScenarioConfig(**scenario)
    except TypeError as exc:
        raise ConfigError("scenario", str(exc)) from None
    spec = SweepSpec(base_config=cfg, **sweep)
    return cfg, spec


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    return x


def write_sweep_csv(path, points) -> Path:
    """Aggregated table, one row per sweep point, full round-trip precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in points:
            writer.writerow([_cell(getattr(p, c)) for c in CSV_COLUMNS])
    return path


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_jsonl(path, records: Iterable[dict]) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")
    return path


def write_trace_csv(path, rows: Sequence[dict]) -> Path:
    path = Path(path)
    cols = ("iteration", "objective", "weighted_rate", "lambda", "power")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in cols])
    return path


def build_manifest(command: str, cfg: ScenarioConfig, spec: Optional[SweepSpec],
                   outputs: dict, workers: Optional[int] = None) -> dict:
    from . import __version__

    return {
        "tool": "wmmse-isac",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "command": command,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "master_seed": spec.master_seed if spec is not None else cfg.seed,
        "workers": workers,
        "scenario": cfg.resolved(),
        "sweep": spec.resolved() if spec is not None else None,
        "outputs": {k: str(v) for k, v in outputs.items()},
    }


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def manifest_to_config(manifest: dict):
    """Rebuild ``(ScenarioConfig, SweepSpec)`` from a manifest for reruns."""
    cfg = ScenarioConfig(**{k: tuple(v) if isinstance(v, list) else v
                            for k, v in manifest["scenario"].items()})
    sweep = manifest.get("sweep")
    if sweep is None:
        return cfg, None
    spec = SweepSpec(omega_values=tuple(sweep["omega_values"]),
                     snr_values_db=tuple(sweep["snr_values_db"]),
                     n_trials=sweep["n_trials"], master_seed=sweep["master_seed"],
                     base_config=cfg)
    return cfg, spec
