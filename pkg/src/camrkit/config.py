"""Pipeline configuration: one versioned JSON file plus dotted-key overrides."""
from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from .training import PUBLISHED_PRESETS, TrainConfig

CONFIG_VERSION = 1
HEADS = ("surface", "norm", "nullc", "relation")
PATH_KEYS = ("train", "dev", "embeddings", "split_lexicon", "special_map", "error_lexicon",
             "phonological", "calligraphical", "relations", "dictionaries")


class ConfigError(ValueError):
    pass


def _head_defaults() -> dict:
    return {"batch_size": 4, "learning_rate": 0.01, "epochs": 30, "warmup_fraction": 0.01,
            "optimizer": "adam", "class_weights": None, "context_hidden": 16}


DEFAULTS: Dict[str, Any] = {
    "version": CONFIG_VERSION,
    "seed": 0,
    "paths": {k: None for k in PATH_KEYS},
    "embedding": {"kind": "hash", "dim": 32, "max_n": 3},
    "heads": {h: _head_defaults() for h in HEADS},
    "normalizer": {"threshold": 1},
    "decode": {"fallback_relation": "mod"},
    "scorer": {"restarts": 16, "seed": 0, "instance_alignment": "exact", "relation_alignment": "separate"},
}


def published_config() -> dict:
    """Defaults with the published batch sizes, learning rates and schedule per head."""
    cfg = copy.deepcopy(DEFAULTS)
    for head, (batch, lr) in PUBLISHED_PRESETS.items():
        cfg["heads"][head].update(batch_size=batch, learning_rate=lr, epochs=100,
                                  warmup_fraction=0.01, optimizer="adam")
    return cfg


def _merge(base: dict, extra: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        key = f"{where}{k}"
        if k not in out:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(out[k], dict) and isinstance(v, dict):
            out[k] = _merge(out[k], v, key + ".")
        else:
            out[k] = v
    return out


def parse_value(text: str) -> Any:
    """JSON literal if it parses, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> dict:
    """Apply ``a.b.c=value`` to a config dict (copy returned)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key.path=value")
    path, raw = assignment.split("=", 1)
    keys = path.strip().split(".")
    nested: Any = parse_value(raw)
    for k in reversed(keys):
        nested = {k: nested}
    return _merge(cfg, nested)


def load_config(path: Optional[Union[str, Path]] = None, overrides: Iterable[str] = (),
                check_paths: bool = True) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        p = Path(path)
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {p} not found") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"{p}:{e.lineno}:{e.colno}: {e.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: top level must be an object")
        if data.get("version") != CONFIG_VERSION:
            raise ConfigError(f"{p}: unsupported config version {data.get('version')!r}")
        cfg = _merge(cfg, data)
        base = p.parent
        for k, v in cfg["paths"].items():
            if isinstance(v, str) and not Path(v).is_absolute():
                cfg["paths"][k] = str(base / v)
    for o in overrides:
        cfg = apply_override(cfg, o)
    validate_config(cfg, check_paths)
    return cfg


def validate_config(cfg: dict, check_paths: bool = True) -> None:
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {cfg.get('version')!r}")
    for h in HEADS:
        try:
            train_config(cfg, h)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"heads.{h}: {e}") from None
        hidden = cfg["heads"][h]["context_hidden"]
        if hidden is not None and (not isinstance(hidden, int) or hidden < 1):
            raise ConfigError(f"heads.{h}.context_hidden must be a positive integer or null")
    sc = cfg["scorer"]
    if not isinstance(sc["restarts"], int) or sc["restarts"] < 1:
        raise ConfigError("scorer.restarts must be >= 1")
    if sc["instance_alignment"] not in ("exact", "ignore"):
        raise ConfigError("scorer.instance_alignment must be exact or ignore")
    if sc["relation_alignment"] not in ("separate", "joint", "ignore"):
        raise ConfigError("scorer.relation_alignment must be separate, joint or ignore")
    if cfg["embedding"].get("kind") not in ("hash", "table"):
        raise ConfigError("embedding.kind must be hash or table")
    if check_paths:
        for k, v in cfg["paths"].items():
            if v is not None and not Path(v).exists():
                raise ConfigError(f"paths.{k}: {v} does not exist")


def train_config(cfg: dict, head: str) -> TrainConfig:
    h = cfg["heads"][head]
    return TrainConfig(
        batch_size=h["batch_size"],
        learning_rate=float(h["learning_rate"]),
        epochs=h["epochs"],
        warmup_fraction=float(h["warmup_fraction"]),
        seed=cfg["seed"],
        class_weights=h["class_weights"],
        optimizer=h["optimizer"],
    )


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
