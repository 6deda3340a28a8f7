"""Run configuration.

Config files are flat TOML-style key=value with optional [section] headers
(section names become key prefixes: "[corpus]\nwindow_start=..." reads as
corpus.window_start). Every artifact embeds the config hash so reruns are
attributable; identical config + data means byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path


def parse_config_text(text: str) -> dict[str, object]:
    """Parse key=value lines; values may be quoted strings, ints, floats,
    or true/false. '#' starts a comment."""
    values: dict[str, object] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        full_key = f"{section}.{key}" if section else key
        values[full_key] = _parse_value(value.strip(), lineno)
    return values


def _parse_value(text: str, lineno: int):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text  # bare string


@dataclass
class RunConfig:
    # corpus
    window_start: str = "2018-01"
    window_end: str = "2019-12"
    comments: str = ""
    posts: str = ""
    interventions: str = ""
    mentions: str = ""
    moderators: str = ""
    stop_list: str = ""  # empty = shipped list
    sample_fraction: float = 1.0
    sample_seed: int = 0
    # distance
    rbo_p: float = 0.98
    # features
    lexicon_path: str = ""  # empty = built-in demo lexicon
    scorer: str = "indicator"  # indicator | rate
    toxicity_threshold: float = 0.5
    # models
    model_kind: str = "forest"
    sampling_strategy: str = "adasyn"
    seed: int = 0
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 2
    l2: float = 1.0
    flag_threshold: float = 0.5
    window: str = "Total"
    # continual / service
    initial_window_start: str = ""
    initial_window_end: str = ""
    simulate_start: str = ""
    simulate_end: str = ""
    auth_token: str = ""
    extra: dict = field(default_factory=dict)

    _SECTION_KEYS = {
        "corpus": (
            "window_start", "window_end", "comments", "posts", "interventions",
            "mentions", "moderators", "stop_list", "sample_fraction", "sample_seed",
        ),
        "distance": ("rbo_p",),
        "features": ("lexicon_path", "scorer", "toxicity_threshold"),
        "models": (
            "model_kind", "sampling_strategy", "seed", "n_trees", "max_depth",
            "min_leaf", "l2", "flag_threshold", "window",
        ),
        "service": (
            "initial_window_start", "initial_window_end", "simulate_start",
            "simulate_end", "auth_token",
        ),
    }

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        flat = parse_config_text(Path(path).read_text("utf-8"))
        cfg = cls()
        known = {k: section for section, keys in cls._SECTION_KEYS.items() for k in keys}
        for full_key, value in flat.items():
            key = full_key.split(".", 1)[-1]
            if key in known:
                expected = type(getattr(cfg, key))
                if expected is float and isinstance(value, int):
                    value = float(value)
                setattr(cfg, key, value)
            else:
                cfg.extra[full_key] = value
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
