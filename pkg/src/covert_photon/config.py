"""Run configuration: one JSON document, validated before anything executes."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .errors import CovertPhotonError


class ConfigError(CovertPhotonError):
    """Malformed or schema-violating configuration."""


_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}

SCENARIO_KINDS = ["willie_lrt", "radiometer_fa", "radiometer_md", "bob_homodyne",
                  "darkcount", "bob_bac"]

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"eta": _num, "n_b": _num, "gamma": _num, "p_d": _num},
        },
        "budget": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": _num,
                "delta": _num,
                "n": _num,
                "epsilons": {"type": "array", "items": _num},
                "deltas": {"type": "array", "items": _num},
                "n_grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "stop", "per_decade"],
                    "properties": {"start": _num, "stop": _num, "per_decade": _pos_int},
                },
                "n_values": {"type": "array", "items": _num},
            },
        },
        "sim": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trials": _pos_int,
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                "codebook": {"enum": ["gaussian_coherent", "ook_twostage"]},
                "m": {"type": "integer", "minimum": 2},
                "workers": _pos_int,
                "scenarios": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "n"],
                        "properties": {
                            "kind": {"enum": SCENARIO_KINDS},
                            "n": _pos_int,
                            "m": {"type": "integer", "minimum": 2},
                            "epsilon": _num,
                            "nbar": _num,
                            "alpha_sq": _num,
                            "q": _num,
                            "p_b": _num,
                            "p_fa": _num,
                            "delta": _num,
                            "bits": _num,
                            "trials": _pos_int,
                            "eta": _num,
                            "n_b": _num,
                            "p_d": _num,
                            "label": {"type": "string"},
                        },
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json", "svg"]}},
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"tolerance_scale": _num},
        },
    },
}


@dataclass(frozen=True)
class Channel:
    eta: float = 0.1
    n_b: float = 1e-6
    gamma: float | None = None
    p_d: float = 0.0


@dataclass(frozen=True)
class Budget:
    epsilon: float = 0.1
    delta: float = 0.1
    n: float = 1e14
    epsilons: tuple[float, ...] = (0.01, 0.1)
    deltas: tuple[float, ...] = (0.01, 0.1)
    n_grid: tuple[float, float, int] = (1e10, 1e16, 4)
    n_values: tuple[float, ...] | None = None

    def grid(self) -> list[float]:
        """Log-spaced n values (integers), or the explicit list when given."""
        if self.n_values is not None:
            return sorted({float(round(v)) for v in self.n_values})
        start, stop, per = self.n_grid
        if start <= 0 or stop < start:
            return []
        k = int(round(np.log10(stop / start) * per))
        return sorted({float(round(v)) for v in np.logspace(np.log10(start), np.log10(stop), k + 1)})


@dataclass(frozen=True)
class SimSettings:
    trials: int = 20000
    seed: int | None = None
    codebook: str = "gaussian_coherent"
    m: int = 16
    workers: int = 1
    scenarios: tuple[dict, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    channel: Channel = field(default_factory=Channel)
    budget: Budget = field(default_factory=Budget)
    sim: SimSettings = field(default_factory=SimSettings)
    output_path: str | None = None
    output_format: str | None = None
    tolerance_scale: float = 1.0

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        b = dict(doc.get("budget", {}))
        if "n_grid" in b:
            g = b["n_grid"]
            b["n_grid"] = (g["start"], g["stop"], g["per_decade"])
        for key in ("epsilons", "deltas", "n_values"):
            if key in b:
                b[key] = tuple(b[key])
        s = dict(doc.get("sim", {}))
        if "scenarios" in s:
            s["scenarios"] = tuple(s["scenarios"])
        out = doc.get("output", {})
        return cls(
            channel=Channel(**doc.get("channel", {})),
            budget=Budget(**b),
            sim=SimSettings(**s),
            output_path=out.get("path"),
            output_format=out.get("format"),
            tolerance_scale=doc.get("verify", {}).get("tolerance_scale", 1.0),
        )

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(doc)
