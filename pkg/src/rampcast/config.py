"""Run configuration: INI file, defaults, overrides, and fingerprinting.

Every command resolves its settings the same way: built-in defaults,
then the optional config file, then command-line overrides. The
resolved mapping is hashed (sha256 over a canonical dump) and that
fingerprint is embedded in every artifact together with the seed, which
is what makes runs byte-for-byte reproducible and auditable.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .data import RampConfig
from .errors import InputDataError
from .rbm import TrainConfig

_DEFAULTS = {
    "run": {
        "seed": "0",
        "out": ".",
    },
    "ramp": {
        "sampling_minutes": "10",
        "delta_t_minutes": "30",
        "threshold_h": "16",
    },
    "wavelet": {
        "filter": "haar",
        "window": "8",
        "levels": "3",
    },
    "dbn": {
        "hidden_units": "70,70",
        "learning_rate": "0.08",
        "momentum": "0.9",
        "cd_steps": "1",
        "pretrain_epochs": "50",
        "finetune_iters": "500",
        "finetune_lr": "0.05",
        "batch_size": "32",
        "eq8_literal": "false",
    },
    "split": {
        "train_rows": "1800",
    },
    "selection": {
        "enabled": "true",
        "max_lag": "9",
        "pretrain_epochs": "10",
        "finetune_iters": "50",
        "val_fraction": "0.2",
    },
    "chaos": {
        "delays": "1,2,3,4",
        "dimensions": "2,3,4,5",
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_int(raw: dict, section: str, key: str) -> int:
    try:
        return int(raw[section][key])
    except ValueError:
        raise InputDataError(f"config {section}.{key}: expected an integer, got {raw[section][key]!r}") from None


def _parse_float(raw: dict, section: str, key: str) -> float:
    try:
        return float(raw[section][key])
    except ValueError:
        raise InputDataError(f"config {section}.{key}: expected a number, got {raw[section][key]!r}") from None


def _parse_bool(raw: dict, section: str, key: str) -> bool:
    val = raw[section][key].strip().lower()
    if val in _TRUE:
        return True
    if val in _FALSE:
        return False
    raise InputDataError(f"config {section}.{key}: expected a boolean, got {raw[section][key]!r}")


def _parse_int_list(raw: dict, section: str, key: str) -> tuple:
    text = raw[section][key]
    try:
        vals = tuple(int(part.strip()) for part in text.split(",") if part.strip())
    except ValueError:
        raise InputDataError(f"config {section}.{key}: expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise InputDataError(f"config {section}.{key}: empty list")
    return vals


@dataclass
class RunConfig:
    """Typed view of the resolved configuration."""

    raw: dict = field(repr=False)
    seed: int
    out_dir: Path
    ramp: RampConfig
    wavelet_filter: str
    window: int
    levels: int
    hidden_units: tuple
    train: TrainConfig
    train_rows: int
    selection_enabled: bool
    selection_max_lag: int
    selection_pretrain_epochs: int
    selection_finetune_iters: int
    selection_val_fraction: float
    chaos_delays: tuple
    chaos_dimensions: tuple

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "RunConfig":
        """Resolve defaults <- file <- overrides into a typed config.

        Unknown sections or keys in the file are rejected so typos fail
        loudly. overrides maps 'section.key' to a string value.
        """
        raw = {s: dict(kv) for s, kv in _DEFAULTS.items()}
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise InputDataError(f"config file not found: {path}")
            parser = configparser.ConfigParser()
            try:
                with open(path) as fh:
                    parser.read_file(fh)
            except configparser.Error as exc:
                raise InputDataError(f"config file {path}: {exc}") from exc
            for section in parser.sections():
                if section not in raw:
                    raise InputDataError(f"config file {path}: unknown section [{section}]")
                for key, value in parser.items(section):
                    if key not in raw[section]:
                        raise InputDataError(f"config file {path}: unknown key {section}.{key}")
                    raw[section][key] = value
        for dotted, value in (overrides or {}).items():
            section, key = dotted.split(".", 1)
            if section not in raw or key not in raw[section]:
                raise InputDataError(f"unknown config override {dotted}")
            raw[section][key] = str(value)
        return cls._from_raw(raw)

    @classmethod
    def _from_raw(cls, raw: dict) -> "RunConfig":
        try:
            ramp = RampConfig(
                sampling_minutes=_parse_int(raw, "ramp", "sampling_minutes"),
                delta_t_minutes=_parse_int(raw, "ramp", "delta_t_minutes"),
                threshold_h=_parse_float(raw, "ramp", "threshold_h"),
            )
            train = TrainConfig(
                learning_rate=_parse_float(raw, "dbn", "learning_rate"),
                momentum=_parse_float(raw, "dbn", "momentum"),
                cd_steps=_parse_int(raw, "dbn", "cd_steps"),
                pretrain_epochs=_parse_int(raw, "dbn", "pretrain_epochs"),
                finetune_max_iters=_parse_int(raw, "dbn", "finetune_iters"),
                finetune_lr=_parse_float(raw, "dbn", "finetune_lr"),
                batch_size=_parse_int(raw, "dbn", "batch_size"),
                eq8_literal=_parse_bool(raw, "dbn", "eq8_literal"),
            )
        except ValueError as exc:
            raise InputDataError(f"bad config value: {exc}") from exc
        return cls(
            raw=raw,
            seed=_parse_int(raw, "run", "seed"),
            out_dir=Path(raw["run"]["out"]),
            ramp=ramp,
            wavelet_filter=raw["wavelet"]["filter"],
            window=_parse_int(raw, "wavelet", "window"),
            levels=_parse_int(raw, "wavelet", "levels"),
            hidden_units=_parse_int_list(raw, "dbn", "hidden_units"),
            train=train,
            train_rows=_parse_int(raw, "split", "train_rows"),
            selection_enabled=_parse_bool(raw, "selection", "enabled"),
            selection_max_lag=_parse_int(raw, "selection", "max_lag"),
            selection_pretrain_epochs=_parse_int(raw, "selection", "pretrain_epochs"),
            selection_finetune_iters=_parse_int(raw, "selection", "finetune_iters"),
            selection_val_fraction=_parse_float(raw, "selection", "val_fraction"),
            chaos_delays=_parse_int_list(raw, "chaos", "delays"),
            chaos_dimensions=_parse_int_list(raw, "chaos", "dimensions"),
        )

    def canonical_dump(self) -> str:
        """Stable text form of everything that affects computation.

        run.out is a location, not a parameter: writing the same run to
        a different directory must not change the fingerprint.
        """
        lines = []
        for section in sorted(self.raw):
            for key in sorted(self.raw[section]):
                if (section, key) == ("run", "out"):
                    continue
                lines.append(f"{section}.{key} = {self.raw[section][key]}")
        return "\n".join(lines) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_dump().encode()).hexdigest()

    def artifact_comment(self) -> str:
        """The provenance line embedded in every CSV artifact."""
        return f"seed={self.seed} config_sha256={self.sha256}"
