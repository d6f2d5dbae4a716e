"""TOML experiment configuration: parsing, defaults, validation, serialization.

Every key has a documented default; unknown keys are rejected with a
suggestion; parse -> serialize -> parse is a fixed point. Applied defaults
are recorded in a provenance map so a run can report which values came from
the file and which were filled in.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .data import Dataset, gen_synthetic, load_csv_dataset, load_idx
from .harness import RunConfig
from .nn import LrSchedule
from .schedule import ScheduleKind, ScheduleSpec, default_pretrain_fraction


class ConfigFileError(ValueError):
    """Config file cannot be parsed or fails validation."""


SCHEDULE_NAMES = [k.value for k in ScheduleKind]

# (default, expected type); float accepts int.
SCHEMA: dict[str, dict[str, tuple]] = {
    "dataset": {
        "kind": ("spirals", str),
        "n": (2000, int),
        "noise": (0.05, float),
        "seed": (1, int),
        "classes": (3, int),
        "images_path": ("", str),
        "labels_path": ("", str),
        "path": ("", str),
        "label_column": ("", str),
    },
    "network": {
        "layer_dims": ([2, 64, 64, 2], list),
    },
    "schedule": {
        "kind": ("one_cycle", str),
        "s_i": (0.0, float),
        "s_f": (0.95, float),
        "alpha": (14.0, float),
        "beta": (5.0, float),
        "pretrain_fraction": (-1.0, float),  # -1 = use the kind's default
        "n_prune_steps": (3, int),
    },
    "train": {
        "epochs": (60, int),
        "batch_size": (64, int),
        "momentum": (0.9, float),
        "prune_every": (0, int),
        "seed": (0, int),
    },
    "lr": {
        "lr_max": (0.001, float),
        "warmup_fraction": (0.25, float),
        "div_start": (25.0, float),
        "div_final": (1e4, float),
    },
    "experiment": {
        "schedules": (["one_cycle", "one_shot", "iterative", "agp"], list),
        "sparsities": ([0.8, 0.9, 0.95], list),
        "seeds": ([0, 1, 2], list),
        "alphas": ([13.0, 14.0, 15.0], list),
        "betas": ([3.0, 4.0, 5.0, 6.0, 7.0], list),
        "target_accuracy": (0.9, float),
        "max_epochs": (300, int),
        "increment": (0.25, float),
        "resolution": (201, int),
    },
}


@dataclass
class ExperimentConfig:
    values: dict[str, dict]  # fully resolved section -> key -> value
    provenance: dict[str, str] = field(default_factory=dict)  # "sec.key" -> file|default

    def schedule_spec(self, kind: str | None = None, **overrides) -> ScheduleSpec:
        s = self.values["schedule"]
        kind_name = kind or s["kind"]
        if kind_name not in SCHEDULE_NAMES:
            raise ConfigFileError(
                f"schedule.kind: unknown schedule {kind_name!r}; expected one of {SCHEDULE_NAMES}"
            )
        pretrain = s["pretrain_fraction"]
        fields = {
            "kind": ScheduleKind(kind_name),
            "s_i": s["s_i"],
            "s_f": s["s_f"],
            "alpha": s["alpha"],
            "beta": s["beta"],
            "pretrain_fraction": None if pretrain < 0 else pretrain,
            "n_prune_steps": s["n_prune_steps"],
        }
        fields.update(overrides)
        try:
            return ScheduleSpec(**fields)
        except ValueError as exc:
            raise ConfigFileError(f"schedule.{exc}") from exc

    def build_dataset(self) -> Dataset:
        d = self.values["dataset"]
        if d["kind"] in ("spirals", "gaussians", "moons"):
            return gen_synthetic(d["kind"], d["n"], d["noise"], d["seed"], d["classes"])
        if d["kind"] == "idx":
            if not d["images_path"] or not d["labels_path"]:
                raise ConfigFileError("dataset.images_path and dataset.labels_path required for kind=idx")
            return load_idx(d["images_path"], d["labels_path"], split_seed=d["seed"])
        if d["kind"] == "csv":
            if not d["path"] or not d["label_column"]:
                raise ConfigFileError("dataset.path and dataset.label_column required for kind=csv")
            return load_csv_dataset(d["path"], d["label_column"], split_seed=d["seed"])
        raise ConfigFileError(f"dataset.kind: unknown dataset kind {d['kind']!r}")

    def lr_schedule(self) -> LrSchedule:
        lr = self.values["lr"]
        try:
            return LrSchedule(lr["lr_max"], lr["warmup_fraction"], lr["div_start"], lr["div_final"])
        except ValueError as exc:
            raise ConfigFileError(f"lr.{exc}") from exc

    def run_config(self, dataset: Dataset | None = None, seed: int | None = None) -> RunConfig:
        t = self.values["train"]
        cfg = RunConfig(
            dataset=dataset if dataset is not None else self.build_dataset(),
            layer_dims=tuple(self.values["network"]["layer_dims"]),
            schedule=self.schedule_spec(),
            epochs=t["epochs"],
            batch_size=t["batch_size"],
            lr=self.lr_schedule(),
            momentum=t["momentum"],
            prune_every=t["prune_every"],
            seed=seed if seed is not None else t["seed"],
        )
        try:
            cfg.validate()
        except ValueError as exc:
            raise ConfigFileError(str(exc)) from exc
        return cfg

    def experiment_schedules(self) -> list[ScheduleSpec]:
        return [self.schedule_spec(kind=name) for name in self.values["experiment"]["schedules"]]


def _suggest(key: str, known: list[str]) -> str:
    close = difflib.get_close_matches(key, known, n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_value(section: str, key: str, value, expected_type) -> object:
    if expected_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigFileError(f"{section}.{key}: expected a number, got {value!r}")
        return float(value)
    if expected_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigFileError(f"{section}.{key}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, expected_type):
        raise ConfigFileError(
            f"{section}.{key}: expected {expected_type.__name__}, got {value!r}"
        )
    return value


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigFileError(f"{source}: TOML syntax error: {exc}") from exc

    values: dict[str, dict] = {}
    provenance: dict[str, str] = {}
    for section_name in raw:
        if section_name not in SCHEMA:
            raise ConfigFileError(
                f"{source}: unknown section [{section_name}]"
                f"{_suggest(section_name, list(SCHEMA))}"
            )
        if not isinstance(raw[section_name], dict):
            raise ConfigFileError(f"{source}: [{section_name}] must be a table")
    for section_name, schema in SCHEMA.items():
        given = raw.get(section_name, {})
        for key in given:
            if key not in schema:
                raise ConfigFileError(
                    f"{source}: unknown key {section_name}.{key}"
                    f"{_suggest(key, list(schema))}"
                )
        resolved = {}
        for key, (default, expected_type) in schema.items():
            if key in given:
                resolved[key] = _check_value(section_name, key, given[key], expected_type)
                provenance[f"{section_name}.{key}"] = "file"
            else:
                resolved[key] = default
                provenance[f"{section_name}.{key}"] = "default"
        values[section_name] = resolved

    cfg = ExperimentConfig(values, provenance)
    # surface semantic errors (bad schedule params, lr bounds) at parse time
    cfg.schedule_spec()
    cfg.lr_schedule()
    return cfg


def parse_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigFileError(f"{path}: no such file")
    return parse_config_text(path.read_text(), source=str(path))


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigFileError(f"cannot serialize value {value!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Emit the fully-resolved config; parsing it back yields the same config."""
    lines = []
    for section_name, section in cfg.values.items():
        lines.append(f"[{section_name}]")
        for key, value in section.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)
