"""Run configuration: dotted keys with defaults, overridable from a
key = value config file and from command-line flags of the same name.

Example config file::

    # solver settings
    model.kind = LINK
    solver.lam = 10.0
    eval.ks = 5,20
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .partial import DecayParams
from .data import LogFormat
from .solvers import MODEL_KINDS, SolverConfig

PROTOCOLS = ("iterative", "leave_one_out")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip() != "")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip() != "")


# key -> (parser, default, help)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any, str]] = {
    "data.delimiter": (str, ",", "column delimiter in interaction logs"),
    "data.has_header": (_parse_bool, False, "skip the first log line"),
    "data.min_item_freq": (int, 5, "drop items occurring fewer times than this"),
    "data.min_session_len": (int, 2, "drop sessions shorter than this"),
    "data.ratios": (_parse_floats, (0.8, 0.1, 0.1), "train,valid,test split ratios"),
    "model.kind": (str, "LINK", f"model kind, one of {'/'.join(MODEL_KINDS)}"),
    "solver.lam": (float, 1.0, "ridge / teacher-pull weight (> 0)"),
    "solver.xi": (float, 0.0, "diagonal cap for similarity models, in [0,1)"),
    "solver.alpha": (float, 0.5, "similarity/transition balance, in [0,1]"),
    "solver.beta": (float, 0.5, "self-distillation mix, in [0,1]"),
    "solver.tau": (float, 1.0, "teacher softmax temperature (> 0)"),
    "decay.pos": (float, 1.0, "position decay scale for training pairs"),
    "decay.inf": (float, 1.0, "position decay scale at inference"),
    "teacher.smoothing": (float, 1.0, "additive smoothing for the Markov teacher"),
    "eval.protocol": (str, "iterative", f"one of {'/'.join(PROTOCOLS)}"),
    "eval.ks": (_parse_ints, (5, 20), "ranking cutoffs"),
    "eval.topn": (int, 20, "list length for the predict command"),
    "eval.exclude_seen": (_parse_bool, False, "mask prefix items from rankings"),
    "eval.train_file": (str, "", "train split for head/tail popularity (optional)"),
    "synth.seed": (int, 42, "seed for synthetic data generation"),
    "synth.items": (int, 200, "synthetic vocabulary size"),
    "synth.sessions": (int, 5000, "synthetic session count"),
    "synth.min_len": (int, 3, "synthetic minimum session length"),
    "synth.max_len": (int, 10, "synthetic maximum session length"),
    "synth.branching": (int, 3, "preferred successors per item"),
    "synth.noise": (float, 0.1, "probability of a random jump per step"),
    "threads": (int, 0, "cap BLAS worker threads (0 = library default)"),
}


class RunConfig:
    """Validated view over the merged configuration."""

    def __init__(self, values: dict[str, Any] | None = None):
        self.values: dict[str, Any] = {k: default for k, (_, default, _) in SCHEMA.items()}
        if values:
            for key, val in values.items():
                self.set(key, val)

    def set(self, key: str, value: Any) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = value

    def set_text(self, key: str, text: str) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        parser = SCHEMA[key][0]
        try:
            self.values[key] = parser(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def load_file(self, path: str | Path) -> None:
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, text = line.partition("=")
            self.set_text(key.strip(), text.strip())

    def validate(self) -> None:
        """Range-check every field; called before any command does work."""
        self.solver_config().validate()
        self.decay_params().validate()
        if self["model.kind"] not in MODEL_KINDS:
            raise ConfigError(f"model.kind must be one of {MODEL_KINDS}, got {self['model.kind']!r}")
        if self["eval.protocol"] not in PROTOCOLS:
            raise ConfigError(
                f"eval.protocol must be one of {PROTOCOLS}, got {self['eval.protocol']!r}"
            )
        if len(self["data.ratios"]) != 3:
            raise ConfigError(f"data.ratios needs three values, got {self['data.ratios']}")
        if abs(sum(self["data.ratios"]) - 1.0) > 1e-9 or any(r < 0 for r in self["data.ratios"]):
            raise ConfigError(f"data.ratios must be nonnegative and sum to 1: {self['data.ratios']}")
        if self["data.min_item_freq"] < 1:
            raise ConfigError("data.min_item_freq must be >= 1")
        if self["data.min_session_len"] < 2:
            raise ConfigError("data.min_session_len must be >= 2")
        if not self["eval.ks"] or any(k < 1 for k in self["eval.ks"]):
            raise ConfigError(f"eval.ks must be positive integers, got {self['eval.ks']}")
        if self["eval.topn"] < 0:
            raise ConfigError("eval.topn must be >= 0")
        if self["teacher.smoothing"] < 0:
            raise ConfigError("teacher.smoothing must be >= 0")
        if len(self["data.delimiter"]) != 1:
            raise ConfigError("data.delimiter must be a single character")
        if self["synth.min_len"] < 2 or self["synth.max_len"] < self["synth.min_len"]:
            raise ConfigError("synth lengths need 2 <= min_len <= max_len")
        if not 0.0 <= self["synth.noise"] <= 1.0:
            raise ConfigError("synth.noise must lie in [0, 1]")
        if self["synth.branching"] < 1 or self["synth.branching"] > self["synth.items"]:
            raise ConfigError("synth.branching must lie in [1, synth.items]")
        if self["threads"] < 0:
            raise ConfigError("threads must be >= 0")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            lam=self["solver.lam"],
            xi=self["solver.xi"],
            alpha=self["solver.alpha"],
            beta=self["solver.beta"],
            tau=self["solver.tau"],
        )

    def decay_params(self) -> DecayParams:
        return DecayParams(delta_pos=self["decay.pos"], delta_inf=self["decay.inf"])

    def log_format(self) -> LogFormat:
        return LogFormat(delimiter=self["data.delimiter"], has_header=self["data.has_header"])
