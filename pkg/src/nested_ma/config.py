"""Flat ``key = value`` experiment configuration.

Grammar, one entry per line::

    # comment (also allowed after a value)
    key = value
    list_key = a, b, c

Recognized keys:

``scenarios``
    comma list of ``case:alpha`` pairs, e.g. ``1:0.75, 2:1.5``.
``case`` / ``alpha``
    alternative to ``scenarios``; every case is crossed with every alpha.
``snr``, ``n``, ``replicates``, ``seed``, ``mode``, ``oracle_nu``,
``figure_oracle``, ``workers``, ``output``
    as in :class:`~nested_ma.simulation.SimulationConfig`; ``n`` is a list.
``estimators``
    comma list of preset names (``MMA1`` .. ``SMA3``) or custom names.
``estimator.<name>``
    a custom estimator as space separated ``field=value`` pairs, e.g.
    ``estimator.S6 = set=geometric solver=stein tau=0.1667 nu=log``.

Unknown keys, repeated keys and malformed values raise ``ConfigError``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError, NestedMAError
from .simulation import DEFAULT_N_GRID, PRESETS, CaseSpec, EstimatorSpec, SimulationConfig

SCALAR_KEYS = {
    "snr", "replicates", "seed", "mode", "oracle_nu", "figure_oracle", "workers", "output",
}
LIST_KEYS = {"scenarios", "case", "alpha", "n", "estimators"}
CUSTOM_FIELDS = {"set", "solver", "penalty", "tau", "nu", "block"}
_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_\-]*$")


@dataclass(frozen=True)
class ExperimentConfig:
    """One config file: a simulation per (case, alpha) scenario plus the output path."""

    simulations: tuple[SimulationConfig, ...]
    output: str | None = None
    # The ``mode`` value as written, or None when the file leaves it out.
    explicit_mode: str | None = None

    @property
    def mode(self) -> str:
        return self.simulations[0].mode


def parse_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _split(value: str) -> list[str]:
    items = [v.strip() for v in value.split(",")]
    if any(not v for v in items):
        raise ConfigError(f"empty item in list {value!r}")
    return items


def _num(text: str, kind, key: str):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def _custom_estimator(name: str, value: str) -> EstimatorSpec:
    fields = {}
    for token in value.split():
        if "=" not in token:
            raise ConfigError(f"estimator.{name}: expected field=value, got {token!r}")
        k, v = token.split("=", 1)
        if k not in CUSTOM_FIELDS:
            raise ConfigError(f"estimator.{name}: unknown field {k!r}")
        if k in fields:
            raise ConfigError(f"estimator.{name}: duplicate field {k!r}")
        fields[k] = v
    if "set" not in fields or "solver" not in fields:
        raise ConfigError(f"estimator.{name}: 'set' and 'solver' are required")
    kwargs = {"model_set": fields["set"], "solver": fields["solver"]}
    if "penalty" in fields:
        p = fields["penalty"]
        kwargs["penalty"] = p if p == "logn" else _num(p, float, f"estimator.{name}.penalty")
    if "tau" in fields:
        t = fields["tau"]
        kwargs["tau"] = None if t == "none" else _num(t, float, f"estimator.{name}.tau")
    if "nu" in fields:
        kwargs["nu_mode"] = fields["nu"]
    if "block" in fields:
        kwargs["block"] = _num(fields["block"], int, f"estimator.{name}.block")
    try:
        return EstimatorSpec(name, **kwargs)
    except NestedMAError as exc:
        raise ConfigError(f"estimator.{name}: {exc}") from None


def _scenarios(entries: dict[str, str]) -> list[tuple[int, float]]:
    if "scenarios" in entries:
        if "case" in entries or "alpha" in entries:
            raise ConfigError("give either 'scenarios' or 'case'/'alpha', not both")
        out = []
        for item in _split(entries["scenarios"]):
            if item.count(":") != 1:
                raise ConfigError(f"scenarios: expected case:alpha, got {item!r}")
            c, a = item.split(":")
            out.append((_num(c, int, "scenarios"), _num(a, float, "scenarios")))
        return out
    if "case" not in entries or "alpha" not in entries:
        raise ConfigError("missing 'scenarios' (or both 'case' and 'alpha')")
    cases = [_num(c, int, "case") for c in _split(entries["case"])]
    alphas = [_num(a, float, "alpha") for a in _split(entries["alpha"])]
    return [(c, a) for c in cases for a in alphas]


def build_config(entries: dict[str, str]) -> ExperimentConfig:
    customs = {}
    for key, value in entries.items():
        if key.startswith("estimator."):
            name = key[len("estimator."):]
            if not _NAME.match(name):
                raise ConfigError(f"invalid estimator name {name!r}")
            customs[name] = _custom_estimator(name, value)
        elif key not in SCALAR_KEYS | LIST_KEYS:
            raise ConfigError(f"unknown key {key!r}")

    names = _split(entries["estimators"]) if "estimators" in entries else list(customs)
    if not names:
        raise ConfigError("no estimators given")
    estimators = []
    for name in names:
        if name in customs:
            estimators.append(customs[name])
        elif name in PRESETS:
            estimators.append(PRESETS[name])
        else:
            raise ConfigError(f"unknown estimator {name!r}")
    unused = set(customs) - set(names)
    if unused:
        raise ConfigError(f"custom estimators defined but not listed: {sorted(unused)}")

    g = entries.get
    n_values = tuple(_num(v, int, "n") for v in _split(g("n"))) if g("n") else DEFAULT_N_GRID
    base = dict(
        estimators=tuple(estimators),
        n_values=n_values,
        replicates=_num(g("replicates", "100"), int, "replicates"),
        seed=_num(g("seed", "20240101"), int, "seed"),
        mode=g("mode", "table"),
        oracle_nu_mode=g("oracle_nu", "log"),
        figure_oracle=g("figure_oracle", "shared"),
        workers=_num(g("workers", "1"), int, "workers"),
    )
    if base["seed"] < 0 or base["seed"] >= 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {base['seed']}")
    snr = _num(g("snr", "1"), float, "snr")
    sims = []
    try:
        for case_id, alpha in _scenarios(entries):
            sims.append(SimulationConfig(case=CaseSpec(case_id, alpha, snr), **base))
    except NestedMAError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(tuple(sims), g("output"), g("mode"))


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return build_config(parse_text(text))


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    """Replace simulation fields (e.g. ``workers``) in every scenario."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return cfg
    try:
        return replace(cfg, simulations=tuple(replace(s, **kw) for s in cfg.simulations))
    except NestedMAError as exc:
        raise ConfigError(str(exc)) from None
