"""TOML run configuration with strict key checking.

Example::

    [frequency]
    kind = "geometric"
    p = 0.9090909090909091

    [severity]
    kind = "pareto"
    alpha = 2.1
    lam = 2200

    [dependence]
    family = "independent"      # or theta01 / theta12 / theta012

    [options]
    request = "moments"
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import tomli

from .components import CollectiveRiskModel
from .dependence import ExplicitSmallD, ThetaSet, make_family
from .distributions import (Exponential, FrequencyDistribution, Gamma, GridSeverity, Lognormal, MixedErlang,
                            Pareto)
from .errors import ConfigError

REQUESTS = ("moments", "pmf", "risk", "components", "simulate", "order", "reproduce")

_FREQ_KEYS = {
    "poisson": {"rate"},
    "negative_binomial": {"r", "p"},
    "geometric": {"p"},
    "binomial": {"n", "p"},
    "degenerate": {"value"},
    "pmf": {"values"},
}
_SEV_KEYS = {
    "exponential": {"mean"},
    "gamma": {"shape", "rate"},
    "pareto": {"alpha", "lam", "mean"},
    "lognormal": {"mean", "variance"},
    "mixed_erlang": {"rate", "masses"},
    "grid": {"step", "masses"},
}
_DEP_KEYS = {"family", "alpha", "theta01", "theta12", "theta012"}
_OPT_DEFAULTS = {
    "request": "moments",
    "kappa": [0.99],
    "grid_step": None,
    "grid_len": 4096,
    "reps": 100_000,
    "seed": 20241017,
    "algorithm": 2,
    "n_boot": 0,
    "eps_alias": 1e-8,
    "out": None,
}


@dataclass(frozen=True)
class RunConfig:
    model: CollectiveRiskModel
    request: str = "moments"
    kappa: tuple = (0.99,)
    grid_step: Optional[float] = None
    grid_len: int = 4096
    reps: int = 100_000
    seed: int = 20241017
    algorithm: int = 2
    n_boot: int = 0
    eps_alias: float = 1e-8
    out: Optional[str] = None
    source: dict = field(default_factory=dict, repr=False)


def _section(doc: dict, name: str, where: str) -> dict:
    sec = doc.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"{where}: missing section [{name}]")
    return dict(sec)


def _take(sec: dict, allowed: set, name: str, where: str) -> dict:
    extra = sorted(set(sec) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) in [{name}]: {', '.join(extra)}")
    return sec


def _need(sec: dict, key: str, name: str, where: str):
    if key not in sec:
        raise ConfigError(f"{where}: [{name}] requires key {key!r}")
    return sec[key]


def build_frequency(sec: dict, where: str = "config") -> FrequencyDistribution:
    kind = _need(sec, "kind", "frequency", where)
    if kind not in _FREQ_KEYS:
        raise ConfigError(f"{where}: [frequency] kind {kind!r} not one of {sorted(_FREQ_KEYS)}")
    p = _take({k: v for k, v in sec.items() if k != "kind"}, _FREQ_KEYS[kind], "frequency", where)
    try:
        if kind == "poisson":
            return FrequencyDistribution.poisson(_need(p, "rate", "frequency", where))
        if kind == "negative_binomial":
            return FrequencyDistribution.negative_binomial(_need(p, "r", "frequency", where),
                                                           _need(p, "p", "frequency", where))
        if kind == "geometric":
            return FrequencyDistribution.geometric(_need(p, "p", "frequency", where))
        if kind == "binomial":
            return FrequencyDistribution.binomial(int(_need(p, "n", "frequency", where)),
                                                  _need(p, "p", "frequency", where))
        if kind == "degenerate":
            return FrequencyDistribution.degenerate(int(_need(p, "value", "frequency", where)))
        return FrequencyDistribution.from_pmf(_need(p, "values", "frequency", where))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: [frequency] {exc}") from exc


def build_severity(sec: dict, where: str = "config"):
    kind = _need(sec, "kind", "severity", where)
    if kind not in _SEV_KEYS:
        raise ConfigError(f"{where}: [severity] kind {kind!r} not one of {sorted(_SEV_KEYS)}")
    p = _take({k: v for k, v in sec.items() if k != "kind"}, _SEV_KEYS[kind], "severity", where)
    try:
        if kind == "exponential":
            return Exponential(_need(p, "mean", "severity", where))
        if kind == "gamma":
            return Gamma(_need(p, "shape", "severity", where), _need(p, "rate", "severity", where))
        if kind == "pareto":
            alpha = _need(p, "alpha", "severity", where)
            if ("lam" in p) == ("mean" in p):
                raise ConfigError(f"{where}: [severity] pareto needs exactly one of 'lam' or 'mean'")
            return Pareto(alpha, p["lam"]) if "lam" in p else Pareto.from_mean(alpha, p["mean"])
        if kind == "lognormal":
            return Lognormal(_need(p, "mean", "severity", where), _need(p, "variance", "severity", where))
        if kind == "mixed_erlang":
            return MixedErlang(_need(p, "rate", "severity", where), _need(p, "masses", "severity", where))
        return GridSeverity(_need(p, "step", "severity", where), _need(p, "masses", "severity", where))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: [severity] {exc}") from exc


def build_dependence(sec: dict, where: str = "config"):
    _take(sec, _DEP_KEYS, "dependence", where)
    thetas = {k: sec[k] for k in ("theta01", "theta12", "theta012") if k in sec}
    try:
        if "family" in sec:
            if thetas:
                raise ConfigError(f"{where}: [dependence] give either 'family' or theta values, not both")
            return make_family(sec["family"], sec.get("alpha"))
        if not thetas:
            raise ConfigError(f"{where}: [dependence] requires 'family' or theta01/theta12/theta012")
        return ExplicitSmallD(ThetaSet.trivariate(thetas.get("theta01", 0.0), thetas.get("theta12", 0.0),
                                                  thetas.get("theta012", 0.0)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: [dependence] {exc}") from exc


def build_model(doc: dict, where: str = "config") -> CollectiveRiskModel:
    freq = build_frequency(_section(doc, "frequency", where), where)
    sev = build_severity(_section(doc, "severity", where), where)
    dep = build_dependence(_section(doc, "dependence", where), where)
    try:
        return CollectiveRiskModel(freq, sev, dep)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(doc: dict, where: str = "config") -> RunConfig:
    extra = sorted(set(doc) - {"frequency", "severity", "dependence", "options"})
    if extra:
        raise ConfigError(f"{where}: unknown section(s): {', '.join(extra)}")
    opts = _take(dict(doc.get("options", {})), set(_OPT_DEFAULTS), "options", where)
    merged = {**_OPT_DEFAULTS, **opts}
    if merged["request"] not in REQUESTS:
        raise ConfigError(f"{where}: [options] request must be one of {REQUESTS}")
    kappa = merged["kappa"]
    kappa = tuple(float(k) for k in (kappa if isinstance(kappa, list) else [kappa]))
    if any(not 0.0 < k < 1.0 for k in kappa):
        raise ConfigError(f"{where}: [options] kappa values must lie in (0, 1)")
    if merged["algorithm"] not in (1, 2):
        raise ConfigError(f"{where}: [options] algorithm must be 1 or 2")
    if int(merged["reps"]) < 2:
        raise ConfigError(f"{where}: [options] reps must be at least 2")
    return RunConfig(
        model=build_model(doc, where), request=merged["request"], kappa=kappa,
        grid_step=None if merged["grid_step"] is None else float(merged["grid_step"]),
        grid_len=int(merged["grid_len"]), reps=int(merged["reps"]), seed=int(merged["seed"]),
        algorithm=int(merged["algorithm"]), n_boot=int(merged["n_boot"]), eps_alias=float(merged["eps_alias"]),
        out=merged["out"], source=doc,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: file not found") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, str(path))


def load_model(path) -> CollectiveRiskModel:
    """Only the model sections of a config file; ``[options]`` is ignored."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: file not found") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return build_model(doc, str(path))
