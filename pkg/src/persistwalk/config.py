"""Loading of model, comb and hazard specifications from structured text.

Model files are TOML or JSON with keys ``K`` (optional), ``letters``
(optional), ``alpha`` (one table per letter) and ``jump_matrix`` (optional
for two letters, where it is forced antidiagonal).  Hazards use the compact
``kind:param,param`` string form on the command line and in files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .alphas import (
    AlphaSequence,
    ConstantAlpha,
    PoissonLikeAlpha,
    ScaledHazardAlpha,
    TableAlpha,
)
from .errors import ConfigError
from .hazards import ConstantHazard, Hazard, ParetoHazard, WeibullHazard
from .model import ModelSpec
from .vlmc import CombTree

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "alpha_from_config",
    "model_from_config",
    "load_model",
    "hazard_from_config",
    "comb_from_config",
    "load_comb",
]


def _load_structured(path) -> dict:
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            with open(path, "rb") as fh:
                return json.load(fh)
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def alpha_from_config(obj) -> AlphaSequence:
    """Build a switch sequence from its config table."""
    if isinstance(obj, AlphaSequence):
        return obj
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"alpha entry needs a 'kind' key, got {obj!r}")
    kind = obj["kind"]
    extra = {}
    if "alpha_inf" in obj:
        extra["alpha_inf"] = float(obj["alpha_inf"])
    try:
        if kind == "constant":
            return ConstantAlpha(float(obj["value"]), **extra)
        if kind in ("poisson", "poisson-like"):
            return PoissonLikeAlpha(float(obj["rho"]), **extra)
        if kind == "table":
            tail = alpha_from_config(obj["tail"]) if "tail" in obj else None
            return TableAlpha(
                values=tuple(float(v) for v in obj["values"]),
                tail=tail,
                hold_last=bool(obj.get("hold_last", False)),
                **extra,
            )
        if kind == "scaled-hazard":
            hazard = hazard_from_config(obj["hazard"])
            return ScaledHazardAlpha(rate=hazard.rate, step=float(obj["eps"]), **extra)
    except KeyError as exc:
        raise ConfigError(f"alpha kind {kind!r} is missing key {exc}") from exc
    raise ConfigError(f"unknown alpha kind {kind!r}")


def model_from_config(data: dict) -> ModelSpec:
    """Build a model from a parsed config dictionary."""
    if "alpha" not in data:
        raise ConfigError("model config needs an 'alpha' list (one entry per letter)")
    alphas = tuple(alpha_from_config(a) for a in data["alpha"])
    K = int(data.get("K", len(alphas)))
    if K != len(alphas):
        raise ConfigError(f"K={K} inconsistent with {len(alphas)} alpha entries")
    if "jump_matrix" in data:
        jump = tuple(tuple(float(x) for x in row) for row in data["jump_matrix"])
    elif K == 2:
        jump = ((0.0, 1.0), (1.0, 0.0))
    else:
        raise ConfigError("jump_matrix is required for more than two letters")
    letters = tuple(data["letters"]) if "letters" in data else (
        ("-1", "+1") if K == 2 else None
    )
    return ModelSpec(alphas=alphas, jump_matrix=jump, letters=letters)


def load_model(path) -> ModelSpec:
    return model_from_config(_load_structured(path))


def hazard_from_config(obj) -> Hazard:
    """Parse ``const:0.5`` / ``weibull:2,1`` / ``pareto:1.5,0.5`` forms."""
    if isinstance(obj, Hazard):
        return obj
    if not isinstance(obj, str):
        raise ConfigError(f"hazard must be a 'kind:params' string, got {obj!r}")
    kind, _, params = obj.partition(":")
    try:
        values = [float(p) for p in params.split(",")] if params else []
    except ValueError as exc:
        raise ConfigError(f"bad hazard parameters in {obj!r}") from exc
    try:
        if kind in ("const", "constant"):
            (value,) = values
            return ConstantHazard(value)
        if kind == "weibull":
            shape, scale = values
            return WeibullHazard(shape, scale)
        if kind == "pareto":
            exponent, threshold = values
            return ParetoHazard(exponent, threshold)
    except ValueError as exc:
        raise ConfigError(f"wrong parameter count for hazard {obj!r}") from exc
    raise ConfigError(f"unknown hazard kind {kind!r}")


def comb_from_config(data: dict) -> CombTree:
    """Build a comb tree from a parsed config dictionary.

    ``q01``/``q10`` are the finite-context switch rules (after runs of
    zeros / of ones); ``q0inf``/``q1inf`` are the switch probabilities of
    the infinite leaves in [0, 1], zero marking a reducible tree.
    """
    try:
        return CombTree(
            kind=data.get("kind", "double"),
            switch_after_zeros=alpha_from_config(data["q01"]),
            switch_after_ones=alpha_from_config(data["q10"]),
            q0inf_switch=float(data.get("q0inf", data.get("q0inf_switch", 0.5))),
            q1inf_switch=float(data.get("q1inf", data.get("q1inf_switch", 0.5))),
        )
    except KeyError as exc:
        raise ConfigError(f"comb config is missing key {exc}") from exc


def load_comb(path) -> CombTree:
    return comb_from_config(_load_structured(path))
