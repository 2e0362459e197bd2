"""Flat ``key = value`` calibration files for :class:`~debtinflation.model.ModelParams`."""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

from .model import ModelParams, ShockDistribution, flexible_equilibrium

_FLOAT_KEYS = ("alpha", "A", "xi", "epsilon", "chi", "varphi", "psi", "K0", "D0")
_SHOCK_KEYS = ("G_family", "z_lo", "z_hi", "mu", "sigma")
KNOWN_KEYS = frozenset(_FLOAT_KEYS + _SHOCK_KEYS + ("W0",))


class CalibrationError(ValueError):
    pass


def parse_calibration(text: str, source: str = "<string>") -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CalibrationError(f"{source}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise CalibrationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise CalibrationError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    missing = [k for k in _FLOAT_KEYS + ("W0",) if k not in entries]
    if missing:
        raise CalibrationError(f"{source}: missing keys {', '.join(missing)}")
    return entries


def calibrate_W0(params: ModelParams) -> ModelParams:
    """Set ``W0`` to the flexible-wage nominal wage at ``P = 1``."""
    return params.replace(W0=flexible_equilibrium(1.0, params).W)


def params_from_entries(entries: dict[str, str], source: str = "<string>") -> ModelParams:
    def num(key, default=None):
        if key not in entries:
            return default
        try:
            return float(entries[key])
        except ValueError:
            raise CalibrationError(f"{source}: {key} is not a number: {entries[key]!r}") from None

    try:
        G = ShockDistribution(
            family=entries.get("G_family", "uniform"),
            z_lo=num("z_lo", 0.0),
            z_hi=num("z_hi", num("K0")),
            mu=num("mu", 0.0),
            sigma=num("sigma", 1.0),
        )
        auto = entries["W0"].lower() == "auto"
        values = {k: num(k) for k in _FLOAT_KEYS}
        params = ModelParams(W0=1.0 if auto else num("W0"), G=G, **values)
    except CalibrationError:
        raise
    except ValueError as exc:
        raise CalibrationError(f"{source}: {exc}") from None
    if auto:
        try:
            params = calibrate_W0(params)
        except Exception as exc:  # solver failure makes the file unusable
            raise CalibrationError(f"{source}: cannot set W0 = auto: {exc}") from None
    return params


def load_calibration(path: str | Path) -> ModelParams:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CalibrationError(f"cannot read calibration {path}: {exc}") from None
    return params_from_entries(parse_calibration(text, str(path)), str(path))


def default_calibration_text() -> str:
    return resources.files("debtinflation").joinpath("data/default.cfg").read_text()


def default_params() -> ModelParams:
    """The shipped calibration, with ``W0`` resolved to the flexible wage at ``P = 1``."""
    text = default_calibration_text()
    return params_from_entries(parse_calibration(text, "default.cfg"), "default.cfg")


def dump_calibration(params: ModelParams) -> str:
    lines = [f"{k} = {getattr(params, k)!r}" for k in _FLOAT_KEYS]
    lines.append(f"W0 = {params.W0!r}")
    G = params.G
    lines += [f"G_family = {G.family}", f"z_lo = {G.z_lo!r}", f"z_hi = {G.z_hi!r}"]
    if G.family == "truncnorm":
        lines += [f"mu = {G.mu!r}", f"sigma = {G.sigma!r}"]
    assert all(math.isfinite(getattr(params, k)) for k in _FLOAT_KEYS)
    return "\n".join(lines) + "\n"
