"""Flat ``key = value`` experiment configuration files.

Example::

    # slab test case
    kappa = 1.5
    sigma = 1.5
    cells = 1000
    closures = pn:3, diffcorr:3:modified
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from mclab.closures import ClosureDescriptor
from mclab.moment_algebra import DecayParameters, as_rational
from mclab.solver import ConstantProfile, GaussianBump, Grid, SolverConfig

DEFAULT_CLOSURES = ("pn:0", "diffcorr:0", "diffcorr:0:truncated", "diffcorr:0:modified")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return repr(v) if isinstance(v, float) else str(v)


def parse_profile(text: str):
    parts = [p.strip() for p in text.split(":")]
    kind, args = parts[0].lower(), [float(a) for a in parts[1:]]
    if kind == "gaussian" and len(args) <= 2:
        return GaussianBump(*args)
    if kind == "constant" and len(args) <= 1:
        return ConstantProfile(*args)
    raise ValueError(f"unknown profile {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    kappa: Fraction = Fraction(3, 2)
    sigma: Fraction = Fraction(3, 2)
    alpha: Fraction = Fraction(1, 3)
    source: str = "none"
    profile: str = "gaussian"
    cells: int = 1000
    domain: tuple[float, float] = (0.0, 1.0)
    dt_factor: float = 0.8
    t_end: float = 0.4
    output_times: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)
    error_dt: float = 0.01
    closures: tuple[str, ...] = DEFAULT_CLOSURES
    n_ref: int = 51
    output_dir: str = "out"
    error_mode: str = "absolute"

    # validated views ------------------------------------------------------
    @property
    def decay(self) -> DecayParameters:
        return DecayParameters(self.kappa, self.sigma)

    @property
    def grid(self) -> Grid:
        return Grid(self.cells, *self.domain)

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(self.dt_factor, self.t_end, self.output_times)

    @property
    def initial_profile(self):
        return parse_profile(self.profile)

    def descriptors(self) -> list[ClosureDescriptor]:
        out = []
        for c in self.closures:
            d = ClosureDescriptor.parse(c)
            if d.family.value in ("sp3", "ssp3"):
                d = ClosureDescriptor(d.family, alpha=self.alpha)
            out.append(d)
        return out

    def error_times(self) -> list[float]:
        """Error sample times: ``0, error_dt, 2 error_dt, ...`` plus outputs and ``t_end``."""
        k = int(self.t_end / self.error_dt + 1e-9)
        times = {round(i * self.error_dt, 12) for i in range(k + 1)}
        times |= set(self.output_times) | {0.0, float(self.t_end)}
        return sorted(t for t in times if t <= self.t_end)

    def to_text(self) -> str:
        lines = [
            f"kappa = {_fmt(self.kappa)}",
            f"sigma = {_fmt(self.sigma)}",
            f"alpha = {_fmt(self.alpha)}",
            f"source = {self.source}",
            f"profile = {self.profile}",
            f"cells = {self.cells}",
            f"domain = {_fmt(self.domain[0])}, {_fmt(self.domain[1])}",
            f"dt_factor = {_fmt(self.dt_factor)}",
            f"t_end = {_fmt(self.t_end)}",
            "output_times = " + ", ".join(_fmt(t) for t in self.output_times),
            f"error_dt = {_fmt(self.error_dt)}",
            "closures = " + ", ".join(self.closures),
            f"n_ref = {self.n_ref}",
            f"output_dir = {self.output_dir}",
            f"error_mode = {self.error_mode}",
        ]
        return "\n".join(lines) + "\n"


def _floats(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",")]
    if text.strip() == "":
        return ()
    return tuple(float(s) for s in items)


def _nonneg_rational(name):
    def conv(text):
        v = as_rational(text)
        if v < 0:
            raise ValueError(f"{name} must be ≥ 0")
        return v
    return conv


def _domain(text):
    vals = _floats(text)
    if len(vals) != 2:
        raise ValueError("domain needs two numbers 'a, b'")
    return vals


def _closures(text):
    labels = tuple(s.strip() for s in text.split(",") if s.strip())
    return tuple(ClosureDescriptor.parse(s).label for s in labels)


def _choice(*options):
    def conv(text):
        v = text.strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return v
    return conv


_CONVERTERS = {
    "kappa": _nonneg_rational("kappa"),
    "sigma": _nonneg_rational("sigma"),
    "alpha": as_rational,
    "source": _choice("none"),
    "profile": lambda s: (parse_profile(s), s.strip())[1],
    "cells": int,
    "domain": _domain,
    "dt_factor": float,
    "t_end": float,
    "output_times": _floats,
    "error_dt": float,
    "closures": _closures,
    "n_ref": int,
    "output_dir": str.strip,
    "error_mode": _choice("absolute", "signed"),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; missing keys keep the slab test-case defaults."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[key] = _CONVERTERS[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        lines[key] = lineno
    if "output_times" not in values and "t_end" in values:
        default = ExperimentConfig.output_times
        values["output_times"] = tuple(t for t in default if t <= values["t_end"])
    cfg = replace(ExperimentConfig(), **values)
    _validate(cfg, lines)
    return cfg


def _validate(cfg: ExperimentConfig, lines: dict) -> None:
    checks = [
        (("kappa", "sigma"), lambda: cfg.decay),
        (("cells", "domain"), lambda: cfg.grid),
        (("dt_factor", "t_end", "output_times"), lambda: cfg.solver),
        (("alpha",), lambda: ClosureDescriptor("sp3", alpha=cfg.alpha)),
    ]
    for keys, check in checks:
        try:
            check()
        except ValueError as exc:
            msg = str(exc)
            named = [k for k in keys if k in msg and k in lines]
            present = [lines[k] for k in keys if k in lines]
            named.sort(key=msg.index)
            line = lines[named[0]] if named else (max(present) if present else None)
            raise ConfigError(msg, line) from None
    if cfg.error_dt <= 0:
        raise ConfigError("error_dt must be > 0", lines.get("error_dt"))
    if cfg.n_ref < 0:
        raise ConfigError("n_ref must be ≥ 0", lines.get("n_ref"))
