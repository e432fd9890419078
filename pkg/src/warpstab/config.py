"""Plain-text run configuration; the accepted grammar is ``GRAMMAR``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ValidationError
from .model import BaseSpectrum, WarpModel, make_warp_model
from .verdict import MeshPolicy

GRAMMAR = """\
config grammar, one `key = value` per line:
  model  = exp | cone | sinh      (required)
  n      = <int>                  (required, base dimension)
  kappa  = <list>                 TT eigenvalues of the Einstein operator
  lambda = <list>                 Laplace eigenvalues (default 0)
  mu     = <list>                 divergence-free 1-form eigenvalues
  domain = <lo>, <hi>             radial truncation, in r
  mesh   = <N>                    number of elements, at least 8
lists are comma-separated; numbers may be integers, decimals or fractions
such as -9/4 and are kept exact; '#' starts a comment; keys appear once."""
KEYS = ("model", "n", "kappa", "lambda", "mu", "domain", "mesh")


@dataclass(frozen=True)
class RunConfig:
    model: WarpModel
    spectrum: BaseSpectrum
    policy: MeshPolicy


def _number(text: str, key: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{key}: {text.strip()!r} is not a number") from None


def _list(text: str, key: str) -> tuple[Fraction, ...]:
    items = [t for t in text.split(",")]
    if any(not t.strip() for t in items):
        raise ValidationError(f"{key}: empty list entry in {text.strip()!r}")
    return tuple(_number(t, key) for t in items)


def _integer(text: str, key: str) -> int:
    x = _number(text, key)
    if x.denominator != 1:
        raise ValidationError(f"{key}: expected an integer, got {text.strip()!r}")
    return int(x)


def parse_config_text(text: str) -> dict:
    """Raw key -> string mapping, with syntax checks only."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ValidationError(f"line {lineno}: missing value for {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict) -> RunConfig:
    for key in ("model", "n"):
        if key not in raw:
            raise ValidationError(f"missing required key {key!r}")
    model = make_warp_model(raw["model"], _integer(raw["n"], "n"))
    spectrum = BaseSpectrum(
        kappa=_list(raw["kappa"], "kappa") if "kappa" in raw else (),
        lam=_list(raw["lambda"], "lambda") if "lambda" in raw else (Fraction(0),),
        mu=_list(raw["mu"], "mu") if "mu" in raw else (),
    )
    kw = {}
    if "mesh" in raw:
        N = _integer(raw["mesh"], "mesh")
        if N < 8:
            raise ValidationError(f"mesh: need at least 8 elements, got {N}")
        kw["N"] = N
    if "domain" in raw:
        bounds = _list(raw["domain"], "domain")
        if len(bounds) != 2:
            raise ValidationError("domain: expected '<lo>, <hi>'")
        lo, hi = (float(b) for b in bounds)
        if not (hi > lo):
            raise ValidationError("domain: need lo < hi")
        policy = MeshPolicy.from_r_domain(model, lo, hi, **kw)
    else:
        policy = MeshPolicy(**kw)
    return RunConfig(model, spectrum, policy)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return build_config(parse_config_text(text))
