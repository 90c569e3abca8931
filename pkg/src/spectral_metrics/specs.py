"""JSON spectrum specifications used by the command line.

A spec document holds exactly one of::

    {"Rational": {"num": [...], "den": [...]}}   # ascending powers of z
    {"Samples": {"values": [...]}}               # grid samples, length 2**k >= 16
    {"Expression": {"builtin": "paper_f1"}}

The builtins are the three example spectra of the triangle experiment.
``paper_f3`` keeps its denominator exactly as published, with the factor
``z^2 + .9z + .99`` appearing twice.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from .core import RationalPsd, SpectrumGrid, sample_rational
from .errors import SpecParseError, SpectralError

BUILTINS: dict[str, RationalPsd] = {
    # |(z - .99) / (z^2 + .6z + .99)|^2
    "paper_f1": RationalPsd([-0.99, 1.0], [0.99, 0.6, 1.0]),
    # |1 / (z^2 - .3z + .99)|^2
    "paper_f2": RationalPsd([1.0], [0.99, -0.3, 1.0]),
    # |(z + .9)(z^2 + .6z + .99) / ((z^2 + .9z + .99)(z^2 + .9z + .99))|^2
    "paper_f3": RationalPsd(
        P.polymul([0.9, 1.0], [0.99, 0.6, 1.0]),
        P.polymul([0.99, 0.9, 1.0], [0.99, 0.9, 1.0]),
    ),
}

BUILTIN_HELP = {
    "paper_f1": "|(z-.99)/(z^2+.6z+.99)|^2",
    "paper_f2": "|1/(z^2-.3z+.99)|^2",
    "paper_f3": "|(z+.9)(z^2+.6z+.99)/((z^2+.9z+.99)(z^2+.9z+.99))|^2 (repeated factor as published)",
}


@dataclass(frozen=True)
class RationalSpec:
    num: tuple
    den: tuple

    def to_json(self) -> dict:
        return {"Rational": {"num": list(self.num), "den": list(self.den)}}

    def grid(self, n: int) -> SpectrumGrid:
        return sample_rational(RationalPsd(self.num, self.den), n)


@dataclass(frozen=True)
class SamplesSpec:
    values: tuple

    def to_json(self) -> dict:
        return {"Samples": {"values": list(self.values)}}

    def grid(self, n: int) -> SpectrumGrid:
        if n != len(self.values):
            raise SpecParseError(
                "Samples.values", f"has {len(self.values)} samples but the grid size is {n}"
            )
        return SpectrumGrid(self.values)


@dataclass(frozen=True)
class BuiltinSpec:
    builtin: str

    def to_json(self) -> dict:
        return {"Expression": {"builtin": self.builtin}}

    def grid(self, n: int) -> SpectrumGrid:
        return sample_rational(BUILTINS[self.builtin], n)


SpectrumSpec = RationalSpec | SamplesSpec | BuiltinSpec


def _number_list(obj, field: str) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise SpecParseError(field, "must be a nonempty array of numbers")
    out = []
    for i, v in enumerate(obj):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise SpecParseError(f"{field}[{i}]", f"must be a finite number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _body(doc: dict, tag: str, keys: set) -> dict:
    body = doc[tag]
    if not isinstance(body, dict):
        raise SpecParseError(tag, "must be an object")
    missing = keys - body.keys()
    if missing:
        raise SpecParseError(f"{tag}.{sorted(missing)[0]}", "is required")
    extra = body.keys() - keys
    if extra:
        raise SpecParseError(f"{tag}.{sorted(extra)[0]}", "is not a recognized field")
    return body


def parse_spec(doc) -> SpectrumSpec:
    """Validate a decoded JSON document and return the matching spec."""
    if not isinstance(doc, dict) or len(doc) != 1:
        raise SpecParseError("<root>", "must be an object with exactly one of Rational, Samples, Expression")
    (tag,) = doc
    if tag == "Rational":
        body = _body(doc, tag, {"num", "den"})
        num = _number_list(body["num"], "Rational.num")
        den = _number_list(body["den"], "Rational.den")
        if not any(num):
            raise SpecParseError("Rational.num", "is identically zero")
        if not any(den):
            raise SpecParseError("Rational.den", "is identically zero")
        try:
            RationalPsd(num, den)
        except SpectralError as exc:
            raise SpecParseError("Rational.den", str(exc)) from None
        return RationalSpec(num, den)
    if tag == "Samples":
        body = _body(doc, tag, {"values"})
        values = _number_list(body["values"], "Samples.values")
        n = len(values)
        if n < 16 or n & (n - 1):
            raise SpecParseError("Samples.values", f"length must be a power of two >= 16, got {n}")
        if min(values) <= 0.0:
            raise SpecParseError("Samples.values", "samples must be strictly positive")
        return SamplesSpec(values)
    if tag == "Expression":
        body = _body(doc, tag, {"builtin"})
        name = body["builtin"]
        if name not in BUILTINS:
            raise SpecParseError("Expression.builtin", f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        return BuiltinSpec(name)
    raise SpecParseError("<root>", f"unknown variant {tag!r}")


def load_spec(arg: str) -> SpectrumSpec:
    """Resolve a command-line spectrum argument.

    Accepts a builtin name (``paper_f2``), inline JSON (starting with ``{``)
    or a path to a JSON file.
    """
    if arg in BUILTINS:
        return BuiltinSpec(arg)
    if arg.lstrip().startswith("{"):
        text = arg
    else:
        try:
            text = Path(arg).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise SpecParseError("<path>", f"no such spec file or builtin: {arg!r}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError("<json>", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_spec(doc)


def canonical_json(spec: SpectrumSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True, separators=(",", ":"))


def digest(spec: SpectrumSpec) -> str:
    """SHA-256 of the canonical JSON form of ``spec``."""
    return hashlib.sha256(canonical_json(spec).encode("utf-8")).hexdigest()


def samples_from_grid(f: SpectrumGrid) -> SamplesSpec:
    return SamplesSpec(tuple(float(v) for v in np.asarray(f.values)))
