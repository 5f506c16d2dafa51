"""Run configuration: parsing, validation, and byte-stable serialization.

Epsilon values are kept as the literal strings supplied on the command line
("2^-14", "1e-3", "0.25") so a config can be serialized and re-parsed
byte-identically; numeric values are derived on demand. Power-of-two
literals are evaluated with ldexp, not floating-point pow, so "2^-52" is
exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

__all__ = ["parse_epsilon", "format_epsilon", "RunConfig"]

COMMANDS = ("scan", "psi", "spectrum", "sigma-fit", "decay", "domain")
POTENTIALS = ("fex", "bump", "x2", "x", "sl", "const")
FORMATS = ("csv", "json")


def parse_epsilon(text: str) -> float:
    """Parse an epsilon literal; "2^-14" and "2^12" are exact powers of two."""
    s = text.strip()
    if "^" in s:
        base, _, expo = s.partition("^")
        if base.strip() != "2":
            raise ValueError("only base-2 power literals are supported: %r" % text)
        return math.ldexp(1.0, int(expo.strip()))
    val = float(s)
    if not (val > 0.0 and math.isfinite(val)):
        raise ValueError("epsilon must be positive and finite: %r" % text)
    return val


def format_epsilon(value: float) -> str:
    """Shortest literal that parse_epsilon maps back to the same float."""
    m, e = math.frexp(value)
    if m == 0.5:  # exact power of two
        return "2^%d" % (e - 1)
    return repr(value)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; identical configs produce identical outputs."""

    command: str
    f: str = "fex"
    k: float = 4.0
    c: float = 1.0
    eps: tuple[str, ...] = ("2^-8",)
    L: float | None = None
    N: int | None = None
    n: int = 5
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    seed: int = 0
    scan: str = "adaptive"
    T: float = 3.0
    dt: float | None = None
    recipe: str | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError("unknown command %r" % self.command)
        if self.f not in POTENTIALS:
            raise ValueError("unknown potential %r" % self.f)
        if self.format not in FORMATS:
            raise ValueError("unknown format %r" % self.format)
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        for text in self.eps:
            parse_epsilon(text)

    @property
    def eps_values(self) -> tuple[float, ...]:
        return tuple(parse_epsilon(t) for t in self.eps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps"] = list(self.eps)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        d = json.loads(text)
        d["eps"] = tuple(d["eps"])
        return cls(**d)
