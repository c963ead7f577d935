"""Numerical tolerances shared by every layer, plus the key=value config loader."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Tolerances:
    trim: float = 1e-12        # relative to max |coeff|
    cluster: float = 1e-7      # absolute, after scaling roots to unit order
    pf: float = 1e-8           # partial-fraction / composition reconstruction, relative
    pole: float = 1e-12        # |den(z)| below pole * scale -> pole marker
    gcd: float = 1e-8          # root distance treated as a common factor
    boundary: float = 1e-6     # ||Phi| - 1| on the circle
    slope: float = 1e-9        # relative, |slope - 1|
    real: float = 1e-8         # imaginary parts treated as zero
    inner: float = 1e-10       # relative coefficient realness for innerness
    blaschke: float = 1e-9     # relative coefficient identity for finite Blaschke products
    witness: float = 1e-9      # Im r(z) must fall below -witness
    root_sweeps: int = 200
    degree_cap: int = 64

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)


DEFAULT = Tolerances()


class ConfigError(ValueError):
    pass


def parse_config(text: str, base: Tolerances = DEFAULT) -> Tolerances:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    fields = {f.name: f.type for f in dataclasses.fields(Tolerances)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            changes[key] = int(value) if fields[key] in ("int", int) else float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None
    return base.replace(**changes)


def load_config(path: str | Path, base: Tolerances = DEFAULT) -> Tolerances:
    return parse_config(Path(path).read_text(), base)
