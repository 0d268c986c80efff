"""Run configuration stored as TOML.

Example::

    output_dir = "runs/heis"
    suites = ["identity", "coclosed"]
    emit_plots = true

    [preset]
    name = "heisenberg7"          # or give brackets / phi inline:
    # brackets = [[1, 2, 0, -1.0], [3, 4, 0, -1.0], [5, 6, 0, -1.0]]
    # phi = [[0, 1, 2, 1.0], [0, 3, 4, 1.0], ...]

    [flow]
    kind = "modified_coflow"
    A = 7.0
    dt = 1e-3
    t_max = 1.0

Indices are 0-based.  ``brackets`` entries ``[i, j, k, c]`` mean
``[e_i, e_j] += c e_k``; ``phi`` entries ``[i, j, k, c]`` add ``c e^ijk``.
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, G2FlowError
from .exterior import DIM, AltForm
from .flows import FlowSpec
from .lie import LieAlgebra
from .presets import get_preset
from .structure import standard_phi

SUITES = ("identity", "coclosed", "laplacian_crosscheck", "evolution_crosscheck")
_TOP_KEYS = {"output_dir", "suites", "emit_plots", "preset", "flow"}


def _quadruples(raw, what: str) -> tuple[tuple[int, int, int, float], ...]:
    out = []
    for entry in raw:
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise ConfigError(f"{what} entries must be [i, j, k, value], got {entry!r}")
        i, j, k, value = entry
        idx = (i, j, k)
        if not all(isinstance(n, int) and not isinstance(n, bool) and 0 <= n < DIM for n in idx):
            raise ConfigError(f"{what} indices must be integers in 0..{DIM - 1}, got {entry!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{what} value must be a number, got {entry!r}")
        out.append((i, j, k, float(value)))
    return tuple(out)


@dataclass(frozen=True)
class PresetSpec:
    name: str | None = None
    brackets: tuple | None = None
    phi: tuple | None = None

    def __post_init__(self):
        if self.name is None and self.brackets is None:
            raise ConfigError("preset needs a name or inline brackets")
        if self.name is not None and (self.brackets is not None or self.phi is not None):
            raise ConfigError("give either a preset name or inline brackets/phi, not both")

    def resolve(self) -> tuple[LieAlgebra, AltForm, str]:
        """``(algebra, phi, label)``; raises ``ConfigError`` for bad input."""
        if self.name is not None:
            p = get_preset(self.name)
            return p.algebra, p.phi, p.name
        try:
            alg = LieAlgebra.from_brackets(self.brackets, name="inline")
            if self.phi is None:
                phi = standard_phi()
            else:
                phi = AltForm.from_terms(3, [(c, (i, j, k)) for i, j, k, c in self.phi])
        except G2FlowError as exc:
            raise ConfigError(str(exc)) from exc
        return alg, phi, "inline"

    def to_dict(self) -> dict:
        if self.name is not None:
            return {"name": self.name}
        out = {"brackets": [list(q) for q in self.brackets]}
        if self.phi is not None:
            out["phi"] = [list(q) for q in self.phi]
        return out

    @classmethod
    def from_dict(cls, d) -> "PresetSpec":
        if isinstance(d, str):
            return cls(name=d)
        if not isinstance(d, dict):
            raise ConfigError(f"preset must be a name or a table, got {d!r}")
        extra = set(d) - {"name", "brackets", "phi"}
        if extra:
            raise ConfigError(f"unknown preset keys: {', '.join(sorted(extra))}")
        brackets = _quadruples(d["brackets"], "brackets") if "brackets" in d else None
        phi = _quadruples(d["phi"], "phi") if "phi" in d else None
        return cls(name=d.get("name"), brackets=brackets, phi=phi)


@dataclass(frozen=True)
class RunConfig:
    preset: PresetSpec = field(default_factory=lambda: PresetSpec(name="heisenberg7"))
    flow: FlowSpec | None = None
    output_dir: str = "g2flow_out"
    suites: tuple[str, ...] = ()
    emit_plots: bool = False

    def __post_init__(self):
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {', '.join(SUITES)}")
        object.__setattr__(self, "suites", tuple(self.suites))

    def to_dict(self) -> dict:
        out = {"output_dir": self.output_dir, "suites": list(self.suites), "emit_plots": self.emit_plots,
               "preset": self.preset.to_dict()}
        if self.flow is not None:
            out["flow"] = asdict(self.flow)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        extra = set(d) - _TOP_KEYS
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        flow = None
        if "flow" in d:
            allowed = {f.name for f in fields(FlowSpec)}
            if not isinstance(d["flow"], dict) or set(d["flow"]) - allowed:
                raise ConfigError(f"flow table accepts only {', '.join(sorted(allowed))}")
            try:
                flow = FlowSpec(**d["flow"])
            except TypeError as exc:
                raise ConfigError(str(exc)) from exc
        suites = d.get("suites", [])
        if isinstance(suites, str):
            suites = [s for s in suites.split(",") if s]
        return cls(
            preset=PresetSpec.from_dict(d.get("preset", {"name": "heisenberg7"})),
            flow=flow,
            output_dir=str(d.get("output_dir", "g2flow_out")),
            suites=tuple(suites),
            emit_plots=bool(d.get("emit_plots", False)),
        )

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(tomllib.loads(text))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed TOML: {exc}") from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.loads(text)


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
