"""Default numerical tolerances, overridable per call or from the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # elliptic identities
    pythagorean: float = 1e-12
    derivative_identity: float = 1e-10
    periodicity: float = 1e-10
    # join construction
    parameter_equation: float = 1e-10
    scalar_consistency: float = 1e-12
    residual: float = 1e-8
    boundary: float = 1e-10
    conservation: float = 1e-11
    constancy: float = 1e-9
    # Yamabe shooting
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    matching: float = 1e-9
    dedup: float = 1e-7
    ode_residual: float = 1e-7

    def override(self, **changes) -> "Tolerances":
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in changes.items()})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()
