"""Uniform result wrapper for every inequality evaluated by the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

SATURATION_TOL = 1e-8
NUMERICAL_FLOOR = 1e-10


@dataclass(frozen=True)
class URVerdict:
    """Outcome of evaluating ``lhs >= rhs``.

    ``margin`` is always ``lhs - rhs``. The inequality *holds* when the margin
    is above ``-floor`` and is *saturated* when ``|margin| <= tol``.
    """

    name: str
    lhs: float
    rhs: float
    tol: float = SATURATION_TOL
    floor: float = NUMERICAL_FLOOR
    context: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def saturated(self) -> bool:
        return abs(self.margin) <= self.tol

    @property
    def holds(self) -> bool:
        return self.margin >= -self.floor

    def with_context(self, **extra: Any) -> "URVerdict":
        return URVerdict(self.name, self.lhs, self.rhs, self.tol, self.floor,
                         {**self.context, **extra})

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "saturated": self.saturated,
            "holds": self.holds,
            "tol": self.tol,
            "floor": self.floor,
            "context": self.context,
        }
