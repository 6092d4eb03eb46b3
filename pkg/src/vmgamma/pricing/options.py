"""Option contracts, payoffs and price records."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ValidationError

__all__ = ["OptionSpec", "PriceResult", "payoff", "KINDS", "STYLES"]

KINDS = ("best_of_put", "worst_of_put")
STYLES = ("european", "american")
_ALIASES = {"best_of": "best_of_put", "worst_of": "worst_of_put", "best": "best_of_put",
            "worst": "worst_of_put"}


@dataclass(frozen=True)
class OptionSpec:
    """Put on the maximum (best-of) or minimum (worst-of) of several assets."""

    kind: str
    style: str
    strike: float
    maturity: float

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValidationError(f"kind: expected one of {KINDS}, got {self.kind!r}")
        if self.style not in STYLES:
            raise ValidationError(f"style: expected one of {STYLES}, got {self.style!r}")
        if not (np.isfinite(self.strike) and self.strike > 0):
            raise ValidationError("strike: must be positive")
        if not (np.isfinite(self.maturity) and self.maturity > 0):
            raise ValidationError("maturity: must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "maturity", float(self.maturity))

    @property
    def is_american(self) -> bool:
        return self.style == "american"

    def european(self) -> "OptionSpec":
        return OptionSpec(self.kind, "european", self.strike, self.maturity)


def payoff(spec: OptionSpec, S) -> np.ndarray:
    """Exercise value; ``S`` has the asset index on its last axis."""
    S = np.asarray(S, dtype=float)
    ref = S.max(axis=-1) if spec.kind == "best_of_put" else S.min(axis=-1)
    out = np.maximum(spec.strike - ref, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class PriceResult:
    price: float
    method: str
    std_error: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
