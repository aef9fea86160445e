from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic Cosserat constants and shell thickness."""

    mu: float
    lam: float
    mu_c: float = 0.0
    L_c: float = 1.0
    b1: float = 1.0
    b2: float = 1.0
    b3: float = 1.0
    h: float = 0.1

    def __post_init__(self):
        for name in ("mu", "lam", "mu_c", "L_c", "b1", "b2", "b3", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        checks = (
            (self.mu > 0, "mu must be positive"),
            (self.lam + 2 * self.mu > 0, "lam + 2 mu must be positive"),
            (self.mu_c >= 0, "mu_c must be non-negative"),
            (self.L_c > 0, "L_c must be positive"),
            (self.b1 > 0, "b1 must be positive"),
            (self.b2 > 0, "b2 must be positive"),
            (self.b3 > 0, "b3 must be positive"),
            (self.h > 0, "h must be positive"),
        )
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def kappa(self) -> float:
        return (2 * self.mu + 3 * self.lam) / 3

    @property
    def lam_ratio(self) -> float:
        """lambda / (lambda + 2 mu), the thickness-stretch coupling ratio."""
        return self.lam / (self.lam + 2 * self.mu)

    @property
    def shell_lam(self) -> float:
        """Trace coefficient lambda mu / (lambda + 2 mu) of the shell bilinear form."""
        return self.lam * self.mu / (self.lam + 2 * self.mu)

    def with_thickness(self, h: float) -> "MaterialParams":
        return MaterialParams(self.mu, self.lam, self.mu_c, self.L_c, self.b1, self.b2, self.b3, h)
