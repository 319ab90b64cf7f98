"""Numerical estimates with uncertainty."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

__all__ = ["EstimateCI", "VolumeEstimate", "VolumeMethod", "Z_95"]

Z_95 = 1.96
"""Normal quantile of a two-sided 95% interval."""


class VolumeMethod(str, Enum):
    """How a logarithmic volume was obtained."""

    closed_form = "closed_form"
    """Known formula for the presentation."""

    moebius_root = "moebius_root"
    """Smallest positive root of the Möbius polynomial."""

    sphere_ratio_fit = "sphere_ratio_fit"
    """Mean of successive sphere-count log ratios over a window."""

    cesaro = "cesaro"
    """log2 |W_N| / N at the largest enumerated radius."""

    def __str__(self) -> str:
        return self.value


class EstimateCI(BaseModel):
    """A numerical estimate with its standard error."""

    model_config = ConfigDict(frozen=True)

    value: float
    """Point estimate."""

    stderr: float = Field(0.0, ge=0.0)
    """Standard error (or a truncation spread for exact computations)."""

    samples: int = Field(0, ge=0)
    """Number of Monte Carlo samples, or the largest exact step count."""

    method: str
    """Estimator tag, such as ``monte_carlo_mean``."""

    units: str = "bits"
    """Units of ``value``."""

    @property
    def half_width(self) -> float:
        """Half-width of the reported 95% interval."""
        return Z_95 * self.stderr

    @property
    def low(self) -> float:
        return self.value - self.half_width

    @property
    def high(self) -> float:
        return self.value + self.half_width

    def excludes_zero(self) -> bool:
        """Whether the 95% interval lies strictly on one side of zero."""
        return self.low > 0.0 or self.high < 0.0

    def scaled(self, factor: float) -> EstimateCI:
        """The same estimate multiplied by a positive constant."""
        return self.model_copy(
            update={
                "value": self.value * factor,
                "stderr": self.stderr * abs(factor),
            }
        )


class VolumeEstimate(BaseModel):
    """Logarithmic volume v, in bits per step."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0)
    """Growth rate in bits per step."""

    method: VolumeMethod
    """How the value was obtained."""

    window: tuple[int, int] | None = None
    """Range of radii ``(first, last)`` used by a fit."""

    spread: float = Field(0.0, ge=0.0)
    """Standard deviation of the per-radius rates inside the window."""

    units: str = "bits/step"
