"""Error and goodness-of-fit measures for measured/predicted pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MetricDomainError(ValueError):
    pass


def _pair(y_meas, y_pred) -> tuple[np.ndarray, np.ndarray]:
    y_meas = np.asarray(y_meas, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_meas.shape != y_pred.shape:
        raise MetricDomainError(
            f"length mismatch: {y_meas.size} measured vs {y_pred.size} predicted"
        )
    if y_meas.size == 0:
        raise MetricDomainError("empty prediction set")
    return y_meas, y_pred


def mape(y_meas, y_pred) -> float:
    """Mean absolute percentage error, in percent."""
    y_meas, y_pred = _pair(y_meas, y_pred)
    if np.any(y_meas == 0):
        raise MetricDomainError("MAPE is undefined for a zero measured value")
    return float(np.mean(np.abs((y_meas - y_pred) / y_meas)) * 100.0)


def rmse(y_meas, y_pred) -> float:
    y_meas, y_pred = _pair(y_meas, y_pred)
    return float(np.sqrt(np.mean((y_meas - y_pred) ** 2)))


def r_squared(y_meas, y_pred) -> float:
    """Squared Pearson correlation between measured and predicted values."""
    y_meas, y_pred = _pair(y_meas, y_pred)
    if y_meas.size < 2:
        raise MetricDomainError("R^2 needs at least two samples")
    dm = y_meas - y_meas.mean()
    dp = y_pred - y_pred.mean()
    sxx = float(dm @ dm)
    spp = float(dp @ dp)
    if sxx == 0 or spp == 0:
        raise MetricDomainError("R^2 is undefined for a constant sequence")
    sxy = float(dm @ dp)
    return min(sxy * sxy / (sxx * spp), 1.0)


def r2_residual(y_meas, y_pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    Unlike :func:`r_squared` this penalizes bias and scale errors and can be
    negative.
    """
    y_meas, y_pred = _pair(y_meas, y_pred)
    dm = y_meas - y_meas.mean()
    ss_tot = float(dm @ dm)
    if ss_tot == 0:
        raise MetricDomainError("R^2 is undefined for constant measurements")
    res = y_meas - y_pred
    return 1.0 - float(res @ res) / ss_tot


@dataclass(frozen=True)
class MetricsReport:
    mape: float
    r2: float
    rmse: float
    r2_residual: float | None = None

    @classmethod
    def compute(cls, y_meas, y_pred) -> MetricsReport:
        return cls(
            mape=mape(y_meas, y_pred),
            r2=r_squared(y_meas, y_pred),
            rmse=rmse(y_meas, y_pred),
            r2_residual=r2_residual(y_meas, y_pred),
        )

    def to_dict(self) -> dict[str, float]:
        out = {"mape": self.mape, "r2": self.r2}
        if self.r2_residual is not None:
            out["r2_residual"] = self.r2_residual
        out["rmse"] = self.rmse
        return out

    def to_json(self) -> str:
        """JSON object with every value printed to 6 decimal places."""
        body = ", ".join(
            f'"{k}": {v:.6f}' if math.isfinite(v) else f'"{k}": null'
            for k, v in self.to_dict().items()
        )
        return "{" + body + "}"
