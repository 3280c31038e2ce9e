"""OLS core: QR-based fitting, classical and White (HC0/HC1) covariance, t-tests.

Shared by the per-firm market-model fits and the cross-sectional regressions.
Stateless and reentrant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import stats

from .errors import EstimationError

__all__ = ["DesignMatrix", "OlsFit", "CoefficientTest", "ols_fit", "hc_covariance", "coefficient_tests"]

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """Named regressor columns; ``data`` is (n_obs, k) with k < n_obs."""

    names: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise EstimationError("design matrix must be two-dimensional")
        if len(self.names) != data.shape[1]:
            raise EstimationError(
                f"{len(self.names)} column names for {data.shape[1]} columns"
            )
        if len(set(self.names)) != len(self.names):
            raise EstimationError("duplicate column names in design matrix")
        if data.shape[0] <= data.shape[1]:
            raise EstimationError(
                f"need n_obs > n_cols for positive degrees of freedom, got n={data.shape[0]}, k={data.shape[1]}"
            )

    @property
    def n_obs(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_columns(
        cls,
        columns: Sequence[tuple[str, Sequence[float]]],
        intercept: bool = False,
    ) -> "DesignMatrix":
        names = list(name for name, _ in columns)
        cols = [np.asarray(vals, dtype=float) for _, vals in columns]
        n = len(cols[0])
        if any(c.shape != (n,) for c in cols):
            raise EstimationError("design columns have unequal lengths")
        if intercept:
            names.insert(0, "const")
            cols.insert(0, np.ones(n))
        return cls(names=tuple(names), data=np.column_stack(cols))


@dataclass(frozen=True)
class OlsFit:
    """Coefficients plus the residual diagnostics needed for inference."""

    names: tuple[str, ...]
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float  # SSR / (n - k)
    classical_cov: np.ndarray  # sigma2 * (X'X)^-1
    r2: float
    adjusted_r2: float

    @property
    def n_obs(self) -> int:
        return len(self.residuals)

    @property
    def df_resid(self) -> int:
        return self.n_obs - len(self.coefficients)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])


def _check_rank(X: DesignMatrix) -> None:
    # Pivoted QR exposes which columns are linearly dependent.
    _, R, piv = scipy.linalg.qr(X.data, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    dependent = [X.names[piv[i]] for i in range(len(diag)) if diag[i] <= RANK_RTOL * scale]
    if diag.size and diag[0] == 0.0:
        dependent = list(X.names)
    if dependent:
        raise EstimationError(f"rank-deficient design: dependent column(s) {dependent}")


def ols_fit(X: DesignMatrix, y: Sequence[float]) -> OlsFit:
    """Least-squares fit via QR decomposition.

    Raises EstimationError on rank deficiency (naming the dependent columns)
    or a length mismatch. An all-constant response gets r2 = 0 by convention,
    with a warning.
    """
    y_arr = np.asarray(y, dtype=float)
    if y_arr.shape != (X.n_obs,):
        raise EstimationError(f"response length {y_arr.shape} does not match n_obs={X.n_obs}")
    _check_rank(X)
    Q, R = np.linalg.qr(X.data)
    beta = scipy.linalg.solve_triangular(R, Q.T @ y_arr)
    fitted = X.data @ beta
    resid = y_arr - fitted
    ssr = float(resid @ resid)
    n, k = X.n_obs, X.n_cols
    sigma2 = ssr / (n - k)
    xtx_inv = scipy.linalg.solve_triangular(
        R, scipy.linalg.solve_triangular(R, np.eye(k), trans="T", lower=False)
    )
    sst = float(np.sum((y_arr - y_arr.mean()) ** 2))
    if sst == 0.0:
        warnings.warn("zero-variance response: r2 defined as 0", stacklevel=2)
        r2 = 0.0
    else:
        r2 = 1.0 - ssr / sst
    adjusted_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - k)
    return OlsFit(
        names=X.names,
        coefficients=beta,
        residuals=resid,
        fitted=fitted,
        sigma2=sigma2,
        classical_cov=sigma2 * xtx_inv,
        r2=r2,
        adjusted_r2=adjusted_r2,
    )


def hc_covariance(fit: OlsFit, X: DesignMatrix, variant: str = "hc1") -> np.ndarray:
    """White sandwich covariance (X'X)^-1 X'diag(e^2)X (X'X)^-1.

    HC1 multiplies by the small-sample factor n/(n-k).
    """
    variant = variant.lower()
    if variant not in ("hc0", "hc1"):
        raise EstimationError(f"unknown robust variant {variant!r} (use 'hc0' or 'hc1')")
    xtx_inv = fit.classical_cov / fit.sigma2 if fit.sigma2 > 0 else np.linalg.inv(X.data.T @ X.data)
    meat = X.data.T @ (fit.residuals[:, None] ** 2 * X.data)
    cov = xtx_inv @ meat @ xtx_inv
    if variant == "hc1":
        n, k = X.n_obs, X.n_cols
        cov = cov * (n / (n - k))
    return cov


@dataclass(frozen=True)
class CoefficientTest:
    name: str
    estimate: float
    std_error: float
    t_stat: float
    p_value: float


def coefficient_tests(fit: OlsFit, cov: np.ndarray) -> list[CoefficientTest]:
    """Per-coefficient t statistics and two-sided Student-t p-values (df = n-k)."""
    cov = np.asarray(cov, dtype=float)
    k = len(fit.coefficients)
    if cov.shape != (k, k):
        raise EstimationError(f"covariance shape {cov.shape} does not match {k} coefficients")
    diag = np.diag(cov)
    if np.any(diag <= 0):
        bad = [fit.names[i] for i in np.flatnonzero(diag <= 0)]
        raise EstimationError(f"non-positive covariance diagonal for {bad}")
    out = []
    for i, name in enumerate(fit.names):
        beta = float(fit.coefficients[i])
        se = float(np.sqrt(diag[i]))
        t = beta / se
        p = 2.0 * float(stats.t.sf(abs(t), fit.df_resid))
        out.append(CoefficientTest(name=name, estimate=beta, std_error=se, t_stat=t, p_value=p))
    return out
