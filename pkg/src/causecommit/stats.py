"""Ordinary least squares with standard errors and Student-t p-values."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

CONDITION_WARNING = 1e8
PREDICTORS = ("non_support", "low_commit", "high_commit")


class RankDeficientError(ValueError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("design matrix is rank deficient; collinear column(s): "
                         + ", ".join(self.columns))


# ---------------------------------------------------------------------------
# special functions

def _betacf(a, b, x, max_iter=10000, eps=1e-16):
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float, complement: float | None = None) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1.

    ``complement`` may carry an accurately computed ``1 - x``.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    y = 1.0 - x if complement is None else complement
    if x == 0.0 or y == 0.0:
        return 0.0 if x == 0.0 else 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(y))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not df >= 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isnan(t):
        raise ValueError("t is NaN")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    t2 = t * t
    x = df / (df + t2)
    p = regularized_incomplete_beta(df / 2.0, 0.5, x, complement=t2 / (df + t2))
    return min(1.0, max(0.0, p))


def log1p_counts(count) -> float:
    if isinstance(count, bool) or int(count) != count:
        raise ValueError(f"count must be a nonnegative integer, got {count!r}")
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count!r}")
    return math.log1p(count)


# ---------------------------------------------------------------------------
# regression

@dataclass(frozen=True)
class RegressionResult:
    predictor_names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_statistics: np.ndarray
    p_values: np.ndarray
    r_squared: float
    n: int
    df_resid: int
    residuals: np.ndarray
    condition_number: float

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.predictor_names.index(name)])

    def table(self) -> list[dict]:
        return [
            {"predictor": name, "coef": float(b), "std_err": float(se),
             "t": float(t), "p_value": float(p)}
            for name, b, se, t, p in zip(self.predictor_names, self.coefficients,
                                         self.standard_errors, self.t_statistics, self.p_values)
        ]

    def to_dict(self) -> dict:
        return {"n": self.n, "df_resid": self.df_resid, "r_squared": self.r_squared,
                "condition_number": self.condition_number, "coefficients": self.table()}


def _collinear_columns(X, names):
    kept = []
    bad = []
    for j, name in enumerate(names):
        cols = kept + [j]
        if np.linalg.matrix_rank(X[:, cols]) < len(cols):
            bad.append(name)
        else:
            kept.append(j)
    return bad


def ols(y, X, names: Sequence[str] | None = None, intercept: bool = True) -> RegressionResult:
    """Fit y = X b (+ intercept) by QR; report SEs, t and two-sided p-values."""
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(y)
    if X.shape[0] != n:
        raise ValueError("X and y differ in length")
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("one name per predictor column is required")
    if intercept:
        X = np.column_stack([np.ones(n), X])
        names = ["intercept"] + names
    k = X.shape[1]
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in the regression data")
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} observations for {k} coefficients, got {n}")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficientError(_collinear_columns(X, names))

    cond = float(np.linalg.cond(X))
    if cond > CONDITION_WARNING:
        warnings.warn(f"ill-conditioned design matrix (condition number {cond:.3g})",
                      RuntimeWarning, stacklevel=2)

    q, r = np.linalg.qr(X)
    beta = solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    df = n - k
    ssr = float(resid @ resid)
    s2 = ssr / df
    r_inv = solve_triangular(r, np.eye(k))
    se = np.sqrt(s2 * np.einsum("ij,ij->i", r_inv, r_inv))

    t = np.empty(k)
    p = np.empty(k)
    for j in range(k):
        if se[j] > 0:
            t[j] = beta[j] / se[j]
        else:
            t[j] = math.copysign(math.inf, beta[j]) if beta[j] != 0 else 0.0
        p[j] = student_t_two_sided_p(float(t[j]), df)

    centered = y - y.mean() if intercept else y
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    return RegressionResult(tuple(names), beta, se, t, p, r2, n, df, resid, cond)


@dataclass(frozen=True)
class EntityDesignRow:
    entity_id: str
    x1: float
    x2: float
    x3: float
    y: float

    @classmethod
    def from_counts(cls, entity_id, non_support: int, low: int, high: int, rating: float):
        if not math.isfinite(rating):
            raise ValueError(f"rating of {entity_id!r} is not finite")
        return cls(entity_id, log1p_counts(non_support), log1p_counts(low),
                   log1p_counts(high), float(rating))


def ols_fit(rows: Sequence[EntityDesignRow]) -> RegressionResult:
    """Rating ~ log1p counts of non-support, low- and high-commitment messages."""
    if len(rows) < len(PREDICTORS) + 2:
        raise ValueError(f"need at least {len(PREDICTORS) + 2} entities, got {len(rows)}")
    X = np.array([[r.x1, r.x2, r.x3] for r in rows])
    y = np.array([r.y for r in rows])
    return ols(y, X, PREDICTORS)


def write_regression_csv(result: RegressionResult, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["predictor", "coef", "std_err", "t", "p_value"])
    for row in result.table():
        w.writerow([row["predictor"], repr(row["coef"]), repr(row["std_err"]),
                    repr(row["t"]), repr(row["p_value"])])
    w.writerow(["n", result.n, "", "", ""])
    w.writerow(["r_squared", repr(result.r_squared), "", "", ""])


def write_scatter_csv(rows: Sequence[EntityDesignRow], predictor: str, fh):
    """One (x, y) pair per entity for the chosen predictor."""
    attr = {"non_support": "x1", "low_commit": "x2", "high_commit": "x3"}[predictor]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["entity_id", f"log1p_{predictor}", "rating"])
    for r in rows:
        w.writerow([r.entity_id, repr(getattr(r, attr)), repr(r.y)])
