"""Exponential separation model and large-gap onset predictions.

All logarithms are natural. Separations are measured in primes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from scipy import optimize

from .errors import DomainError, NoSolutionError, OutOfModelRangeError, ThresholdClampWarning

M0_CENTRAL = 1.321
M0_UNCERTAINTY = 0.008
TWIN_PRIME_CONSTANT = 0.6601618158

INVERT_LOG_BRACKET = (math.log(1e2), math.log(1e18))
INVERT_MAXITER = 200


@dataclass(frozen=True)
class ModelParams:
    m0: float = M0_CENTRAL
    c2: float = TWIN_PRIME_CONSTANT

    def __post_init__(self):
        if not (self.m0 > 0 and self.c2 > 0):
            raise DomainError(f"m0 and c2 must be positive, got {self.m0}, {self.c2}")

    def m_band(self) -> list[ModelParams]:
        return [ModelParams(self.m0 + d, self.c2) for d in (-M0_UNCERTAINTY, 0.0, M0_UNCERTAINTY)]


DEFAULT_PARAMS = ModelParams()


@dataclass(frozen=True)
class GapPrediction:
    n: float
    f: float
    s_l: float
    m0: float = M0_CENTRAL


def _log_pi1(pi1) -> float:
    if pi1 < 3:
        raise DomainError(f"pi1 must be >= 3, got {pi1}")
    return math.log(pi1)


def decay_rate(pi1, params: ModelParams = DEFAULT_PARAMS) -> float:
    """m(pi1) = m0 / log(pi1)."""
    return params.m0 / _log_pi1(pi1)


def density(s: float, pi1, params: ModelParams = DEFAULT_PARAMS) -> float:
    if s < 0:
        raise DomainError(f"separation must be non-negative, got {s}")
    m = decay_rate(pi1, params)
    return m * math.exp(-m * s)


def prob_ge(s_l: float, pi1, params: ModelParams = DEFAULT_PARAMS) -> float:
    """Probability that a separation is >= s_l."""
    if s_l < 0:
        raise DomainError(f"separation must be non-negative, got {s_l}")
    return math.exp(-decay_rate(pi1, params) * s_l)


def gap_threshold(pi1, pi2, f: float, params: ModelParams = DEFAULT_PARAMS) -> float:
    """Separation s_L whose tail probability equals f / pi2.

    When f >= pi2 the threshold would be negative; 0 is returned with a
    ThresholdClampWarning.
    """
    if pi2 < 2:
        raise DomainError(f"pi2 must be >= 2, got {pi2}")
    if not f > 0:
        raise DomainError(f"risk factor must be positive, got {f}")
    log_pi1 = _log_pi1(pi1)
    if f >= pi2:
        warnings.warn(f"f={f} >= pi2={pi2}: fewer than one expected event, threshold clamped to 0",
                      ThresholdClampWarning, stacklevel=2)
        return 0.0
    return log_pi1 * (math.log(pi2) - math.log(f)) / params.m0


def approx_counts(n: float, params: ModelParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """Prime number theorem and Hardy-Littlewood estimates of (pi1, pi2) at n."""
    if not n > math.e:
        raise DomainError(f"n must exceed e, got {n}")
    log_n = math.log(n)
    return n / log_n, 2.0 * params.c2 * n / log_n**2


def _curve_factors(log_n: float, f: float, params: ModelParams) -> tuple[float, float]:
    loglog = math.log(log_n)
    a = log_n - loglog
    b = log_n - 2.0 * loglog + math.log(2.0 * params.c2) - math.log(f)
    return a, b


def _gap_curve_log(log_n: float, f: float, params: ModelParams) -> float:
    if not log_n > 1.0:
        raise OutOfModelRangeError(f"log N must exceed 1, got {log_n}")
    a, b = _curve_factors(log_n, f, params)
    if a <= 0 or b <= 0:
        raise OutOfModelRangeError(
            f"N=e^{log_n:.6g}, f={f}: bracket factor non-positive ({a:.6g}, {b:.6g})")
    return a * b / params.m0


def gap_curve(n: float, f: float = 1.0, params: ModelParams = DEFAULT_PARAMS) -> float:
    """Predicted onset separation s_L(N, f) using the asymptotic pi1 and pi2."""
    if not f > 0:
        raise DomainError(f"risk factor must be positive, got {f}")
    if not n > math.e:
        raise OutOfModelRangeError(f"n must exceed e, got {n}")
    return _gap_curve_log(math.log(n), f, params)


def implied_risk_factor(n: float, s_l: float, params: ModelParams = DEFAULT_PARAMS) -> float:
    """The f that puts the gap curve through (n, s_l)."""
    if not n > math.e:
        raise OutOfModelRangeError(f"n must exceed e, got {n}")
    log_n = math.log(n)
    loglog = math.log(log_n)
    a = log_n - loglog
    log_f = log_n - 2.0 * loglog + math.log(2.0 * params.c2) - params.m0 * s_l / a
    return math.exp(log_f)


def _domain_edge(f: float, params: ModelParams) -> float:
    """Smallest log N (within the inversion bracket) where the curve is defined."""
    lo, hi = INVERT_LOG_BRACKET
    if _curve_factors(lo, f, params)[1] > 0:
        return lo
    if _curve_factors(hi, f, params)[1] <= 0:
        raise NoSolutionError(f"gap curve undefined on the whole bracket for f={f}")
    # second factor is increasing for log N > 2
    return optimize.bisect(lambda x: _curve_factors(x, f, params)[1], lo, hi,
                           xtol=1e-14, maxiter=INVERT_MAXITER)


def invert_gap_curve(s_l: float, f: float = 1.0, params: ModelParams = DEFAULT_PARAMS) -> float:
    """N at which the gap curve reaches s_l, by bisection on log N over [1e2, 1e18]."""
    if not s_l > 0:
        raise DomainError(f"s_l must be positive, got {s_l}")
    if not f > 0:
        raise DomainError(f"risk factor must be positive, got {f}")
    lo = _domain_edge(f, params)
    hi = INVERT_LOG_BRACKET[1]

    def curve(x):
        a, b = _curve_factors(x, f, params)
        return a * max(b, 0.0) / params.m0

    if s_l < curve(lo):
        raise NoSolutionError(f"s_l={s_l} is below the curve at N=e^{lo:.6g} (f={f})")
    if s_l > curve(hi):
        raise NoSolutionError(f"s_l={s_l} exceeds the curve at N=1e18 (f={f})")
    log_n = optimize.bisect(lambda x: curve(x) - s_l, lo, hi,
                            xtol=1e-15, maxiter=INVERT_MAXITER)
    return math.exp(log_n)


def prediction_table(n_grid: Sequence[float], f_values: Sequence[float],
                     params: ModelParams | Sequence[ModelParams] = DEFAULT_PARAMS
                     ) -> list[GapPrediction]:
    """gap_curve over the product of parameter sets, N grid and f values.

    Points outside the model range are skipped with a warning.
    """
    param_list = [params] if isinstance(params, ModelParams) else list(params)
    rows = []
    for p in param_list:
        for n in n_grid:
            for f in f_values:
                try:
                    rows.append(GapPrediction(n, f, gap_curve(n, f, p), p.m0))
                except DomainError as exc:
                    warnings.warn(f"skipping N={n}, f={f}: {exc}", RuntimeWarning, stacklevel=2)
    return rows


def write_prediction_csv(fh, rows: Sequence[GapPrediction], params: Sequence[ModelParams]) -> None:
    band = len({p.m0 for p in params}) > 1
    header = ",".join(f"m0={p.m0:.12g}" for p in params)
    fh.write(f"# {header} c2={params[0].c2:.12g}\n")
    fh.write("n,log_n,f,s_l" + (",m0" if band else "") + "\n")
    for r in rows:
        line = f"{r.n:.12g},{math.log(r.n):.12g},{r.f:.12g},{r.s_l:.12g}"
        if band:
            line += f",{r.m0:.12g}"
        fh.write(line + "\n")
