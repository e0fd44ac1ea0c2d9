"""Separation histograms and the exponential decay fits built on them."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .errors import DegenerateFitError, EmptyHistogramError, FitInsufficientError
from .sieve import prime_count
from .twins import SeparationRecord

DEFAULT_CHECKPOINTS = (10**5, 10**6, 10**7, 10**8, 10**9)
DEFAULT_MIN_COUNT = 10


@dataclass
class SeparationHistogram:
    counts: dict[int, int]
    n_limit: int
    pi1: int
    pi2: int

    @classmethod
    def from_array(cls, arr, n_limit, pi1, pi2):
        return cls({int(s): int(c) for s, c in enumerate(arr) if c}, n_limit, pi1, pi2)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_arrays(self):
        s = np.array(sorted(self.counts), dtype=np.int64)
        c = np.array([self.counts[k] for k in s.tolist()], dtype=np.int64)
        return s, c


@dataclass
class DecayFit:
    m: float
    stderr_m: float
    r_squared: float
    fit_range: tuple[int, int]
    pi1: int
    n_limit: int = 0
    intercept: float = 0.0
    bins_used: int = 0
    # empty bins inside the observed support; excluded from the fit
    interior_zero_bins: list[int] = field(default_factory=list)


@dataclass
class M0Estimate:
    m0: float
    stderr_m0: float
    checkpoints_used: int


def build_histogram(seps: Iterable[SeparationRecord], snapshot_at: Sequence[int], *,
                    pi1_of: Callable[[int], int] = prime_count,
                    pi2_of: Callable[[int], int] | None = None) -> list[SeparationHistogram]:
    """One histogram per bound N, each counting the gaps whose closing twin is <= N.

    A gap counts toward bound N when the twin that closes it has p + 2 <= N.
    Without ``pi2_of`` the twin count is inferred as gaps + 1, which reports 0
    when a window holds fewer than two twins.
    """
    bounds = sorted(snapshot_at)
    out = []
    counts: dict[int, int] = {}
    gaps = 0
    it = iter(seps)
    pending = next(it, None)
    for n in bounds:
        while pending is not None and pending.right.p + 2 <= n:
            counts[pending.s] = counts.get(pending.s, 0) + 1
            gaps += 1
            pending = next(it, None)
        pi2 = pi2_of(n) if pi2_of else (gaps + 1 if gaps else 0)
        out.append(SeparationHistogram(dict(sorted(counts.items())), n, pi1_of(n), pi2))
    return out


def fit_decay(hist: SeparationHistogram, min_count: int = DEFAULT_MIN_COUNT) -> DecayFit:
    """OLS of log(count) on s over bins holding at least ``min_count`` gaps."""
    s, c = hist.as_arrays()
    sel = c >= min_count
    if sel.sum() < 3:
        raise FitInsufficientError(
            f"N={hist.n_limit}: only {int(sel.sum())} bins with count >= {min_count}; need 3")
    x = s[sel].astype(float)
    y = np.log(c[sel].astype(float))
    if np.ptp(y) == 0.0:
        raise DegenerateFitError(f"N={hist.n_limit}: flat histogram, slope is zero")
    res = sps.linregress(x, y)
    m = -float(res.slope)
    if not m > 0:
        raise DegenerateFitError(f"N={hist.n_limit}: fitted slope {res.slope:.6g} is not negative")
    present = set(s.tolist())
    holes = [k for k in range(int(s.max()) + 1) if k not in present] if s.size else []
    return DecayFit(
        m=m,
        stderr_m=float(res.stderr),
        r_squared=float(res.rvalue ** 2),
        fit_range=(int(x.min()), int(x.max())),
        pi1=hist.pi1,
        n_limit=hist.n_limit,
        intercept=float(res.intercept),
        bins_used=int(sel.sum()),
        interior_zero_bins=holes,
    )


def fit_m0(fits: Sequence[DecayFit], weights: Sequence[float] | None = None) -> M0Estimate:
    """Regress m on 1/log(pi1) through the origin; the slope is m0."""
    usable = [(i, f) for i, f in enumerate(fits) if f.m > 0 and f.pi1 >= 3]
    if not usable:
        raise FitInsufficientError("no valid checkpoint fits for the m0 regression")
    x = np.array([1.0 / math.log(f.pi1) for _, f in usable])
    y = np.array([f.m for _, f in usable])
    w = np.ones_like(x) if weights is None else np.array([weights[i] for i, _ in usable], float)
    sxx = float(np.sum(w * x * x))
    m0 = float(np.sum(w * x * y)) / sxx
    n = len(usable)
    if n > 1:
        resid = y - m0 * x
        sigma2 = float(np.sum(w * resid * resid)) / (n - 1)
        stderr = math.sqrt(sigma2 / sxx)
    else:
        stderr = 0.0
    return M0Estimate(m0, stderr, n)


def high_jumper(hist: SeparationHistogram) -> int:
    """Most frequent separation; ties go to the smallest s."""
    if hist.total < 1:
        raise EmptyHistogramError(f"N={hist.n_limit}: histogram is empty")
    best = max(hist.counts.values())
    return min(s for s, c in hist.counts.items() if c == best)


# -- file interfaces ----------------------------------------------------------

def write_histogram_csv(path, hist: SeparationHistogram) -> None:
    total = hist.total
    with open(path, "w", newline="") as fh:
        fh.write(f"# n_limit={hist.n_limit} pi1={hist.pi1} pi2={hist.pi2}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "count", "frequency"])
        for s, c in sorted(hist.counts.items()):
            w.writerow([s, c, f"{c / total:.12g}"])


def read_histogram_csv(path) -> SeparationHistogram:
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                for token in line[1:].split():
                    k, _, v = token.partition("=")
                    meta[k] = int(v)
            else:
                rows.append(line)
    counts = {int(r["s"]): int(r["count"]) for r in csv.DictReader(rows)}
    return SeparationHistogram(counts, meta["n_limit"], meta["pi1"], meta["pi2"])


def fit_report(fit: DecayFit) -> str:
    return json.dumps({
        "m": float(f"{fit.m:.12g}"),
        "stderr": float(f"{fit.stderr_m:.12g}"),
        "r_squared": float(f"{fit.r_squared:.12g}"),
        "fit_range": list(fit.fit_range),
        "pi1": fit.pi1,
        "n_limit": fit.n_limit,
        "interior_zero_bins": fit.interior_zero_bins,
    })
