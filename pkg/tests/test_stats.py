import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinsep.errors import DegenerateFitError, EmptyHistogramError, FitInsufficientError
from twinsep.predictor import density
from twinsep.sieve import SieveConfig, primes_up_to
from twinsep.stats import (DecayFit, SeparationHistogram, build_histogram, fit_decay, fit_m0,
                           fit_report, high_jumper, read_histogram_csv, write_histogram_csv)
from twinsep.twins import Twin, enumerate_twins, separations


def hist_of(counts, n=0, pi1=10**6):
    return SeparationHistogram({s: c for s, c in counts.items() if c}, n, pi1, sum(counts.values()) + 1)


def census_seps(limit):
    return list(separations(enumerate_twins(primes_up_to(SieveConfig(limit=limit)))))


def test_histogram_below_100():
    (h,) = build_histogram(census_seps(100), [100])
    assert h.total == 6
    assert h.pi2 == 7
    assert h.pi1 == 25
    # 7|11, 13|17 -> 0; 19|29, 31|41, 61|71 -> 1; 43|59 -> 2
    assert h.counts == {0: 2, 1: 3, 2: 1}


def test_single_twin_histogram_empty():
    (h,) = build_histogram(separations([Twin(5, 0, 3)]), [10])
    assert h.counts == {}


def test_histogram_snapshots_1e6():
    seps = census_seps(10**6)
    hists = build_histogram(seps, [10**5, 10**6])
    assert [h.total for h in hists] == [1222, 8167]
    assert [h.pi2 for h in hists] == [1223, 8168]
    assert [h.pi1 for h in hists] == [9592, 78498]
    assert all(h.total == h.pi2 - 1 for h in hists)


def test_fit_exact_exponential():
    s = np.arange(11)
    counts = {int(k): float(1000 * math.exp(-0.5 * k)) for k in s}
    h = SeparationHistogram(counts, 0, 1000, 0)
    # counts are real-valued here on purpose: exact log-linear input
    h.as_arrays = lambda: (s, np.array([counts[k] for k in s]))
    fit = fit_decay(h, min_count=0)
    assert fit.m == pytest.approx(0.5, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.fit_range == (0, 10)


@settings(max_examples=50, deadline=None)
@given(m=st.floats(0.01, 2.0), amp=st.floats(1e3, 1e9))
def test_fit_recovery_noise_free(m, amp):
    s = np.arange(8)
    c = amp * np.exp(-m * s)
    h = SeparationHistogram({}, 0, 100, 0)
    h.as_arrays = lambda: (s, c)
    assert fit_decay(h, min_count=0).m == pytest.approx(m, rel=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_fit_recovery_multinomial(seed):
    m = 0.1
    s = np.arange(400)
    p = np.exp(-m * s)
    c = np.random.default_rng(seed).multinomial(10**4, p / p.sum())
    fit = fit_decay(SeparationHistogram.from_array(c, 0, 0, 10**4 + 1))
    assert abs(fit.m - m) < 3 * fit.stderr_m


def test_fit_flat_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_decay(hist_of({s: 50 for s in range(6)}))


def test_fit_rising_is_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_decay(hist_of({0: 10, 1: 20, 2: 40}))


def test_fit_insufficient():
    with pytest.raises(FitInsufficientError):
        fit_decay(hist_of({0: 100, 1: 50, 2: 5}))


def test_interior_zero_bins_reported():
    fit = fit_decay(hist_of({0: 400, 1: 200, 2: 100, 3: 50, 5: 3}))
    assert fit.interior_zero_bins == [4]
    assert fit.fit_range == (0, 3)


def test_m0_single_point():
    pi1 = math.exp(13.21)
    est = fit_m0([DecayFit(0.1, 0.0, 1.0, (0, 5), pi1)])
    assert est.m0 == pytest.approx(1.321, rel=1e-12)
    assert est.stderr_m0 == 0.0


def test_m0_exact_model():
    fits = [DecayFit(1.321 / math.log(p), 0.0, 1.0, (0, 5), p) for p in (10**4, 10**6, 10**8)]
    est = fit_m0(fits)
    assert est.m0 == pytest.approx(1.321, abs=1e-9)
    assert est.checkpoints_used == 3


@settings(max_examples=50)
@given(scale=st.floats(1e-3, 1e3))
def test_m0_weight_scaling_invariance(scale):
    fits = [DecayFit(m, 0.0, 1.0, (0, 5), p) for m, p in [(0.12, 78498), (0.105, 664579), (0.088, 5761455)]]
    w = [1.0, 2.0, 3.0]
    a = fit_m0(fits, w).m0
    b = fit_m0(fits, [scale * x for x in w]).m0
    assert a == pytest.approx(b, rel=1e-12)


def test_m0_needs_fits():
    with pytest.raises(FitInsufficientError):
        fit_m0([])


def test_high_jumper():
    assert high_jumper(hist_of({0: 5, 1: 5})) == 0
    assert high_jumper(hist_of({3: 7})) == 3
    with pytest.raises(EmptyHistogramError):
        high_jumper(hist_of({}))


def test_high_jumper_census_1e6():
    (h,) = build_histogram(census_seps(10**6), [10**6])
    assert high_jumper(h) == 0


@settings(max_examples=50)
@given(m0=st.floats(0.5, 3.0), pi1=st.integers(3, 10**12), s=st.floats(1e-6, 500))
def test_model_mode_is_zero(m0, pi1, s):
    from twinsep.predictor import ModelParams
    p = ModelParams(m0=m0)
    assert density(0, pi1, p) > density(s, pi1, p) or density(s, pi1, p) == 0.0


def test_histogram_csv_roundtrip(tmp_path):
    h = SeparationHistogram({0: 3, 1: 2, 2: 1}, 100, 25, 7)
    path = tmp_path / "h.csv"
    write_histogram_csv(path, h)
    lines = path.read_text().splitlines()
    assert lines[0] == "# n_limit=100 pi1=25 pi2=7"
    assert lines[1] == "s,count,frequency"
    assert lines[2] == "0,3,0.5"
    assert read_histogram_csv(path) == h


def test_fit_report_fields():
    fit = fit_decay(hist_of({0: 400, 1: 200, 2: 100, 3: 50}, n=1000, pi1=168))
    text = fit_report(fit)
    for key in ("m", "stderr", "r_squared", "fit_range", "pi1", "n_limit"):
        assert f'"{key}"' in text
