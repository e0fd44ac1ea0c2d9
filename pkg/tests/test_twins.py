import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twinsep.sieve import SieveConfig, is_prime_oracle, iter_segments, primes_up_to
from twinsep.twins import (RecordGap, SeparationRecord, Twin, TwinScanner, classify_primes,
                           enumerate_twins, read_records_csv, record_gaps, separations,
                           write_records_csv)

PRIMES_20 = [2, 3, 5, 7, 11, 13, 17, 19]


def pairs(twins):
    return [t.pair for t in twins]


def test_enumerate_small():
    assert pairs(enumerate_twins(PRIMES_20, discard_anomalous=False)) == [(3, 5), (5, 7), (11, 13), (17, 19)]
    twins = list(enumerate_twins(PRIMES_20, discard_anomalous=True))
    assert pairs(twins) == [(5, 7), (11, 13), (17, 19)]
    assert [t.index for t in twins] == [0, 1, 2]
    assert [t.pi1_at_p for t in twins] == [3, 5, 7]
    assert list(enumerate_twins([2, 3])) == []


def test_twin_needs_both_members_under_limit():
    assert pairs(enumerate_twins([2, 3, 5, 7, 11, 13], limit=12)) == [(5, 7)]


def _sep_between(primes, a, b):
    tw = {t.p: t for t in enumerate_twins(primes)}
    return next(separations([tw[a], tw[b]])).s


def test_separation_examples():
    primes = [n for n in range(40) if is_prime_oracle(n)]
    assert _sep_between(primes, 5, 11) == 0
    assert _sep_between(primes, 17, 29) == 1
    assert _sep_between(primes, 11, 17) == 0


def test_separations_need_two_twins():
    assert list(separations([])) == []
    assert list(separations([Twin(5, 0, 3)])) == []


def _fake_seps(values):
    return [SeparationRecord(s, Twin(10 * i, i, 0), Twin(10 * (i + 1), i + 1, 0))
            for i, s in enumerate(values)]


def test_record_gaps_running_max():
    recs = record_gaps(_fake_seps([0, 0, 1, 0, 2, 1]))
    assert [r.s for r in recs] == [0, 1, 2]
    assert [r.onset_N for r in recs] == [10, 30, 50]
    assert [r.s for r in record_gaps(_fake_seps([0] * 5))] == [0]
    assert record_gaps([]) == []


@settings(max_examples=100)
@given(st.lists(st.integers(0, 50), max_size=60))
def test_record_monotonicity(values):
    recs = record_gaps(_fake_seps(values))
    assert all(a.s < b.s for a, b in zip(recs, recs[1:]))
    assert all(a.onset_N <= b.onset_N for a, b in zip(recs, recs[1:]))
    if values:
        assert recs[-1].s == max(values)


def test_twin_counts_1e6(oracle_primes):
    primes = oracle_primes.tolist()
    assert len(list(enumerate_twins(primes, discard_anomalous=False))) == 8169
    assert len(list(enumerate_twins(primes, discard_anomalous=True))) == 8168
    assert len(list(separations(enumerate_twins(primes)))) == 8167


def test_record_gaps_1e6_against_brute_force(oracle_primes):
    primes = oracle_primes.tolist()
    pset = set(primes)
    firsts = [p for p in primes if p >= 5 and p + 2 in pset]
    # count singletons between consecutive twins by scanning integers
    best, onset = -1, None
    for a, b in zip(firsts, firsts[1:]):
        s = sum(1 for q in range(a + 3, b) if q in pset)
        if s > best:
            best, onset = s, b
    recs = record_gaps(separations(enumerate_twins(primes)))
    assert (recs[-1].s, recs[-1].onset_N) == (best, onset) == (101, 851801)


def test_classification_partitions_primes(oracle_primes):
    primes = oracle_primes.tolist()
    labels = classify_primes(primes)
    assert len(labels) == len(primes)
    twins = list(enumerate_twins(primes))
    seps = list(separations(twins))
    n_twin = sum(1 for v in labels.values() if v == "twin")
    n_single = sum(1 for v in labels.values() if v == "singleton")
    n_excl = sum(1 for v in labels.values() if v == "excluded")
    trailing = len(primes) - (twins[-1].pi1_at_p + 1)
    assert n_twin == 2 * len(twins)
    assert n_excl == 2  # primes 2 and 3 precede (5, 7)
    assert n_single == sum(r.s for r in seps) + trailing
    assert n_twin + n_single + n_excl == 78498


def test_classification_without_discard_double_counts():
    with pytest.raises(ValueError):
        classify_primes(PRIMES_20, discard_anomalous=False)


def _scan(limit, segment_size, discard=True):
    sc = TwinScanner(discard_anomalous=discard)
    rows = []
    for seg in iter_segments(SieveConfig(limit=limit, segment_size=segment_size)):
        sc.feed(seg.primes, lambda l, r, s: rows.extend(zip(l.tolist(), r.tolist(), s.tolist())))
    return sc, rows


@pytest.mark.parametrize("segment_size", [7, 64, 1000, 2**22])
@pytest.mark.parametrize("discard", [True, False])
def test_scanner_matches_streaming(segment_size, discard):
    limit = 60_000
    sc, rows = _scan(limit, segment_size, discard)
    twins = list(enumerate_twins(primes_up_to(SieveConfig(limit=limit)), discard))
    seps = list(separations(twins))
    assert sc.twin_count == len(twins)
    assert rows == [(r.left.p, r.right.p, r.s) for r in seps]
    assert sc.records == record_gaps(seps)
    hist = np.bincount([r.s for r in seps])
    assert np.array_equal(sc.hist, hist)
    assert sc.gap_count == len(twins) - 1


def test_records_csv_roundtrip(tmp_path):
    recs = [RecordGap(0, 11, 1), RecordGap(1, 29, 3)]
    path = tmp_path / "records.csv"
    write_records_csv(path, recs)
    assert path.read_text().splitlines()[0] == "s,onset_N,twin_index"
    assert read_records_csv(path) == recs
