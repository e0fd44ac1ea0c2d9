"""Twin primes as a subsequence of the primes.

Separations are counted in primes, not integers: the separation between two
consecutive twins is the number of singleton primes strictly between them.

Two routes are provided. The generator functions work on plain iterables and
are easy to audit. ``TwinScanner`` does the same bookkeeping with numpy over
whole sieve segments and is what the census uses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

ANOMALOUS_TWIN = 3


@dataclass(frozen=True)
class Twin:
    p: int
    index: int
    pi1_at_p: int

    @property
    def pair(self):
        return (self.p, self.p + 2)


@dataclass(frozen=True)
class SeparationRecord:
    s: int
    left: Twin
    right: Twin


@dataclass(frozen=True)
class RecordGap:
    s: int
    onset_N: int
    twin_index: int


def enumerate_twins(primes: Iterable[int], discard_anomalous: bool = True,
                    limit: int | None = None) -> Iterator[Twin]:
    """Yield twins (p, p+2) from an ascending prime stream.

    A twin is only emitted once p+2 has been seen (and is <= limit when given).
    """
    prev = None
    count = 0
    index = 0
    for q in primes:
        if limit is not None and q > limit:
            break
        count += 1
        if prev is not None and q - prev == 2:
            if not (discard_anomalous and prev == ANOMALOUS_TWIN):
                yield Twin(prev, index, count - 1)
                index += 1
        prev = q


def separations(twins: Iterable[Twin]) -> Iterator[SeparationRecord]:
    left = None
    for right in twins:
        if left is not None:
            # max() only matters for the overlapping (3, 5), (5, 7) when not discarding
            yield SeparationRecord(max(right.pi1_at_p - left.pi1_at_p - 2, 0), left, right)
        left = right


def record_gaps(seps: Iterable[SeparationRecord]) -> list[RecordGap]:
    """Onsets of successive maxima: each separation exceeding all earlier ones."""
    best = -1
    out = []
    for rec in seps:
        if rec.s > best:
            best = rec.s
            out.append(RecordGap(rec.s, rec.right.p, rec.right.index))
    return out


def classify_primes(primes: Iterable[int], discard_anomalous: bool = True) -> dict[int, str]:
    """Label each prime as 'twin', 'singleton' or 'excluded'.

    With the discard convention, 2 and 3 precede the first twin (5, 7) and are
    'excluded'. Raises ValueError if a prime would fall in two twins.
    """
    primes = list(primes)
    labels = {}
    twin_members = set()
    for t in enumerate_twins(primes, discard_anomalous):
        for q in t.pair:
            if q in twin_members:
                raise ValueError(f"prime {q} belongs to two twins")
            twin_members.add(q)
    first = 5 if discard_anomalous else 3
    for q in primes:
        if q in twin_members:
            labels[q] = "twin"
        elif q < first:
            labels[q] = "excluded"
        else:
            labels[q] = "singleton"
    return labels


@dataclass
class TwinScanner:
    """Incremental twin/separation bookkeeping over ascending prime arrays.

    Feed consecutive chunks of the prime sequence with :meth:`feed`. State is
    small and serialisable, which is what makes census checkpoints cheap.
    """

    discard_anomalous: bool = True
    pi1: int = 0
    last_prime: int = -1
    twin_count: int = 0
    last_twin_p: int = -1
    last_twin_pos: int = -1  # pi1 at the last twin's first member
    max_sep: int = -1
    hist: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    records: list = field(default_factory=list)

    def feed(self, primes: np.ndarray, sep_sink=None) -> None:
        """Consume the next ascending chunk of primes.

        ``sep_sink``, if given, is called with arrays (left_p, right_p, s) for
        the separations closed in this chunk.
        """
        primes = np.asarray(primes, dtype=np.int64)
        if primes.size == 0:
            return
        if self.last_prime >= 0:
            ext = np.concatenate([np.array([self.last_prime], dtype=np.int64), primes])
            base = self.pi1
        else:
            ext = primes
            base = self.pi1 + 1
        j = np.flatnonzero(np.diff(ext) == 2)
        twin_p = ext[j]
        twin_pos = base + j
        if self.discard_anomalous:
            keep = twin_p != ANOMALOUS_TWIN
            twin_p, twin_pos = twin_p[keep], twin_pos[keep]
        self.pi1 += primes.size
        self.last_prime = int(primes[-1])
        if twin_p.size == 0:
            return

        if self.last_twin_pos >= 0:
            all_p = np.concatenate([[self.last_twin_p], twin_p])
            all_pos = np.concatenate([[self.last_twin_pos], twin_pos])
            first_right_index = self.twin_count
        else:
            all_p, all_pos = twin_p, twin_pos
            first_right_index = self.twin_count + 1
        s = np.maximum(all_pos[1:] - all_pos[:-1] - 2, 0)
        self.twin_count += twin_p.size
        self.last_twin_p = int(twin_p[-1])
        self.last_twin_pos = int(twin_pos[-1])
        if s.size == 0:
            return

        counts = np.bincount(s)
        if counts.size > self.hist.size:
            self.hist = np.concatenate([self.hist, np.zeros(counts.size - self.hist.size, np.int64)])
        self.hist[: counts.size] += counts

        running = np.maximum(np.maximum.accumulate(s), self.max_sep)
        prior = np.concatenate([[self.max_sep], running[:-1]])
        for k in np.flatnonzero(s > prior):
            self.records.append(RecordGap(int(s[k]), int(all_p[k + 1]), int(first_right_index + k)))
        self.max_sep = int(running[-1])
        if sep_sink is not None:
            sep_sink(all_p[:-1], all_p[1:], s)

    @property
    def gap_count(self) -> int:
        return int(self.hist.sum())


# -- CSV interfaces -----------------------------------------------------------

def write_records_csv(path, records: Iterable[RecordGap]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "onset_N", "twin_index"])
        for r in records:
            w.writerow([r.s, r.onset_N, r.twin_index])


def read_records_csv(path) -> list[RecordGap]:
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [RecordGap(int(r["s"]), int(r["onset_N"]), int(r["twin_index"])) for r in rows]


def write_separations_header(fh) -> None:
    fh.write("left_p,right_p,s\n")


def write_separation_rows(fh, left_p, right_p, s) -> None:
    np.savetxt(fh, np.column_stack([left_p, right_p, s]), fmt="%d", delimiter=",")
