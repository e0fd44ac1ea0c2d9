"""Segmented sieve of Eratosthenes with prime counting and checkpoint files.

Segments are sieved over odd numbers only. They are emitted in ascending
order whatever the number of workers, so consumers can treat the output as a
single ordered stream.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .errors import CensusError, CheckpointError, ConfigError

MAX_LIMIT = 2**63 - 1
DEFAULT_SEGMENT_SIZE = 2**22
CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SieveConfig:
    limit: int
    segment_size: int = DEFAULT_SEGMENT_SIZE
    checkpoint_every: int = 1  # segments between PrimeCounter checkpoints
    workers: int = 1

    def __post_init__(self):
        for name in ("limit", "segment_size", "checkpoint_every", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.limit > MAX_LIMIT:
            raise ConfigError(f"limit {self.limit} exceeds 2^63-1")
        if self.segment_size < 2:
            raise ConfigError("segment_size must be >= 2")
        if self.checkpoint_every < 1 or self.workers < 1:
            raise ConfigError("checkpoint_every and workers must be positive")


@dataclass(frozen=True)
class PrimeCounter:
    """Sieve progress: every integer <= n_processed is done and pi1 primes were found."""

    n_processed: int
    pi1: int

    def __post_init__(self):
        if self.pi1 < 0 or (self.n_processed >= 0 and self.pi1 > self.n_processed):
            raise CheckpointError(f"inconsistent counter {self!r}")


@dataclass(frozen=True)
class Segment:
    lo: int
    hi: int  # inclusive
    primes: np.ndarray


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit, by a plain (unsegmented) sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def sieve_segment(lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    """Primes in the closed interval [lo, hi].

    ``base_primes`` must contain every odd prime up to isqrt(hi); extra
    entries are ignored.
    """
    lo = max(lo, 0)
    if hi < lo or hi < 2:
        return np.array([], dtype=np.int64)
    first_odd = lo | 1
    n_odd = (hi - first_odd) // 2 + 1 if hi >= first_odd else 0
    mask = np.ones(max(n_odd, 0), dtype=bool)
    if first_odd == 1 and n_odd:
        mask[0] = False
    root = math.isqrt(hi)
    for p in base_primes:
        p = int(p)
        if p > root:
            break
        if p == 2:
            continue
        start = max(p * p, -(-lo // p) * p)
        if not start & 1:
            start += p
        if start > hi:
            continue
        mask[(start - first_odd) // 2 :: p] = False
    odd = first_odd + 2 * np.flatnonzero(mask).astype(np.int64)
    if lo <= 2 <= hi:
        return np.concatenate([np.array([2], dtype=np.int64), odd])
    return odd


def segment_bounds(start: int, limit: int, segment_size: int,
                   boundaries: Iterable[int] = ()) -> list[tuple[int, int]]:
    """Split [start, limit] into closed ranges of at most ``segment_size`` numbers.

    Ranges are aligned to multiples of ``segment_size`` and additionally cut so
    that every value in ``boundaries`` ends a range.
    """
    cuts = sorted({int(b) for b in boundaries if start <= b < limit})
    out = []
    lo = start
    cut_iter = iter(cuts)
    next_cut = next(cut_iter, None)
    while lo <= limit:
        hi = min((lo // segment_size + 1) * segment_size - 1, limit)
        while next_cut is not None and next_cut < lo:
            next_cut = next(cut_iter, None)
        if next_cut is not None and next_cut < hi:
            hi = next_cut
        out.append((lo, hi))
        lo = hi + 1
    return out


def _sieve_task(args):
    lo, hi, base = args
    return sieve_segment(lo, hi, base)


def iter_segments(config: SieveConfig, start: int = 0,
                  boundaries: Iterable[int] = ()) -> Iterator[Segment]:
    """Yield sieved segments covering [start, config.limit] in ascending order."""
    if config.limit < 2 or start > config.limit:
        return
    base = simple_sieve(math.isqrt(config.limit))
    bounds = segment_bounds(start, config.limit, config.segment_size, boundaries)
    last_done = start - 1
    try:
        if config.workers == 1:
            for lo, hi in bounds:
                yield Segment(lo, hi, sieve_segment(lo, hi, base))
                last_done = hi
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                # map() returns results in submission order, which is the merge stage
                results = pool.map(_sieve_task, ((lo, hi, base) for lo, hi in bounds))
                for (lo, hi), primes in zip(bounds, results):
                    yield Segment(lo, hi, primes)
                    last_done = hi
    except MemoryError as exc:
        raise CensusError(f"out of memory while sieving; last completed boundary {last_done}",
                          last_boundary=last_done) from exc


def primes_up_to(config: SieveConfig, resume: PrimeCounter | None = None) -> Iterator[int]:
    """Every prime <= config.limit in ascending order.

    With ``resume``, only primes above ``resume.n_processed`` are emitted.
    """
    start = 0 if resume is None else resume.n_processed + 1
    for seg in iter_segments(config, start=start):
        yield from seg.primes.tolist()


def iter_prime_counters(config: SieveConfig, resume: PrimeCounter | None = None
                        ) -> Iterator[PrimeCounter]:
    """Running PrimeCounter after every ``checkpoint_every`` segments and at the end."""
    counter = resume or PrimeCounter(-1, 0)
    pending = 0
    for seg in iter_segments(config, start=counter.n_processed + 1):
        counter = PrimeCounter(seg.hi, counter.pi1 + len(seg.primes))
        pending += 1
        if pending == config.checkpoint_every or seg.hi == config.limit:
            pending = 0
            yield counter


@lru_cache(maxsize=256)
def prime_count(limit: int) -> int:
    """pi(limit), the number of primes <= limit."""
    if limit < 2:
        return 0
    total = 0
    for seg in iter_segments(SieveConfig(limit=int(limit))):
        total += len(seg.primes)
    return total


def is_prime_oracle(n: int) -> bool:
    """Trial division up to sqrt(n). Slow; meant for tests."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


# -- checkpoint files ---------------------------------------------------------

def write_checkpoint(path, counter: PrimeCounter, extra: dict | None = None) -> None:
    """Atomically write a key=value checkpoint file.

    ``extra`` carries additional string-valued keys for callers that need more
    state than the prime counter (the census stores its histogram there).
    """
    lines = [f"format_version={CHECKPOINT_FORMAT_VERSION}",
             f"n_processed={counter.n_processed}",
             f"pi1={counter.pi1}"]
    for key, value in (extra or {}).items():
        if "=" in key or "\n" in key or "\n" in str(value):
            raise CheckpointError(f"cannot serialise key {key!r}")
        lines.append(f"{key}={value}")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_checkpoint(path) -> tuple[PrimeCounter, dict[str, str]]:
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CheckpointError(f"{path}:{lineno}: expected key=value")
        fields[key.strip()] = value.strip()
    try:
        version = int(fields.pop("format_version"))
        counter = PrimeCounter(int(fields.pop("n_processed")), int(fields.pop("pi1")))
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format_version {version}")
    return counter, fields
