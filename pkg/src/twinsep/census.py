"""Resumable twin-prime census: sieve -> twins -> histograms on disk.

Output directory layout::

    census.ckpt        key=value checkpoint (sieve counter + scanner state)
    hist_<N>.csv       separation histogram at each checkpoint bound N
    records.csv        record separations (onsets of successive maxima)
    summary.csv        pi1, pi2 and gap count per checkpoint bound
    separations.csv    every separation (only with write_separations)
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from filelock import FileLock, Timeout

from .errors import CensusError, CheckpointError, ConfigError
from .sieve import DEFAULT_SEGMENT_SIZE, PrimeCounter, SieveConfig, iter_segments, read_checkpoint, write_checkpoint
from .stats import DEFAULT_CHECKPOINTS, SeparationHistogram, read_histogram_csv, write_histogram_csv
from .twins import RecordGap, TwinScanner, write_records_csv, write_separation_rows, write_separations_header

log = logging.getLogger(__name__)

CHECKPOINT_NAME = "census.ckpt"
LOCK_NAME = "census.lock"
RECORDS_NAME = "records.csv"
SUMMARY_NAME = "summary.csv"
SEPARATIONS_NAME = "separations.csv"


def hist_name(n: int) -> str:
    return f"hist_{n}.csv"


def checkpoint_grid(limit: int, checkpoints: Sequence[int] | None = None) -> list[int]:
    """Snapshot bounds <= limit; the limit itself is always included."""
    grid = DEFAULT_CHECKPOINTS if checkpoints is None else checkpoints
    return sorted({int(n) for n in grid if 2 <= n <= limit} | {int(limit)})


@dataclass
class CensusResult:
    limit: int
    completed: bool
    n_processed: int
    histograms: list[SeparationHistogram] = field(default_factory=list)
    records: list[RecordGap] = field(default_factory=list)


def _encode_state(sc: TwinScanner, snapshots, sep_offset, settings) -> dict:
    return {
        **settings,
        "last_prime": sc.last_prime,
        "twin_count": sc.twin_count,
        "last_twin_p": sc.last_twin_p,
        "last_twin_pos": sc.last_twin_pos,
        "max_sep": sc.max_sep,
        "hist": ",".join(str(int(c)) for c in sc.hist),
        "records": ";".join(f"{r.s}:{r.onset_N}:{r.twin_index}" for r in sc.records),
        "snapshots": ";".join(f"{n}:{p1}:{p2}" for n, p1, p2 in snapshots),
        "separations_offset": sep_offset,
    }


def _decode_state(counter: PrimeCounter, extra: dict, discard: bool):
    try:
        sc = TwinScanner(
            discard_anomalous=discard,
            pi1=counter.pi1,
            last_prime=int(extra["last_prime"]),
            twin_count=int(extra["twin_count"]),
            last_twin_p=int(extra["last_twin_p"]),
            last_twin_pos=int(extra["last_twin_pos"]),
            max_sep=int(extra["max_sep"]),
            hist=np.array([int(c) for c in extra["hist"].split(",") if c], dtype=np.int64),
            records=[RecordGap(*map(int, r.split(":"))) for r in extra["records"].split(";") if r],
        )
        snapshots = [tuple(map(int, s.split(":"))) for s in extra["snapshots"].split(";") if s]
        sep_offset = int(extra["separations_offset"])
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"corrupt census state: {exc}") from exc
    return sc, snapshots, sep_offset


def _write_summary(path: Path, snapshots) -> None:
    with open(path, "w") as fh:
        fh.write("n,pi1,pi2,gaps\n")
        for n, pi1, pi2 in snapshots:
            fh.write(f"{n},{pi1},{pi2},{max(pi2 - 1, 0)}\n")


def run_census(limit: int, out_dir, checkpoints: Sequence[int] | None = None, *,
               segment_size: int = DEFAULT_SEGMENT_SIZE, resume: bool = False,
               discard_anomalous: bool = True, write_separations: bool = False,
               checkpoint_every: int = 1, workers: int = 1,
               max_segments: int | None = None) -> CensusResult:
    """Sieve up to ``limit`` and write census artifacts into ``out_dir``.

    ``max_segments`` stops the run early after that many segments, leaving a
    checkpoint to resume from; it exists to exercise interruption.
    """
    limit = int(limit)
    if limit < 100:
        raise ConfigError(f"census limit must be >= 100, got {limit}")
    config = SieveConfig(limit=limit, segment_size=segment_size,
                         checkpoint_every=checkpoint_every, workers=workers)
    grid = checkpoint_grid(limit, checkpoints)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(out / LOCK_NAME), timeout=0)
        lock.acquire()
    except Timeout as exc:
        raise CensusError(f"{out} is locked by another census") from exc
    except OSError as exc:
        raise CensusError(f"cannot use output directory {out}: {exc}") from exc
    try:
        return _run_locked(config, grid, out, resume, discard_anomalous,
                           write_separations, max_segments)
    finally:
        lock.release()


def _run_locked(config: SieveConfig, grid, out: Path, resume, discard,
                write_separations, max_segments) -> CensusResult:
    settings = {
        "limit": config.limit,
        "segment_size": config.segment_size,
        "checkpoints": ",".join(map(str, grid)),
        "discard_anomalous": int(discard),
        "write_separations": int(write_separations),
    }
    ckpt_path = out / CHECKPOINT_NAME
    sep_path = out / SEPARATIONS_NAME
    counter = PrimeCounter(-1, 0)
    scanner = TwinScanner(discard_anomalous=discard)
    snapshots: list[tuple[int, int, int]] = []
    sep_offset = 0

    if resume and ckpt_path.exists():
        counter, extra = read_checkpoint(ckpt_path)
        for key, value in settings.items():
            if extra.get(key) != str(value):
                raise CheckpointError(
                    f"checkpoint {key}={extra.get(key)!r} does not match requested {value!r}")
        scanner, snapshots, sep_offset = _decode_state(counter, extra, discard)
        log.info("resuming census at n=%d (pi1=%d)", counter.n_processed, counter.pi1)
    elif resume:
        log.warning("no checkpoint in %s; starting from scratch", out)

    sep_fh = None
    if write_separations:
        if sep_offset:
            sep_fh = open(sep_path, "r+")
            sep_fh.truncate(sep_offset)
            sep_fh.seek(sep_offset)
        else:
            sep_fh = open(sep_path, "w")
            write_separations_header(sep_fh)
            sep_offset = sep_fh.tell()

    def sink(left, right, s):
        write_separation_rows(sep_fh, left, right, s)

    grid_set = set(grid)
    done = 0
    pending = 0
    try:
        for seg in iter_segments(config, start=counter.n_processed + 1, boundaries=grid):
            scanner.feed(seg.primes, sink if sep_fh else None)
            counter = PrimeCounter(seg.hi, scanner.pi1)
            if seg.hi in grid_set:
                hist = SeparationHistogram.from_array(scanner.hist, seg.hi, scanner.pi1,
                                                      scanner.twin_count)
                write_histogram_csv(out / hist_name(seg.hi), hist)
                snapshots.append((seg.hi, scanner.pi1, scanner.twin_count))
            done += 1
            pending += 1
            if pending >= config.checkpoint_every or seg.hi == config.limit \
                    or (max_segments is not None and done >= max_segments):
                if sep_fh:
                    sep_fh.flush()
                    sep_offset = sep_fh.tell()
                write_checkpoint(ckpt_path, counter,
                                 _encode_state(scanner, snapshots, sep_offset, settings))
                pending = 0
            if max_segments is not None and done >= max_segments and seg.hi < config.limit:
                return CensusResult(config.limit, False, counter.n_processed)
    except OSError as exc:
        raise CensusError(f"I/O failure after n={counter.n_processed}: {exc}",
                          last_boundary=counter.n_processed) from exc
    finally:
        if sep_fh:
            sep_fh.close()

    write_records_csv(out / RECORDS_NAME, scanner.records)
    _write_summary(out / SUMMARY_NAME, snapshots)
    hists = [read_histogram_csv(out / hist_name(n)) for n, _, _ in snapshots]
    return CensusResult(config.limit, True, counter.n_processed, hists, list(scanner.records))


def load_histograms(out_dir) -> list[SeparationHistogram]:
    out = Path(out_dir)
    paths = sorted(out.glob("hist_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
    if not paths:
        raise CensusError(f"no histogram files in {out}; run a census first")
    return [read_histogram_csv(p) for p in paths]


def census_artifacts(out_dir) -> list[str]:
    """Names of the deterministic artifact files present in ``out_dir``."""
    return sorted(n for n in os.listdir(out_dir) if n.endswith(".csv") or n == CHECKPOINT_NAME)
