"""Benchmark runner: wall-times full in-process sessions against the
participant count and fits a line to the result.

The running time of one session is linear in the number of participants, so
an ordinary least-squares line fit captures it; R-squared close to 1 is the
check that the linear model holds. REFERENCE_TIMINGS carries a published
reference table for the two standard backends (secp256k1 and 2048-bit modp)
used by the ``verify`` subcommand; absolute numbers are hardware-specific
and are not expected to be reproduced.
"""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import BenchError
from .groups import GroupParams, ModpMode, generate_group
from .hashing import ParticipantKeys
from .net import run_basic_session
from .protocol import Phase
from . import pke

# (participants, seconds over ec backend, seconds over modp backend)
REFERENCE_TIMINGS: tuple[tuple[int, float, float], ...] = (
    (4, 0.028, 0.280),
    (8, 0.058, 0.561),
    (16, 0.111, 1.122),
    (32, 0.222, 2.245),
    (64, 0.442, 4.511),
    (128, 0.882, 9.065),
    (256, 1.772, 18.318),
    (512, 3.551, 37.178),
    (1024, 7.135, 76.174),
    (2048, 14.431, 160.599),
    (4096, 29.474, 352.496),
    (8192, 61.157, 837.490),
    (16384, 132.225, 2242.677),
)

CSV_HEADER = ("backend", "N", "trials", "mean_s", "stddev_s")


@dataclass(frozen=True)
class BenchPoint:
    backend: str
    n: int
    trials: int
    mean_s: float
    stddev_s: float


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def default_bits(backend: str) -> int:
    return 256 if backend == "ec" else 2048


def bench_params(backend: str, bits: Optional[int] = None,
                 mode: ModpMode = ModpMode.SUBGROUP) -> GroupParams:
    return generate_group(backend, bits if bits is not None else default_bits(backend),
                          seed=0, mode=mode)


def run_bench(backend: str, sizes: Sequence[int], trials: int, seed: int = 0,
              params: Optional[GroupParams] = None) -> list[BenchPoint]:
    """Average wall time of `trials` full sessions at each participant count.

    Setup (parameters, keys, the server key pair) happens outside the timer;
    the timed region is the protocol itself, upload request through digest.
    """
    if trials < 1:
        raise BenchError("trials must be positive")
    if params is None:
        params = bench_params(backend)
    rng = random.Random(seed)
    server_keypair = pke.generate_keypair(params, rng)
    points = []
    for n in sizes:
        if n < 1:
            raise BenchError("participant counts must be positive")
        keys = [ParticipantKeys.random(params, rng) for _ in range(n)]
        m = rng.randrange(params.exponent_modulus)
        samples = []
        for _ in range(trials):
            session_seed = rng.randrange(2**63)
            start = time.perf_counter()
            outcome = run_basic_session(params, keys, m, seed=session_seed,
                                        server_keypair=server_keypair)
            elapsed = time.perf_counter() - start
            if outcome.phase is not Phase.DONE:
                raise BenchError(
                    f"session failed at N={n}: {outcome.error_code}")
            samples.append(elapsed)
        stddev = statistics.stdev(samples) if len(samples) > 1 else 0.0
        points.append(BenchPoint(backend, n, trials,
                                 statistics.fmean(samples), stddev))
    return points


def linear_fit(points: Sequence[tuple[float, float]]) -> LinearFit:
    """Least-squares line through (N, seconds) pairs, with R-squared."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    if len(set(xs)) < 2:
        raise ValueError("all sizes equal; the fit is singular")
    reg = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (reg.slope * x + reg.intercept)) ** 2
                 for x, y in zip(xs, ys))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return LinearFit(slope=reg.slope, intercept=reg.intercept,
                     r_squared=r_squared)


def fit_points(points: Sequence[BenchPoint]) -> LinearFit:
    return linear_fit([(p.n, p.mean_s) for p in points])


def reference_fit(backend: str,
                  rows: Optional[Sequence[tuple[int, float, float]]] = None) -> LinearFit:
    """Fit over the reference table's column for the given backend."""
    rows = REFERENCE_TIMINGS if rows is None else rows
    column = 1 if backend == "ec" else 2
    return linear_fit([(row[0], row[column]) for row in rows])


def write_csv(points: Sequence[BenchPoint], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for p in points:
            writer.writerow([p.backend, p.n, p.trials,
                             f"{p.mean_s:.9f}", f"{p.stddev_s:.9f}"])


def read_csv(path: str) -> list[BenchPoint]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [BenchPoint(row["backend"], int(row["N"]), int(row["trials"]),
                           float(row["mean_s"]), float(row["stddev_s"]))
                for row in reader]


def read_reference_csv(path: str) -> list[tuple[int, float, float]]:
    """Read a reference table CSV: participants,ec_seconds,modp_seconds."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(int(row["participants"]), float(row["ec_seconds"]),
                 float(row["modp_seconds"])) for row in reader]
    if not rows:
        raise BenchError(f"no rows in {path}")
    return rows
