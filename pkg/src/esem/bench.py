"""Wall-clock benchmark harness with operation-count profiles.

Measures sign/verify latencies of the Schnorr baseline, the seed-derived
scheme and its table-cached variant on the same group and machine, and
attaches each path's exact operation profile.  Sign loops run the full
requested iteration count; verify loops run a tenth of it (variable-base
multiplication in pure Python makes full-length verify loops pure waiting).
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass
from typing import Dict, List, Optional

from . import schnorr
from . import scheme as esem_scheme
from .groupmath import OpCounter
from .snodbpv import ESEM_PARAMS, SnodParams


@dataclass(frozen=True)
class BenchRow:
    scheme: str
    operation: str
    iterations: int
    median_us: float
    mean_us: float
    ops: Dict[str, int]


CSV_HEADER = (
    "scheme,operation,iterations,median_us,mean_us,"
    "fixed_base_mults,var_base_mults,point_adds,scalar_mults,scalar_adds,"
    "prf_calls,hash_calls"
)


def _timed(fn, iterations: int) -> List[float]:
    samples = []
    clock = time.perf_counter
    for _ in range(iterations):
        t0 = clock()
        fn()
        samples.append(clock() - t0)
    return samples


def _row(scheme_name: str, operation: str, samples: List[float], profile: OpCounter) -> BenchRow:
    return BenchRow(
        scheme=scheme_name,
        operation=operation,
        iterations=len(samples),
        median_us=statistics.median(samples) * 1e6,
        mean_us=statistics.fmean(samples) * 1e6,
        ops=profile.as_dict(),
    )


def run_benchmarks(
    params: SnodParams = ESEM_PARAMS,
    iterations: int = 10_000,
    verify_iterations: Optional[int] = None,
    rng: Optional[random.Random] = None,
    message: bytes = b"benchmark message payload 0123456789",
) -> List[BenchRow]:
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if verify_iterations is None:
        verify_iterations = max(1, iterations // 10)
    rows: List[BenchRow] = []

    # Schnorr baseline.
    keypair = schnorr.keygen(rng)
    profile = OpCounter()
    schnorr.sign(message, keypair.y, rng, profile)
    rows.append(
        _row("Schnorr", "sign", _timed(lambda: schnorr.sign(message, keypair.y, rng), iterations), profile)
    )
    sig = schnorr.sign(message, keypair.y, rng)
    profile = OpCounter()
    schnorr.verify(message, sig, keypair.Y, profile)
    rows.append(
        _row("Schnorr", "verify", _timed(lambda: schnorr.verify(message, sig, keypair.Y), verify_iterations), profile)
    )

    # Seed-derived scheme, then the table-cached variant of the same key.
    sk, pk, shares = esem_scheme.keygen(params, rng)
    source = esem_scheme.LocalPartySet(shares)
    profile = OpCounter()
    esem_scheme.sign(message, sk, profile)
    rows.append(
        _row("ESEM", "sign", _timed(lambda: esem_scheme.sign(message, sk), iterations), profile)
    )
    esig = esem_scheme.sign(message, sk)
    profile = OpCounter()
    esem_scheme.verify(message, esig, pk, source, profile)
    rows.append(
        _row(
            "ESEM",
            "verify",
            _timed(lambda: esem_scheme.verify(message, esig, pk, source), verify_iterations),
            profile,
        )
    )

    sk2 = esem_scheme.esem2_expand(
        esem_scheme.EsemSigningKey(y=sk.y, counter=sk.counter, params=params)
    )
    profile = OpCounter()
    esem_scheme.sign(message, sk2, profile)
    rows.append(
        _row("ESEM2", "sign", _timed(lambda: esem_scheme.sign(message, sk2), iterations), profile)
    )
    return rows


def format_csv(rows: List[BenchRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        ops = r.ops
        lines.append(
            f"{r.scheme},{r.operation},{r.iterations},{r.median_us:.2f},{r.mean_us:.2f},"
            f"{ops['fixed_base_mults']},{ops['var_base_mults']},{ops['point_adds']},"
            f"{ops['scalar_mults']},{ops['scalar_adds']},{ops['prf_calls']},{ops['hash_calls']}"
        )
    return "\n".join(lines) + "\n"


def format_text(rows: List[BenchRow]) -> str:
    header = f"{'scheme':8s} {'op':7s} {'iters':>7s} {'median':>10s} {'mean':>10s}  op profile"
    lines = [header, "-" * len(header)]
    for r in rows:
        profile = ", ".join(f"{k}={v}" for k, v in r.ops.items() if v)
        lines.append(
            f"{r.scheme:8s} {r.operation:7s} {r.iterations:7d} "
            f"{r.median_us:8.1f}us {r.mean_us:8.1f}us  {profile or '-'}"
        )
    return "\n".join(lines) + "\n"
