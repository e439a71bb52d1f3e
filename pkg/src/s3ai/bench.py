"""Scalability harness: replicate the two demo sites N times, run the
mediated workload through a live deployment of N endpoint processes, and
fit memory and latency against the site count.

Each site runs as its own OS process (that is precisely why querying-site
memory grows with N); the harness samples the resident set of all serving
processes at 1 Hz and times every mediated query. Reported absolute
numbers depend on the machine; the linear trend is the reproducible claim.
"""

from __future__ import annotations

import shutil
import socket
import statistics
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import psutil
import requests

from .demo import NO_VIDEO_QUERY, build_fixtures, sized_spec
from .federate import (
    EndpointDescriptor,
    EndpointRegistry,
    FederationOptions,
    evaluate_federated,
    mediate,
)
from .sparql import parse_query

DEFAULT_TRIPLES_PER_SITE = 84_192


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class BenchPoint:
    sites: int
    total_triples: int
    peak_memory_bytes: int
    mean_ms: float
    p95_ms: float


@dataclass
class BenchReport:
    points: list[BenchPoint] = field(default_factory=list)
    fits: dict[str, Optional[LinearFit]] = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["N,triples,memBytes,meanMs,p95Ms"]
        for p in self.points:
            lines.append(
                f"{p.sites},{p.total_triples},{p.peak_memory_bytes},"
                f"{p.mean_ms:.2f},{p.p95_ms:.2f}"
            )
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        header = f"{'sites':>6} {'triples':>10} {'peak MB':>10} {'mean ms':>10} {'p95 ms':>10}"
        rows = [header, "-" * len(header)]
        for p in self.points:
            rows.append(
                f"{p.sites:>6} {p.total_triples:>10} "
                f"{p.peak_memory_bytes / 1e6:>10.1f} {p.mean_ms:>10.2f} {p.p95_ms:>10.2f}"
            )
        for name, fit in self.fits.items():
            if fit is None:
                rows.append(f"{name}: fit undefined (need at least two site counts)")
            else:
                rows.append(
                    f"{name}: slope={fit.slope:.3g} intercept={fit.intercept:.3g} "
                    f"R^2={fit.r_squared:.4f}"
                )
        return "\n".join(rows)


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> Optional[LinearFit]:
    if len(xs) < 2 or len(set(xs)) < 2:
        return None
    slope, intercept = statistics.linear_regression(xs, ys)
    try:
        r = statistics.correlation(xs, ys)
        r2 = r * r
    except statistics.StatisticsError:
        r2 = 0.0
    return LinearFit(slope, intercept, min(1.0, max(0.0, r2)))


def _free_port(host: str) -> int:
    with socket.socket() as s:
        s.bind((host, 0))
        return s.getsockname()[1]


def _wait_ready(url: str, timeout_s: float = 30.0) -> None:
    deadline = time.monotonic() + timeout_s
    last_error = "no attempt"
    while time.monotonic() < deadline:
        try:
            r = requests.get(url + "/sparql", params={"query": "SELECT * WHERE {}"},
                             timeout=2)
            if r.status_code == 200:
                return
            last_error = f"status {r.status_code}"
        except requests.RequestException as exc:
            last_error = str(exc)
        time.sleep(0.1)
    raise BenchError(f"endpoint {url} not ready: {last_error}")


class _MemorySampler(threading.Thread):
    """1 Hz peak-RSS tracker over the serving processes."""

    def __init__(self, pids: list[int]) -> None:
        super().__init__(daemon=True)
        self._procs = [psutil.Process(pid) for pid in pids]
        self._halt = threading.Event()  # Thread reserves the _stop name
        self.peak = 0

    def _sample(self) -> None:
        total = 0
        for proc in self._procs:
            try:
                total += proc.memory_info().rss
            except psutil.NoSuchProcess:
                pass
        self.peak = max(self.peak, total)

    def run(self) -> None:
        self._sample()
        while not self._halt.wait(1.0):
            self._sample()

    def stop(self) -> None:
        self._sample()
        self._halt.set()
        self.join(timeout=5)


@dataclass
class _Site:
    name: str
    port: int
    process: subprocess.Popen
    triples: int


def _launch_site(site_dir: Path, name: str, port: int, host: str) -> subprocess.Popen:
    mapping = site_dir / "mapping.ttl"
    return subprocess.Popen(
        [
            sys.executable, "-m", "s3ai", "serve",
            "-b", f"http://{host}:{port}/", "-p", str(port), "--fast",
            str(mapping),
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )


def run_bench(
    site_counts: Sequence[int],
    triples_per_site: int = DEFAULT_TRIPLES_PER_SITE,
    scale: int = 1,
    workload: Optional[list[str]] = None,
    dest: Optional[Path] = None,
    repetitions: int = 5,
    host: str = "127.0.0.1",
    seed: int = 0,
) -> BenchReport:
    """Measure peak serving memory and mediated-query latency for each N.

    Sites replicate the two demo schemas alternately. The workload runs in
    mediated mode with sequential fan-out (one request in flight), so the
    per-query wall time reflects the total work, which grows with N.
    """
    counts = list(site_counts)
    if counts != sorted(set(counts)):
        raise BenchError("site counts must be strictly increasing")
    if scale < 1:
        raise BenchError("scale must be >= 1")
    target = max(1, triples_per_site // scale)
    queries = workload or [NO_VIDEO_QUERY]
    parsed_queries = [parse_query(q) for q in queries]

    root = Path(dest) if dest else Path("bench-scratch")
    root.mkdir(parents=True, exist_ok=True)
    base = build_fixtures(root / "base", sized_spec(target, seed=seed))
    variants = (
        (base.os_mapping_aligned, base.os_db, base.os_expected_triples),
        (base.glpi_mapping_aligned, base.glpi_db, base.glpi_expected_triples),
    )

    report = BenchReport()
    for n in counts:
        sites: list[_Site] = []
        run_dir = root / f"n{n}"
        try:
            for i in range(n):
                mapping_path, db_path, triples = variants[i % 2]
                site_dir = run_dir / f"site{i}"
                site_dir.mkdir(parents=True, exist_ok=True)
                shutil.copy(db_path, site_dir / db_path.name)
                shutil.copy(mapping_path, site_dir / "mapping.ttl")
                port = _free_port(host)
                process = _launch_site(site_dir, f"site{i}", port, host)
                sites.append(_Site(f"site{i}", port, process, triples))
            for site in sites:
                _wait_ready(f"http://{host}:{site.port}")
            registry = EndpointRegistry(tuple(
                EndpointDescriptor(site.name, f"http://{host}:{site.port}/sparql")
                for site in sites
            ))
            opts = FederationOptions(max_parallel=1, provenance_variable="site")
            for ast in parsed_queries:  # warmup: caches and pools settle
                evaluate_federated(mediate(ast, registry, opts), registry, opts)
            sampler = _MemorySampler([site.process.pid for site in sites])
            sampler.start()
            latencies: list[float] = []
            for _ in range(repetitions):
                for ast in parsed_queries:
                    started = time.perf_counter()
                    evaluate_federated(mediate(ast, registry, opts), registry, opts)
                    latencies.append((time.perf_counter() - started) * 1000.0)
            sampler.stop()
            latencies.sort()
            p95_index = max(0, int(len(latencies) * 0.95 + 0.5) - 1)
            report.points.append(BenchPoint(
                sites=n,
                total_triples=sum(site.triples for site in sites),
                peak_memory_bytes=sampler.peak,
                mean_ms=statistics.fmean(latencies),
                p95_ms=latencies[p95_index],
            ))
        finally:
            for site in sites:
                site.process.terminate()
            for site in sites:
                try:
                    site.process.wait(timeout=10)
                except subprocess.TimeoutExpired:
                    site.process.kill()
    xs = [float(p.sites) for p in report.points]
    report.fits["memory_vs_sites"] = linear_fit(xs, [float(p.peak_memory_bytes) for p in report.points])
    report.fits["latency_vs_sites"] = linear_fit(xs, [p.mean_ms for p in report.points])
    return report
