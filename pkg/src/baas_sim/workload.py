"""Synthetic workload generation and workload CSV I/O.

Every random draw goes through :class:`Prng` (SplitMix64) so a given
configuration produces the same cloudlets on any platform.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Union

MASK64 = (1 << 64) - 1

CSV_HEADER = (
    "cloudlet_id",
    "user_id",
    "length_mi",
    "file_size",
    "output_size",
    "pes",
    "priority",
    "arrival_ms",
)


class WorkloadError(ValueError):
    pass


class Prng:
    """SplitMix64 in wrapping 64-bit arithmetic."""

    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform_int(self, lo: int, hi: int) -> int:
        # modulo reduction; the small bias is accepted for reproducibility
        return lo + self.next() % (hi - lo + 1)


@dataclass(frozen=True, slots=True)
class Cloudlet:
    cloudlet_id: int
    user_id: int
    length_mi: int
    file_size: int = 300
    output_size: int = 300
    pes: int = 1
    priority: int = 0
    arrival_ms: int = 0


@dataclass(frozen=True)
class Constant:
    value: int


@dataclass(frozen=True)
class Uniform:
    min: int
    max: int


@dataclass(frozen=True)
class AllAtZero:
    pass


@dataclass(frozen=True)
class UniformJitter:
    """Cloudlet ``i`` arrives at ``i * base_interval_ms + U[0, jitter_ms]``."""

    base_interval_ms: int
    jitter_ms: int = 0


Dist = Union[Constant, Uniform]
ArrivalModel = Union[AllAtZero, UniformJitter]


@dataclass(frozen=True)
class WorkloadConfig:
    num_cloudlets: int = 1_000_000
    length_dist: Dist = Constant(40000)
    priority_dist: Dist = Constant(0)
    arrival: ArrivalModel = field(default_factory=AllAtZero)
    file_size: int = 300
    output_size: int = 300
    pes: int = 1
    seed: int = 0
    priority_levels: int = 8

    def validate(self) -> None:
        if self.num_cloudlets < 0:
            raise WorkloadError("num_cloudlets must be >= 0")
        if self.priority_levels < 1:
            raise WorkloadError("priority_levels must be >= 1")
        if self.pes < 1:
            raise WorkloadError("pes must be >= 1")
        if self.file_size < 0 or self.output_size < 0:
            raise WorkloadError("file_size and output_size must be >= 0")
        if not 0 <= self.seed <= MASK64:
            raise WorkloadError("seed must be a 64-bit unsigned integer")
        _check_dist("length", self.length_dist, lo=1)
        _check_dist("priority", self.priority_dist, lo=0, hi=self.priority_levels - 1)
        if isinstance(self.arrival, UniformJitter):
            if self.arrival.base_interval_ms < 0:
                raise WorkloadError("base_interval_ms must be >= 0")
            if self.arrival.jitter_ms < 0:
                raise WorkloadError("jitter_ms must be >= 0")
        elif not isinstance(self.arrival, AllAtZero):
            raise WorkloadError(f"unsupported arrival model: {self.arrival!r}")


def _check_dist(name: str, dist: Dist, lo: int, hi: int | None = None) -> None:
    if isinstance(dist, Constant):
        bounds = (dist.value, dist.value)
    elif isinstance(dist, Uniform):
        if dist.min > dist.max:
            raise WorkloadError(f"{name}: min must be <= max")
        bounds = (dist.min, dist.max)
    else:
        raise WorkloadError(f"{name}: unsupported distribution {dist!r}")
    if bounds[0] < lo:
        raise WorkloadError(f"{name} must be >= {lo}")
    if hi is not None and bounds[1] > hi:
        raise WorkloadError(f"{name} must be <= {hi}")


def _draw(dist: Dist, rng: Prng) -> int:
    # constants consume no draws
    if isinstance(dist, Constant):
        return dist.value
    return rng.uniform_int(dist.min, dist.max)


def generate(config: WorkloadConfig) -> list[Cloudlet]:
    """Generate ``config.num_cloudlets`` cloudlets sorted by (arrival, id).

    Per cloudlet the draws happen in a fixed order: length, priority,
    arrival jitter.
    """
    config.validate()
    rng = Prng(config.seed)
    arrival = config.arrival
    jittered = isinstance(arrival, UniformJitter)
    out = []
    for i in range(config.num_cloudlets):
        length = _draw(config.length_dist, rng)
        priority = _draw(config.priority_dist, rng)
        if jittered:
            t = i * arrival.base_interval_ms
            if arrival.jitter_ms:
                t += rng.uniform_int(0, arrival.jitter_ms)
        else:
            t = 0
        out.append(
            Cloudlet(
                cloudlet_id=i,
                user_id=i,
                length_mi=length,
                file_size=config.file_size,
                output_size=config.output_size,
                pes=config.pes,
                priority=priority,
                arrival_ms=t,
            )
        )
    if jittered:
        out.sort(key=lambda c: (c.arrival_ms, c.cloudlet_id))
    return out


def to_csv(cloudlets: Iterable[Cloudlet]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in cloudlets:
        w.writerow(
            (c.cloudlet_id, c.user_id, c.length_mi, c.file_size,
             c.output_size, c.pes, c.priority, c.arrival_ms)
        )
    return buf.getvalue()


def write_csv(path: str | os.PathLike, cloudlets: Iterable[Cloudlet]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(cloudlets))


def digest(cloudlets: Iterable[Cloudlet]) -> str:
    """SHA-256 of the workload in its CSV form."""
    return hashlib.sha256(to_csv(cloudlets).encode("utf-8")).hexdigest()


_MINIMUMS = {"length_mi": 1, "pes": 1}


def load_csv(path: str | os.PathLike) -> list[Cloudlet]:
    """Read a workload CSV, validating every row.

    Errors name the 1-based line number of the offending row.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise WorkloadError(f"cannot read workload {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise WorkloadError(
                "line 1: header must be " + ",".join(CSV_HEADER)
            )
        seen = set()
        out = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise WorkloadError(
                    f"line {line}: expected {len(CSV_HEADER)} fields, got {len(row)}"
                )
            values = {}
            for name, raw in zip(CSV_HEADER, row):
                try:
                    v = int(raw.strip())
                except ValueError:
                    raise WorkloadError(
                        f"line {line}: {name} is not an integer: {raw!r}"
                    ) from None
                lo = _MINIMUMS.get(name, 0)
                if v < lo:
                    raise WorkloadError(f"line {line}: {name} must be ≥ {lo}")
                values[name] = v
            if values["cloudlet_id"] in seen:
                raise WorkloadError(
                    f"line {line}: duplicate cloudlet_id {values['cloudlet_id']}"
                )
            seen.add(values["cloudlet_id"])
            out.append(Cloudlet(**values))
    out.sort(key=lambda c: (c.arrival_ms, c.cloudlet_id))
    return out
