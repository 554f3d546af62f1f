"""Command line entry point: ``baas-sim run`` and ``baas-sim compare``.

Configuration is a JSON document; every key is optional and unknown keys
are rejected::

    {
      "workload": {
        "num_cloudlets": 10000,
        "length": {"dist": "uniform", "min": 10000, "max": 70000},
        "priority": {"dist": "uniform"},
        "arrival": {"model": "all_at_zero"},
        "file_size": 300, "output_size": 300, "pes": 1, "seed": 42,
        "csv": null
      },
      "vm_count": 50,
      "vm": {"mips": 250, "pes": 1, "ram_mb": 512, "bandwidth": 1000,
             "image_size_mb": 10000},
      "dc_count": 1,
      "chains": 1,
      "policy": "hybrid",
      "hybrid": {"aging_quantum_ms": 20000, "priority_levels": 8},
      "starvation_threshold_ms": 300000,
      "out_dir": null
    }

Exit status: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .engine import simulate
from .entities import EntityError, VmSpec, World, uniform_datacenters
from .metrics import (DEFAULT_STARVATION_THRESHOLD_MS, MetricsReport,
                      comparison_csv, compute_report, tasks_csv)
from .plotting import comparison_svg
from .policies import INFINITE, POLICY_ORDER, HybridParams, PolicyId
from .workload import (AllAtZero, Cloudlet, Constant, Uniform, UniformJitter,
                       WorkloadConfig, WorkloadError, digest, generate, load_csv)

log = logging.getLogger("baas_sim")

OUT_ENV = "BAAS_SIM_OUT"

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    workload_csv: Optional[str] = None
    vm_count: int = 1
    vm: VmSpec = field(default_factory=lambda: VmSpec(vm_id=0))
    dc_count: int = 1
    chains: int = 1
    policy: PolicyId = PolicyId.HYBRID
    hybrid: HybridParams = field(default_factory=HybridParams)
    starvation_threshold_ms: int = DEFAULT_STARVATION_THRESHOLD_MS
    out_dir: Optional[str] = None


# -- parsing ---------------------------------------------------------------

def _check_keys(obj, allowed, prefix=""):
    if not isinstance(obj, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'} must be a JSON object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key: {prefix}{key}")


def _int(obj, key, default, minimum=None, prefix=""):
    v = obj.get(key, default)
    name = prefix + key
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{name} must be ≥ {minimum}")
    return v


def _dist(raw, name, default, levels=None):
    if raw is None:
        return default
    if isinstance(raw, int) and not isinstance(raw, bool):
        return Constant(raw)
    _check_keys(raw, {"dist", "value", "min", "max"}, f"{name}.")
    kind = raw.get("dist", "constant")
    if kind == "constant":
        return Constant(_int(raw, "value", getattr(default, "value", 0), prefix=f"{name}."))
    if kind == "uniform":
        if levels is not None:
            lo = _int(raw, "min", 0, prefix=f"{name}.")
            hi = _int(raw, "max", levels - 1, prefix=f"{name}.")
        else:
            if "min" not in raw or "max" not in raw:
                raise ConfigError(f"{name}: uniform needs min and max")
            lo = _int(raw, "min", 0, prefix=f"{name}.")
            hi = _int(raw, "max", 0, prefix=f"{name}.")
        if lo > hi:
            raise ConfigError(f"{name}.min must be ≤ {name}.max")
        return Uniform(lo, hi)
    raise ConfigError(f"{name}.dist must be 'constant' or 'uniform'")


def _arrival(raw):
    if raw is None:
        return AllAtZero()
    _check_keys(raw, {"model", "base_interval_ms", "jitter_ms"}, "workload.arrival.")
    model = raw.get("model", "all_at_zero")
    if model == "all_at_zero":
        return AllAtZero()
    if model == "uniform_jitter":
        p = "workload.arrival."
        return UniformJitter(_int(raw, "base_interval_ms", 0, 0, p),
                             _int(raw, "jitter_ms", 0, 0, p))
    raise ConfigError("workload.arrival.model must be 'all_at_zero' or 'uniform_jitter'")


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    _check_keys(doc, {"workload", "vm_count", "vm", "dc_count", "chains", "policy",
                      "hybrid", "starvation_threshold_ms", "out_dir"})

    hy = doc.get("hybrid", {})
    _check_keys(hy, {"aging_quantum_ms", "priority_levels"}, "hybrid.")
    levels = _int(hy, "priority_levels", 8, 1, "hybrid.")
    q = hy.get("aging_quantum_ms", 20000)
    if q is None or (isinstance(q, str) and q.lower() in ("inf", "infinite")):
        q = INFINITE
    else:
        q = _int(hy, "aging_quantum_ms", 20000, 1, "hybrid.")
    hybrid = HybridParams(q, levels)

    wl = doc.get("workload", {})
    _check_keys(wl, {"num_cloudlets", "length", "priority", "arrival", "file_size",
                     "output_size", "pes", "seed", "csv"}, "workload.")
    p = "workload."
    seed = _int(wl, "seed", 0, 0, p)
    if seed >= 1 << 64:
        raise ConfigError("workload.seed must fit in 64 bits")
    workload = WorkloadConfig(
        num_cloudlets=_int(wl, "num_cloudlets", 1_000_000, 0, p),
        length_dist=_dist(wl.get("length"), "workload.length", Constant(40000)),
        priority_dist=_dist(wl.get("priority"), "workload.priority", Constant(0), levels),
        arrival=_arrival(wl.get("arrival")),
        file_size=_int(wl, "file_size", 300, 0, p),
        output_size=_int(wl, "output_size", 300, 0, p),
        pes=_int(wl, "pes", 1, 1, p),
        seed=seed,
        priority_levels=levels,
    )
    try:
        workload.validate()
    except WorkloadError as exc:
        raise ConfigError(f"workload: {exc}") from None
    csv_path = wl.get("csv")
    if csv_path is not None and not isinstance(csv_path, str):
        raise ConfigError("workload.csv must be a path string")

    vm = doc.get("vm", {})
    _check_keys(vm, {"mips", "pes", "ram_mb", "bandwidth", "image_size_mb"}, "vm.")
    vm_spec = VmSpec(
        vm_id=0,
        mips=_int(vm, "mips", 250, 1, "vm."),
        pes=_int(vm, "pes", 1, 1, "vm."),
        ram_mb=_int(vm, "ram_mb", 512, 0, "vm."),
        bandwidth=_int(vm, "bandwidth", 1000, 0, "vm."),
        image_size_mb=_int(vm, "image_size_mb", 10000, 0, "vm."),
    )

    vm_count = _int(doc, "vm_count", 1, 1)
    dc_count = _int(doc, "dc_count", 1, 1)
    if dc_count > vm_count:
        raise ConfigError("dc_count must be ≤ vm_count")
    try:
        policy = PolicyId.parse(doc.get("policy", "hybrid"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out_dir = doc.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir must be a path string")

    return SimConfig(
        workload=workload,
        workload_csv=csv_path,
        vm_count=vm_count,
        vm=vm_spec,
        dc_count=dc_count,
        chains=_int(doc, "chains", 1, 1),
        policy=policy,
        hybrid=hybrid,
        starvation_threshold_ms=_int(doc, "starvation_threshold_ms",
                                     DEFAULT_STARVATION_THRESHOLD_MS, 0),
        out_dir=out_dir,
    )


def load_config(path) -> SimConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


# -- pipeline --------------------------------------------------------------

def build_world(config: SimConfig) -> World:
    return World.build(uniform_datacenters(config.vm_count, config.dc_count, config.vm),
                       config.chains)


def build_workload(config: SimConfig) -> list[Cloudlet]:
    if config.workload_csv:
        return load_csv(config.workload_csv)
    return generate(config.workload)


def run_policy(config: SimConfig, cloudlets: Sequence[Cloudlet], policy) -> tuple:
    """Simulate one policy on a fresh world; returns (run, report or None)."""
    sim = simulate(build_world(config), cloudlets, policy, config.hybrid)
    report = None
    if sim.records:
        report = compute_report(sim.records, sim.per_vm_busy_ms, sim.policy,
                                config.starvation_threshold_ms)
    return sim, report


@dataclass
class CompareResult:
    reports: list[MetricsReport]
    workload_digest: str
    files: dict[str, Path]


def parse_policy_list(text: str) -> list[PolicyId]:
    names = [n for n in (s.strip() for s in text.split(",")) if n]
    if not names:
        raise ConfigError("policy list is empty")
    try:
        chosen = {PolicyId.parse(n) for n in names}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return [p for p in POLICY_ORDER if p in chosen]


def _write_all(out_dir: Path, contents: dict[str, str]) -> dict[str, Path]:
    """Write every file or none: stage to temp names, then rename."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[Path, Path]] = []
    done: list[Path] = []
    try:
        for name, text in contents.items():
            tmp = out_dir / f".{name}.tmp"
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
        for tmp, final in staged:
            os.replace(tmp, final)
            done.append(final)
    except OSError:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        for final in done:
            final.unlink(missing_ok=True)
        raise
    return {name: out_dir / name for name in contents}


def run_command(config: SimConfig, policy=None, seed: Optional[int] = None,
                out_dir=None) -> dict[str, Path]:
    """Simulate one policy; write ``tasks_<policy>.csv`` and ``report_<policy>.csv``."""
    policy = PolicyId.parse(policy or config.policy)
    if seed is not None:
        config = replace(config, workload=replace(config.workload, seed=seed))
    out = _resolve_out(out_dir, config)
    cloudlets = build_workload(config)
    sim, report = run_policy(config, cloudlets, policy)
    files = {f"tasks_{policy.value}.csv": tasks_csv(sim.records)}
    files[f"report_{policy.value}.csv"] = comparison_csv([report] if report else [])
    written = _write_all(out, files)
    if report:
        log.info("%s: %d tasks, avg wait %s ms, makespan %d ms", policy.value,
                 report.n_tasks, report.row()[2], report.makespan_ms)
    return written


def compare_command(config: SimConfig, policies, out_dir=None) -> CompareResult:
    """Run the same workload under each policy; write the comparison CSV and SVG."""
    if isinstance(policies, str):
        policies = parse_policy_list(policies)
    else:
        chosen = {PolicyId.parse(p) for p in policies}
        if not chosen:
            raise ConfigError("policy list is empty")
        policies = [p for p in POLICY_ORDER if p in chosen]
    out = _resolve_out(out_dir, config)
    cloudlets = tuple(build_workload(config))
    before = digest(cloudlets)
    reports = []
    for policy in policies:
        _, report = run_policy(config, cloudlets, policy)
        if report is None:
            raise ConfigError("cannot compare policies on an empty workload")
        reports.append(report)
        log.info("%s: avg wait %s ms", policy.value, report.row()[2])
    if digest(cloudlets) != before:
        raise RuntimeError("workload changed between policy runs")
    files = _write_all(out, {
        "comparison.csv": comparison_csv(reports),
        "comparison.svg": comparison_svg(reports),
    })
    return CompareResult(reports, before, files)


def _resolve_out(out_dir, config: SimConfig) -> Path:
    out = out_dir or config.out_dir or os.environ.get(OUT_ENV)
    if not out:
        raise ConfigError(f"no output directory: pass --out or set {OUT_ENV}")
    return Path(out)


# -- argv ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="baas-sim", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one policy")
    run.add_argument("--config", required=True)
    run.add_argument("--policy", help="fcfs, sjf, priority or hybrid")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV})")

    cmp_ = sub.add_parser("compare", help="simulate several policies on one workload")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--policies", default="fcfs,sjf,priority,hybrid")
    cmp_.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
        if args.command == "run":
            if args.policy is not None:
                PolicyId.parse(args.policy)
            if args.seed is not None and not 0 <= args.seed < 1 << 64:
                raise ConfigError("--seed must be a 64-bit unsigned integer")
            files = run_command(config, args.policy, args.seed, args.out)
            print(files[f"report_{PolicyId.parse(args.policy or config.policy).value}.csv"]
                  .read_text(encoding="utf-8"), end="")
        else:
            result = compare_command(config, parse_policy_list(args.policies), args.out)
            print(result.files["comparison.csv"].read_text(encoding="utf-8"), end="")
    except (ConfigError, WorkloadError, ValueError) as exc:
        print(f"baas-sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, EntityError, RuntimeError) as exc:
        print(f"baas-sim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
