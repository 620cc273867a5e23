"""Monte Carlo size/power studies and real-data subsampling studies.

Every replication derives its RNG seeds deterministically from the master
seed plus its (grid index, replication index) coordinates, so results are
byte-identical regardless of how many workers execute them.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import ScenarioConfig, generate
from .kernels import FAMILIES, KernelSpec
from .permutation import sample_masks
from .statistic import (
    LabeledSample,
    kernel_matrix_from_psibar,
    masked_statistics,
    psibar_matrix,
)


@dataclass(frozen=True)
class StudyConfig:
    scenarios: tuple[ScenarioConfig, ...]
    kernels: tuple[KernelSpec, ...] = tuple(KernelSpec(f) for f in FAMILIES)
    alpha: float = 0.05
    replications: int = 1000
    permutations: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.permutations < 20:
            raise ValueError("need at least 20 permutations")
        if not self.scenarios:
            raise ValueError("empty scenario grid")


@dataclass(frozen=True)
class RealDataset:
    """Two class-labelled collections of equal-length series."""

    classes: dict

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("need at least two classes")
        lengths = {arr.shape[1] for arr in self.classes.values()}
        if len(lengths) != 1:
            raise ValueError("all series must share one length")
        for label, arr in self.classes.items():
            if arr.shape[0] < 2:
                raise ValueError(f"class {label!r} has fewer than 2 rows")

    @property
    def p(self) -> int:
        return next(iter(self.classes.values())).shape[1]


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)

    def add(self, scenario: str, kernel: str, rate: float, replications: int, wall: float):
        se = math.sqrt(rate * (1.0 - rate) / replications)
        self.rows.append(
            {
                "scenario": scenario,
                "kernel": kernel,
                "rejection_rate": rate,
                "mc_standard_error": se,
                "replications": replications,
                "wall_time_s": wall,
            }
        )

    def write_csv(self, path) -> None:
        # wall_time_s stays in memory only so identically seeded runs
        # produce byte-identical files regardless of worker count
        fields = [
            "scenario",
            "kernel",
            "rejection_rate",
            "mc_standard_error",
            "replications",
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            for row in self.rows:
                out = dict(row)
                out["rejection_rate"] = f"{row['rejection_rate']:.6g}"
                out["mc_standard_error"] = f"{row['mc_standard_error']:.6g}"
                writer.writerow(out)

    def rate(self, scenario: str, kernel: str) -> float:
        for row in self.rows:
            if row["scenario"] == scenario and row["kernel"] == kernel:
                return row["rejection_rate"]
        raise KeyError((scenario, kernel))


def multi_kernel_rejections(
    sample: LabeledSample,
    kernels: tuple[KernelSpec, ...],
    alpha: float,
    permutations: int,
    seed: int,
) -> dict:
    """Run the permutation test for several kernels on one dataset.

    The averaged-distance matrices (squared and absolute) are built once
    and the same S-1 random permutations are shared across kernels.
    """
    n, m = sample.n, sample.m
    pb = {}
    if any(k.uses_squared_differences for k in kernels):
        pb[True] = psibar_matrix(sample.data, squared=True)
    if any(not k.uses_squared_differences for k in kernels):
        pb[False] = psibar_matrix(sample.data, squared=False)
    masks = sample_masks(n, m, permutations, seed)
    rejected = {}
    for spec in kernels:
        km = kernel_matrix_from_psibar(pb[spec.uses_squared_differences], spec, n, m)
        stats = masked_statistics(km.values, n, m, masks)
        observed = stats[0]
        srt = np.sort(stats, kind="stable")
        idx = permutations - math.floor(alpha * permutations) - 1
        rejected[spec.family] = bool(observed > srt[idx])
    return rejected


def _replication_seeds(master: int, grid: int, rep: int) -> tuple[int, int]:
    """Independent (data seed, permutation seed) derived from coordinates."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(grid, rep))
    data_seed, perm_seed = ss.generate_state(2)
    return int(data_seed), int(perm_seed)


def _power_cell(args):
    cfg, grid_idx, rep_range, kernels, alpha, permutations, master = args
    counts = {spec.family: 0 for spec in kernels}
    for rep in rep_range:
        data_seed, perm_seed = _replication_seeds(master, grid_idx, rep)
        sample = generate(replace(cfg, seed=data_seed))
        rej = multi_kernel_rejections(sample, kernels, alpha, permutations, perm_seed)
        for fam, flag in rej.items():
            counts[fam] += flag
    return grid_idx, counts


def _scenario_label(cfg: ScenarioConfig) -> str:
    return (
        f"ex{cfg.example}:p={cfg.p},n={cfg.n},m={cfg.m},beta={cfg.beta:g},"
        f"rho={cfg.rho:g},innov={cfg.innovation},v={cfg.v_diag}"
    )


def default_jobs() -> int:
    env = os.environ.get("HDTEST_JOBS")
    return int(env) if env else 1


def run_power_study(cfg: StudyConfig, jobs: int = 1) -> PowerTable:
    """Rejection rate per (scenario, kernel) over seeded replications."""
    table = PowerTable()
    for grid_idx, scen in enumerate(cfg.scenarios):
        start = time.perf_counter()
        counts = {spec.family: 0 for spec in cfg.kernels}
        tasks = [
            (scen, grid_idx, chunk, cfg.kernels, cfg.alpha, cfg.permutations, cfg.seed)
            for chunk in _chunk_ranges(cfg.replications, jobs)
        ]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_power_cell, tasks))
        else:
            results = [_power_cell(t) for t in tasks]
        for _, chunk_counts in results:
            for fam, cnt in chunk_counts.items():
                counts[fam] += cnt
        wall = time.perf_counter() - start
        label = _scenario_label(scen)
        for spec in cfg.kernels:
            table.add(label, spec.family, counts[spec.family] / cfg.replications,
                      cfg.replications, wall)
    return table


def _chunk_ranges(total: int, jobs: int):
    size = max(1, math.ceil(total / max(jobs, 1)))
    return [range(lo, min(lo + size, total)) for lo in range(0, total, size)]


def run_realdata_study(
    dataset: RealDataset,
    sizes,
    kernels: tuple[KernelSpec, ...] = tuple(KernelSpec(f) for f in FAMILIES),
    alpha: float = 0.05,
    replications: int = 1000,
    permutations: int = 300,
    seed: int = 0,
    labels: tuple | None = None,
    jobs: int = 1,
) -> PowerTable:
    """Subsample n rows per class without replacement, test, repeat.

    ``labels`` picks which two classes to compare (defaults to the first
    two in sorted order); passing the same label twice yields a
    null-by-construction control study.
    """
    keys = sorted(dataset.classes)
    if labels is None:
        labels = (keys[0], keys[1])
    a, b = dataset.classes[labels[0]], dataset.classes[labels[1]]
    table = PowerTable()
    for grid_idx, n in enumerate(sizes):
        if n > a.shape[0] or n > b.shape[0]:
            raise ValueError(f"requested n={n} exceeds a class size")
        start = time.perf_counter()
        tasks = [
            ((a, b, labels, n), grid_idx, chunk, kernels, alpha, permutations, seed)
            for chunk in _chunk_ranges(replications, jobs)
        ]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_realdata_cell, tasks))
        else:
            results = [_realdata_cell(t) for t in tasks]
        counts = {spec.family: 0 for spec in kernels}
        for _, chunk_counts in results:
            for fam, cnt in chunk_counts.items():
                counts[fam] += cnt
        wall = time.perf_counter() - start
        label = f"realdata:{labels[0]}-vs-{labels[1]}:n={n}"
        for spec in kernels:
            table.add(label, spec.family, counts[spec.family] / replications,
                      replications, wall)
    return table


def _realdata_cell(args):
    (a, b, labels, n), grid_idx, rep_range, kernels, alpha, permutations, master = args
    same_class = labels[0] == labels[1]
    counts = {spec.family: 0 for spec in kernels}
    for rep in rep_range:
        data_seed, perm_seed = _replication_seeds(master, grid_idx, rep)
        rng = np.random.default_rng(data_seed)
        if same_class:
            # disjoint subsamples from one class keep the null exact
            idx = rng.choice(a.shape[0], size=2 * n, replace=False)
            xa, xb = a[idx[:n]], a[idx[n:]]
        else:
            xa = a[rng.choice(a.shape[0], size=n, replace=False)]
            xb = b[rng.choice(b.shape[0], size=n, replace=False)]
        sample = LabeledSample(np.vstack([xa, xb]), n, n)
        rej = multi_kernel_rejections(sample, kernels, alpha, permutations, perm_seed)
        for fam, flag in rej.items():
            counts[fam] += flag
    return grid_idx, counts


def load_delimited(path, fmt: str = "ucr-tsv") -> RealDataset:
    """Parse a class-labelled delimited file.

    ``ucr-tsv``: tab-separated, first field is the class label. ``csv``:
    comma-separated with the same first-field-is-label convention.
    """
    if fmt not in ("csv", "ucr-tsv"):
        raise ValueError(f"unknown format {fmt!r}")
    delim = "\t" if fmt == "ucr-tsv" else ","
    rows: dict[str, list] = {}
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(delim)
            if len(parts) < 2:
                raise ValueError(f"line {lineno}: expected a label plus at least one value")
            label = parts[0]
            try:
                series = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: non-numeric field ({exc})") from None
            if width is None:
                width = len(series)
            elif len(series) != width:
                raise ValueError(
                    f"line {lineno}: ragged row of length {len(series)}, expected {width}"
                )
            rows.setdefault(label, []).append(series)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return RealDataset(classes={k: np.asarray(v, dtype=float) for k, v in rows.items()})
