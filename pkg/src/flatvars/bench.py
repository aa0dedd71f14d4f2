"""Timing harnesses: hierarchy/map construction and per-access overhead.

Construction benchmarks sweep the multirotor tree shape over a horizon and
rotor-count grid for both map flavors.  Access benchmarks compare reads of
random leaves through each map against raw offset arithmetic on the same
buffer.  Nothing here asserts wall-clock numbers; callers inspect the CSV
rows (ordinal relations only, medians and p90s reported).
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .presets import quadrotor_variables
from .varmap import make_eager_map, make_lazy_map, new_buffer

BUILD_COLUMNS = ("horizon", "rotors", "flavor", "median_ns", "p90_ns")
ACCESS_COLUMNS = ("flavor", "baseline_ns_per_access", "map_ns_per_access", "ratio")


@dataclass
class BenchConfig:
    horizons: tuple = (30, 90, 390)
    rotor_counts: tuple = (4, 8)
    repetitions: int = 5
    warmup: int = 1
    access_samples: int = 20_000
    out: Path | None = None

    def __post_init__(self):
        self.horizons = tuple(int(h) for h in self.horizons)
        self.rotor_counts = tuple(int(r) for r in self.rotor_counts)
        if not self.horizons or not self.rotor_counts:
            raise ValidationError("benchmark grids must be nonempty")
        if any(h < 1 for h in self.horizons) or any(r < 1 for r in self.rotor_counts):
            raise ValidationError("grid entries must be positive")
        if self.repetitions < 3:
            raise ValidationError("at least 3 repetitions are required")
        if self.warmup < 0:
            raise ValidationError("warmup count must be nonnegative")

    def largest_point(self):
        return max(self.horizons), max(self.rotor_counts)


def _construct(horizon: int, rotors: int, flavor: str):
    variables = quadrotor_variables(horizon, rotors)
    root = variables.decision_variables
    if flavor == "eager":
        return make_eager_map(root)
    return make_lazy_map(root, new_buffer(root))


def _time_ns(fn, repetitions: int, warmup: int):
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
    return samples


def bench_build(config: BenchConfig) -> list:
    """One row per (horizon, rotors, flavor): construction time medians."""
    rows = []
    for horizon in config.horizons:
        for rotors in config.rotor_counts:
            for flavor in ("eager", "lazy"):
                samples = _time_ns(
                    lambda: _construct(horizon, rotors, flavor),
                    config.repetitions,
                    config.warmup,
                )
                rows.append(
                    {
                        "horizon": horizon,
                        "rotors": rotors,
                        "flavor": flavor,
                        "median_ns": int(np.median(samples)),
                        "p90_ns": int(np.percentile(samples, 90)),
                    }
                )
    return rows


def _leaf_queries(root, rng, count):
    """Random canonical leaf queries with matching raw offsets."""
    from .variables import children_of, resolve

    leaves = []
    stack = [((), root)]
    while stack:
        key, node = stack.pop()
        for slot in children_of(node):
            copies = range(slot.count) if slot.replicated else (None,)
            for copy in copies:
                child_key = key + ((slot.node.name, copy) if copy is not None else (slot.node.name,))
                if slot.node.is_leaf:
                    leaves.append(child_key)
                else:
                    stack.append((child_key, slot.node))
    flat = []
    for key in leaves:
        tokens = []
        for entry in key:
            if isinstance(entry, tuple):
                tokens.extend(entry)
            else:
                tokens.append(entry)
        flat.append(tuple(tokens))
    picks = [flat[i] for i in rng.integers(0, len(flat), size=count)]
    offsets = [resolve(root, q).offset for q in picks]
    return picks, offsets


def bench_access(config: BenchConfig) -> list:
    """Per-access read times through each flavor vs raw offset arithmetic."""
    horizon, rotors = config.largest_point()
    root = quadrotor_variables(horizon, rotors).decision_variables
    eager = make_eager_map(root)
    rng = np.random.default_rng(2024)
    eager.buffer[:] = rng.normal(size=root.size)
    lazy = make_lazy_map(root, eager.buffer)

    queries, offsets = _leaf_queries(root, rng, config.access_samples)
    buffer = eager.buffer

    def run_raw():
        total = 0.0
        for off in offsets:
            total += buffer[off]
        return total

    def run_map(m):
        total = 0.0
        for q in queries:
            total += m.get(*q).array[0]
        return total

    # correctness cross-check before timing
    assert run_raw() == run_map(eager) == run_map(lazy)

    def per_access(fn):
        samples = _time_ns(fn, config.repetitions, config.warmup)
        return np.median(samples) / len(offsets)

    raw_ns = per_access(run_raw)
    rows = []
    for flavor, mapping in (("eager", eager), ("lazy", lazy)):
        map_ns = per_access(lambda: run_map(mapping))
        rows.append(
            {
                "flavor": flavor,
                "baseline_ns_per_access": round(raw_ns, 2),
                "map_ns_per_access": round(map_ns, 2),
                "ratio": round(map_ns / raw_ns, 3),
            }
        )
    return rows


def write_csv(path, rows, columns) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns))
        writer.writeheader()
        writer.writerows(rows)
