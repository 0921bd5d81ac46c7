"""Batch experiments: random DFA, noisy device, learned DFA, three distances.

Seeds are derived, never drawn: the DFA of experiment ``i`` uses
``derive_seed(master_seed, "dfa", i)`` and the device, learner and distance
streams of its ``j``-th noise level use ``derive_seed(dfa_seed, tag, j)``.
Results therefore do not depend on the number of worker processes.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import metrics
from .automata import (
    Dfa,
    GenParams,
    is_equal_length_distinguishing,
    plus_variant,
    random_counter_function,
    random_dfa,
    random_pathological_dfa,
)
from .devices import (
    CounterDevice,
    DfaOracle,
    NoisyInputDevice,
    NoisyOutputDevice,
    PathologicalDevice,
    as_oracle,
)
from .learner import PacParams, learn_pac, learn_reduced
from .metrics import ExperimentRecord
from .words import (
    DESK_STAT,
    PAPER_STAT,
    StatParams,
    WordDistribution,
    chernoff_sample_size,
    derive_seed,
    rng_for,
    sample_chunks,
)

log = logging.getLogger(__name__)

NOISE_KINDS = ("noisy_output", "noisy_input", "counter", "pathological", "none")
PAPER_P_OUTPUT = (0.01, 0.005, 0.0025, 0.0015, 0.001)
PAPER_P_INPUT = (1e-4, 5e-4, 1e-3, 5e-3)
PAPER_MUS = (0.001, 0.005, 0.01, 0.05, 0.1)


@dataclass(frozen=True)
class Reduction:
    period: int = 10
    c_threshold: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    noise_kind: str = "noisy_output"
    p_values: tuple[float, ...] = (0.001,)
    dfa_count: int = 10
    gen: GenParams = field(default_factory=GenParams)
    mu: float = 0.01
    pac: PacParams = field(default_factory=PacParams)
    stat: StatParams = DESK_STAT
    master_seed: int = 0
    reduction: Optional[Reduction] = None
    eld_partition: bool = False
    parallelism: int = 1
    first_index: int = 0

    def __post_init__(self):
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise_kind!r}; expected one of {NOISE_KINDS}")
        if self.noise_kind in ("noisy_output", "noisy_input"):
            if not self.p_values:
                raise ValueError(f"{self.noise_kind} needs at least one p value")
            for p in self.p_values:
                if not 0.0 < p < 1.0:
                    raise ValueError(f"p = {p} must lie strictly between 0 and 1")
        if self.dfa_count < 0:
            raise ValueError("dfa_count must be non-negative")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie strictly between 0 and 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if self.noise_kind == "pathological" and (self.gen.min_alphabet < 5 or self.gen.max_alphabet > 20):
            raise ValueError("pathological experiments need an alphabet range within [5, 20]")

    @property
    def levels(self) -> tuple:
        """Noise levels per DFA; counter, pathological and noise-free runs have one."""
        if self.noise_kind in ("noisy_output", "noisy_input"):
            return tuple(self.p_values)
        return (None,)


@dataclass(frozen=True)
class Task:
    config: ExperimentConfig
    dfa_index: int
    level_index: int

    @property
    def index(self) -> int:
        return self.dfa_index * len(self.config.levels) + self.level_index


def tasks(config: ExperimentConfig) -> list[Task]:
    n = len(config.levels)
    return [
        Task(config, config.first_index + i, j)
        for i in range(config.dfa_count)
        for j in range(n)
    ]


def _make_target(config: ExperimentConfig, dfa_seed: int):
    gen = replace(config.gen, seed=dfa_seed)
    if config.noise_kind == "pathological":
        a, w_a = random_pathological_dfa(gen)
        return a, w_a
    return random_dfa(gen), None


def _make_device(config: ExperimentConfig, a: Dfa, w_a, p, dfa_seed: int, j: int):
    kind = config.noise_kind
    device_seed = derive_seed(dfa_seed, "device", j)
    if kind == "noisy_output":
        return NoisyOutputDevice(a, p, device_seed), f"p={p!r}"
    if kind == "noisy_input":
        return NoisyInputDevice(a, p, device_seed), f"p={p!r}"
    if kind == "counter":
        c = random_counter_function(a.alphabet_size, derive_seed(dfa_seed, "counter"))
        return CounterDevice(a, c), "c=" + ":".join(map(str, (c.value_of_empty,) + c.per_letter))
    if kind == "pathological":
        return PathologicalDevice(a, w_a, device_seed), "w_a=" + "".join(map(str, w_a))
    return DfaOracle(a), ""


def paired_distances(oracles: Sequence, d: WordDistribution, s: StatParams, rng) -> np.ndarray:
    """Matrix of statistical distances between all oracles on one shared sample."""
    oracles = [as_oracle(o) for o in oracles]
    n = chernoff_sample_size(s)
    k = len(oracles)
    counts = np.zeros((k, k), dtype=np.int64)
    for batch in sample_chunks(d, rng, n):
        answers = np.stack([o.query_batch(batch) for o in oracles])
        for i in range(k):
            for j in range(i + 1, k):
                counts[i, j] += np.count_nonzero(answers[i] != answers[j])
    counts = counts + counts.T
    return counts / n


def run_task(task: Task) -> ExperimentRecord:
    config = task.config
    i, j = task.dfa_index, task.level_index
    p = config.levels[j]
    dfa_seed = derive_seed(config.master_seed, "dfa", i)
    a, w_a = _make_target(config, dfa_seed)
    device, noise_params = _make_device(config, a, w_a, p, dfa_seed, j)
    d = WordDistribution(config.mu, a.alphabet_size)
    learner_rng = rng_for(dfa_seed, "learner", j)
    if config.reduction:
        outcome = learn_reduced(
            device, d, config.pac, learner_rng,
            period=config.reduction.period, c_threshold=config.reduction.c_threshold,
            stat=config.stat,
        )
        learned, reduced = outcome.unreduced, outcome.learned
    else:
        outcome = learn_pac(device, d, config.pac, learner_rng)
        learned, reduced = outcome.learned, None

    queries = outcome.membership_queries
    # evaluate distances on a fresh device copy so the learner's counters stay untouched
    device_view, _ = _make_device(config, a, w_a, p, dfa_seed, j)
    others = [DfaOracle(reduced)] if reduced is not None else []
    plus = plus_variant(a, w_a) if w_a is not None else None
    if plus is not None:
        others.append(DfaOracle(plus))
    dist = paired_distances([a, device_view, learned] + others, d, config.stat, rng_for(dfa_seed, "distance", j))

    d_a_device, d_a_learned, d_device_learned = dist[0, 1], dist[0, 2], dist[1, 2]
    rec = dict(
        index=task.index, seed=dfa_seed, dfa_id=f"dfa-{i}", noise_kind=config.noise_kind,
        noise_params=noise_params, mu=config.mu, states=a.state_count,
        alphabet_size=a.alphabet_size, learned_size=learned.state_count,
        rounds_used=outcome.rounds_used, stopped_by=outcome.stopped_by.value,
        membership_queries=queries, d_a_device=float(d_a_device),
    )
    if plus is not None:
        d_a_plus, d_plus_learned = float(dist[0, -1]), float(dist[2, -1])
        gain = metrics.pathological_gain(d_plus_learned, float(d_a_learned))
        rec.update(
            d_a_noisy=d_a_plus, d_a_learned=float(d_a_learned), d_noisy_learned=d_plus_learned,
            gain=gain, band=metrics.pathological_band(gain),
        )
    else:
        gain = metrics.information_gain(float(d_a_device), float(d_a_learned))
        rec.update(
            d_a_noisy=float(d_a_device), d_a_learned=float(d_a_learned),
            d_noisy_learned=float(d_device_learned), gain=gain, band=metrics.band(gain),
        )
    if reduced is not None:
        d_a_reduced = float(dist[0, 3])
        rec.update(
            reduced_size=reduced.state_count, d_a_reduced=d_a_reduced,
            reduced_gain=metrics.information_gain(float(d_a_device), d_a_reduced),
        )
    if config.eld_partition:
        rec["eld"] = is_equal_length_distinguishing(a)
    return ExperimentRecord(**rec)


def run_experiment(
    config: ExperimentConfig,
    on_record: Optional[Callable[[ExperimentRecord], None]] = None,
) -> list[ExperimentRecord]:
    """Run every (DFA, noise level) task; records come back ordered by index.

    ``on_record`` sees each record as soon as it and all earlier ones are
    done, so an interrupted run still leaves a consistent prefix behind.
    """
    todo = tasks(config)
    records: list[ExperimentRecord] = []

    def emit(rec):
        records.append(rec)
        log.info("record %d: gain=%s learned=%d", rec.index, rec.gain, rec.learned_size)
        if on_record:
            on_record(rec)

    if config.parallelism == 1 or len(todo) <= 1:
        for t in todo:
            emit(run_task(t))
    else:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            for rec in pool.map(run_task, todo):
                emit(rec)
    return records


# config files

_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}
CONFIG_KEYS = (
    "noise_kind", "p", "dfa_count", "min_states", "max_states", "min_alphabet", "max_alphabet",
    "mu", "epsilon", "delta", "maxround", "alpha", "gamma", "master_seed", "reduction",
    "period", "c_threshold", "eld_partition", "parallelism",
)


def parse_config(text: str) -> ExperimentConfig:
    """Read ``key = value`` lines (an optional ``[experiment]`` header is allowed)."""
    if not any(line.strip().startswith("[") for line in text.splitlines()):
        text = "[experiment]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(text)
    if not parser.has_section("experiment"):
        raise ValueError("config needs an [experiment] section")
    section = parser["experiment"]
    unknown = set(section) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def get(key, conv, default):
        if key not in section:
            return default
        raw = section[key].strip()
        try:
            return conv(raw)
        except (ValueError, KeyError):
            raise ValueError(f"bad value for {key}: {raw!r}") from None

    def boolean(raw):
        return _BOOL[raw.lower()]

    def floats(raw):
        return tuple(float(x) for x in raw.replace(",", " ").split())

    gen_defaults = GenParams()
    gen = GenParams(
        min_states=get("min_states", int, gen_defaults.min_states),
        max_states=get("max_states", int, gen_defaults.max_states),
        min_alphabet=get("min_alphabet", int, gen_defaults.min_alphabet),
        max_alphabet=get("max_alphabet", int, gen_defaults.max_alphabet),
    )
    pac = PacParams(
        epsilon=get("epsilon", float, 0.005), delta=get("delta", float, 0.005),
        maxround=get("maxround", int, 250),
    )
    stat = StatParams(alpha=get("alpha", float, DESK_STAT.alpha), gamma=get("gamma", float, DESK_STAT.gamma))
    reduction = None
    if get("reduction", boolean, False):
        reduction = Reduction(period=get("period", int, 10), c_threshold=get("c_threshold", float, 1e-3))
    return ExperimentConfig(
        noise_kind=get("noise_kind", str, "noisy_output"),
        p_values=get("p", floats, (0.001,)),
        dfa_count=get("dfa_count", int, 10),
        gen=gen, mu=get("mu", float, 0.01), pac=pac, stat=stat,
        master_seed=get("master_seed", int, 0), reduction=reduction,
        eld_partition=get("eld_partition", boolean, False),
        parallelism=get("parallelism", int, 1),
    )


def records_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    metrics.write_records(records, buf)
    return buf.getvalue()


# table reproduction

TABLE_RANGES = {
    3: [(0.025, 1.0), (0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001)],
    4: [(0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001), (0.0001, 0.0005)],
    5: [(0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001), (0.00005, 0.0005)],
    8: [(0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001)],
    9: [(0.005, 0.025), (0.002, 0.005), (0.001, 0.002), (0.0005, 0.001)],
}
PAPER_DFA_COUNTS = {2: 50, 3: 45, 4: 160, 5: 300, 6: 22, 7: 60, 8: 200, 9: 200}
DESK_DFA_COUNT = 10
DESK_MAXROUND = 100


@dataclass(frozen=True)
class Scale:
    name: str
    stat: StatParams
    maxround: int
    dfa_count: Optional[int]


SCALES = {
    "desk": Scale("desk", DESK_STAT, DESK_MAXROUND, DESK_DFA_COUNT),
    "paper": Scale("paper", PAPER_STAT, 250, None),
}


def table_configs(table_id: int, scale: str = "desk", dfa_count: Optional[int] = None,
                  maxround: Optional[int] = None, master_seed: int = 0,
                  parallelism: int = 1) -> list[ExperimentConfig]:
    if table_id not in PAPER_DFA_COUNTS:
        raise ValueError(f"unknown table id {table_id}; expected one of {sorted(PAPER_DFA_COUNTS)}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    sc = SCALES[scale]
    count = dfa_count if dfa_count is not None else (sc.dfa_count or PAPER_DFA_COUNTS[table_id])
    base = ExperimentConfig(
        dfa_count=count, pac=PacParams(maxround=maxround or sc.maxround), stat=sc.stat,
        master_seed=derive_seed(master_seed, "table", table_id), parallelism=parallelism,
    )
    if table_id == 2:
        return [replace(base, noise_kind="noisy_output", p_values=PAPER_P_OUTPUT)]
    if table_id == 3:
        return [replace(base, noise_kind="noisy_input", p_values=PAPER_P_INPUT)]
    if table_id == 4:
        return [replace(base, noise_kind="counter")]
    if table_id == 5:
        return [replace(base, noise_kind="pathological", gen=GenParams(min_alphabet=5, max_alphabet=20))]
    if table_id == 6:
        return [replace(base, noise_kind="noisy_output", p_values=PAPER_P_OUTPUT, mu=mu) for mu in PAPER_MUS]
    if table_id == 7:
        return [replace(base, noise_kind="noisy_output", p_values=PAPER_P_OUTPUT, reduction=Reduction())]
    # 8 and 9 share one run over three-letter DFAs, split by the ELD property
    return [replace(base, noise_kind="noisy_input", p_values=PAPER_P_INPUT,
                    gen=GenParams(min_alphabet=3, max_alphabet=3), eld_partition=True)]


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _by_level(records: Sequence[ExperimentRecord]) -> dict[str, list[ExperimentRecord]]:
    groups: dict[str, list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault(r.noise_params, []).append(r)
    return groups


def summarize_table(table_id: int, runs: Sequence[list[ExperimentRecord]]) -> str:
    """Table-shaped CSV for the records of :func:`table_configs` runs."""
    if table_id == 2:
        rows = []
        for level, recs in _by_level(runs[0]).items():
            s = metrics.aggregate(recs)
            rows.append([level.split("=", 1)[1], s.count, s.mean_d_a_noisy, s.mean_d_a_learned,
                         s.mean_d_noisy_learned, s.mean_gain, s.inf_gain_count, s.std_dev,
                         s.band.value if s.band else ""])
        return _csv(["p", "count", "mean_d_A_noisy", "mean_d_A_learned", "mean_d_noisy_learned",
                     "mean_gain", "inf_gain_count", "std_dev", "band"], rows)
    if table_id in (3, 4, 5):
        buckets = metrics.bucket_by_range(runs[0], TABLE_RANGES[table_id], pathological=table_id == 5)
        return metrics.buckets_csv(buckets)
    if table_id in (8, 9):
        wanted = table_id == 8
        recs = [r for r in runs[0] if r.eld is wanted]
        label = "equal-length-distinguishing" if wanted else "not equal-length-distinguishing"
        return metrics.buckets_csv(
            metrics.bucket_by_range(recs, TABLE_RANGES[table_id]),
            header_note=f"{label} DFAs; ranges are half-open [lo, hi)",
        )
    if table_id == 6:
        grid: dict[str, list[str]] = {}
        mus = []
        for recs in runs:
            mus.append(recs[0].mu if recs else math.nan)
            for level, group in _by_level(recs).items():
                g, _ = metrics.mean_gain(metrics.trimmed([r.gain for r in group]))
                grid.setdefault(level.split("=", 1)[1], []).append(g)
        return _csv(["p"] + [f"mu={m!r}" for m in mus], [[p] + gains for p, gains in grid.items()])
    if table_id == 7:
        rows = []
        for level, recs in _by_level(runs[0]).items():
            reduced = statistics.fmean(r.reduced_size for r in recs)
            full = statistics.fmean(r.learned_size for r in recs)
            g_hat, _ = metrics.mean_gain(r.reduced_gain for r in recs)
            g, _ = metrics.mean_gain(r.gain for r in recs)
            rows.append([level.split("=", 1)[1], reduced, full, reduced / full, g_hat, g])
        return _csv(["p", "mean_reduced_size", "mean_learned_size", "size_ratio", "mean_reduced_gain", "mean_gain"], rows)
    raise ValueError(f"unknown table id {table_id}")


def reproduce_table(table_id: int, scale: str = "desk", **overrides) -> str:
    runs = [run_experiment(c) for c in table_configs(table_id, scale, **overrides)]
    return summarize_table(table_id, runs)
