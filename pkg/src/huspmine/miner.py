"""Depth-first pattern search over projected utility-arrays.

Patterns are enumerated in a lexicographic tree: every node extends its
parent either by appending an item to the last itemset (I-concatenation,
restricted to items with a larger id so each pattern has exactly one parse)
or by appending a new singleton itemset (S-concatenation).  Three pruning
layers cut the tree:

* the SWU strategy removes items whose whole-sequence weight cannot reach
  any threshold they could be mined under, rebuilding remaining utilities;
* a node is expanded only while its extension bound (PEU by default, the
  looser SEU selectable for ablation) stays at or above the least threshold
  reachable in its subtree (PMIU);
* the PUK strategy drops extension items before their child projections are
  built, when both the item's standalone extension bound and the would-be
  child's bound fall below the prefix's PMIU.

Variant ``uspt1`` disables the first and third layers, ``uspt2`` disables
only the third, ``uspt`` enables all three.  All variants produce the same
pattern set; only the visited-candidate counts differ.
"""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    Item,
    Money,
    MTable,
    Pattern,
    QSDatabase,
    UtilityTable,
    qsequence_utility,
    pattern_utility_in_sequence,
)
from .uarray import (
    I_STEP,
    S_STEP,
    Projection,
    SequenceArrays,
    build_database_arrays,
    initial_projection,
    project,
    rest_pool_min_mu,
)

USPT = "uspt"
USPT2 = "uspt2"
USPT1 = "uspt1"
VARIANTS = (USPT1, USPT2, USPT)

BOUND_PEU = "peu"
BOUND_SEU = "seu"
NODE_BOUNDS = (BOUND_PEU, BOUND_SEU)


class InvalidConcatenation(ValueError):
    """The extension item cannot legally extend the pattern."""


class ConfigError(ValueError):
    """Inconsistent database/tables/config detected before mining starts."""


@dataclass(frozen=True)
class MiningConfig:
    variant: str = USPT
    node_bound: str = BOUND_PEU
    max_pattern_length: Optional[int] = None
    collect_stats: bool = False
    threads: int = 1


@dataclass(frozen=True)
class Bounds:
    """All bound and threshold values computed for one candidate pattern."""

    swu: Money
    seu: Money
    peu: Money
    pmiu: Money
    miu: Money
    utility: Money


@dataclass(frozen=True)
class Husp:
    pattern: Pattern
    utility: Money
    miu: Money


@dataclass
class MiningStats:
    candidates_visited: int = 0
    husps_found: int = 0
    wall_time: float = 0.0
    peak_memory_estimate: Optional[int] = None
    depth_histogram: dict = field(default_factory=dict)

    def count_node(self, depth: int) -> None:
        self.candidates_visited += 1
        self.depth_histogram[depth] = self.depth_histogram.get(depth, 0) + 1

    def merge(self, other: "MiningStats") -> None:
        self.candidates_visited += other.candidates_visited
        self.husps_found += other.husps_found
        for d, c in other.depth_histogram.items():
            self.depth_histogram[d] = self.depth_histogram.get(d, 0) + c


@dataclass(frozen=True)
class OneSeqInfo:
    """First-pass statistics of a single-item pattern."""

    swu: Money
    utility: Money
    pmiu: Money
    miu: Money


class MiningObserver:
    """Instrumentation hooks for tracing a run; every hook is a no-op here.

    Only meaningful single-threaded.
    """

    def on_one_sequence_stats(self, info: dict) -> None:
        pass

    def on_item_extension_bounds(self, peu_by_item: dict) -> None:
        pass

    def on_candidates(self, prefix: Pattern, i_items, s_items, kept_i, kept_s) -> None:
        pass

    def on_node(self, pattern: Pattern, bounds: Bounds, expanded: bool) -> None:
        pass


# ---------------------------------------------------------------------------
# concatenations and pattern order


def i_concatenate(pattern: Pattern, item: Item) -> Pattern:
    """Append ``item`` to the last itemset; its id must exceed the current
    last item so every pattern keeps a unique derivation."""
    if item <= pattern.itemsets[-1][-1]:
        raise InvalidConcatenation(
            f"item {item} does not extend itemset {pattern.itemsets[-1]}"
        )
    return Pattern(pattern.itemsets[:-1] + (pattern.itemsets[-1] + (item,),))


def s_concatenate(pattern: Pattern, item: Item) -> Pattern:
    """Append a new singleton itemset holding ``item``."""
    return Pattern(pattern.itemsets + ((item,),))


def pattern_sort_key(pattern: Pattern) -> tuple:
    """Total order: shorter patterns first, then derivation chains compared
    entrywise with I-steps before S-steps and smaller items first."""
    chain = [(0, pattern.itemsets[0][0])]
    for item in pattern.itemsets[0][1:]:
        chain.append((0, item))
    for itemset in pattern.itemsets[1:]:
        chain.append((1, itemset[0]))
        for item in itemset[1:]:
            chain.append((0, item))
    return (pattern.size, tuple(chain))


def pattern_order(ta: Pattern, tb: Pattern) -> int:
    ka, kb = pattern_sort_key(ta), pattern_sort_key(tb)
    return -1 if ka < kb else (1 if ka > kb else 0)


def swu(pattern, db: QSDatabase, utable: UtilityTable) -> Money:
    """Whole-sequence weight: sum of u(s) over sequences containing the
    pattern.  Accepts a Pattern or a bare item id."""
    if not isinstance(pattern, Pattern):
        pattern = Pattern.single(pattern)
    total = 0
    for qseq in db.sequences:
        if pattern_utility_in_sequence(pattern, qseq, utable) is not None:
            total += qsequence_utility(qseq, utable)
    return total


def pmiu(
    pattern: Pattern,
    projection: Projection,
    arrays: list,
    mtable: MTable,
) -> Money:
    """Least threshold reachable from the pattern: the minimum mu over its
    own items and every item occurring strictly after a start point."""
    own = min(mtable.of(i) for i in pattern.distinct_items())
    pool = rest_pool_min_mu(projection, arrays)
    return own if own <= pool else int(pool)


# ---------------------------------------------------------------------------
# engine


class _ItemAccumulator:
    """Per-item sum over sequences of a per-sequence maximum, using tag
    arrays so no per-node clearing of the full item range is needed."""

    __slots__ = (
        "sums",
        "seq_best",
        "node_tag",
        "seq_tag",
        "node_mark",
        "seq_mark",
        "touched",
        "seq_touched",
    )

    def __init__(self, n_items: int):
        self.sums = [0] * n_items
        self.seq_best = [0] * n_items
        self.node_tag = [0] * n_items
        self.seq_tag = [0] * n_items
        self.node_mark = 0
        self.seq_mark = 0
        self.touched: list[int] = []
        self.seq_touched: list[int] = []

    def reset_node(self) -> None:
        self.node_mark += 1
        self.touched = []

    def begin_sequence(self) -> None:
        self.seq_mark += 1
        self.seq_touched = []

    def feed(self, item: int, value: int) -> None:
        if self.seq_tag[item] != self.seq_mark:
            self.seq_tag[item] = self.seq_mark
            self.seq_best[item] = value
            self.seq_touched.append(item)
        elif value > self.seq_best[item]:
            self.seq_best[item] = value

    def end_sequence(self) -> None:
        mark = self.node_mark
        for item in self.seq_touched:
            if self.node_tag[item] != mark:
                self.node_tag[item] = mark
                self.sums[item] = 0
                self.touched.append(item)
            self.sums[item] += self.seq_best[item]

    def collect(self) -> dict:
        return {item: self.sums[item] for item in sorted(self.touched)}


@dataclass
class _ChildStats:
    utility: Money
    peu: Money
    seu_raw: Money
    swu: Money
    pool_min: Money


class _Engine:
    def __init__(
        self,
        db: QSDatabase,
        utable: UtilityTable,
        mtable: MTable,
        config: MiningConfig,
        observer: Optional[MiningObserver],
    ):
        self.db = db
        self.utable = utable
        self.mtable = mtable
        self.config = config
        self.observer = observer
        self.n_items = len(db.symbols)
        self.arrays: list[SequenceArrays] = build_database_arrays(db, utable)
        for seq in self.arrays:
            seq.rebuild(mtable)
        self.husps: list[Husp] = []
        self.stats = MiningStats()
        self.item_seqs: dict[int, list[int]] = {}
        for si, seq in enumerate(self.arrays):
            for item in seq.positions_of:
                self.item_seqs.setdefault(item, []).append(si)
        self.global_item_peu: dict[int, int] = {}
        self.one_seq_info: dict[int, OneSeqInfo] = {}

    # -- setup phases -------------------------------------------------

    def _swu_of_item(self, item: int) -> int:
        total = 0
        for si in self.item_seqs.get(item, ()):
            seq = self.arrays[si]
            if any(seq.active[p] for p in seq.positions_of[item]):
                total += seq.useq
        return total

    def _prefilter(self) -> None:
        """Delete items whose SWU falls below the least threshold of any item
        in the database; no pattern containing them can be a result."""
        present = sorted(self.item_seqs)
        if not present:
            return
        global_min_mu = min(self.mtable.of(i) for i in present)
        doomed = {i for i in present if self._swu_of_item(i) < global_min_mu}
        self._remove_items(doomed)

    def _remove_items(self, items: set) -> None:
        if not items:
            return
        for seq in self.arrays:
            if seq.deactivate(items):
                seq.rebuild(self.mtable)

    def _first_pass(self) -> None:
        """Single-item statistics (SWU, utility, PMIU, MIU) for reporting and
        for the recursion gate."""
        mtable = self.mtable
        info = {}
        for item in sorted(self.item_seqs):
            swu_i = 0
            u_i = 0
            pool = float("inf")
            seen = False
            for si in self.item_seqs[item]:
                seq = self.arrays[si]
                positions = seq.active_positions_of(item)
                if not positions:
                    continue
                seen = True
                swu_i += seq.useq
                u_i += max(seq.u[p] for p in positions)
                cand = seq.suffix_min_mu[positions[0] + 1]
                if cand < pool:
                    pool = cand
            if not seen:
                continue
            mu_i = mtable.of(item)
            info[item] = OneSeqInfo(
                swu=swu_i,
                utility=u_i,
                pmiu=int(min(mu_i, pool)),
                miu=mu_i,
            )
        self.one_seq_info = info
        if self.observer:
            self.observer.on_one_sequence_stats(dict(info))

    def _swu_strategy(self) -> None:
        """Remove items that cannot appear in any result pattern: the item's
        SWU upper-bounds the utility of every pattern containing it, while
        the least threshold of any item co-occurring with it lower-bounds
        those patterns' MIU values."""
        seq_min_mu = []
        for seq in self.arrays:
            mus = [
                self.mtable.of(i)
                for i, ps in seq.positions_of.items()
                if any(seq.active[p] for p in ps)
            ]
            seq_min_mu.append(min(mus) if mus else None)
        doomed = set()
        for item, info in self.one_seq_info.items():
            guard = min(
                seq_min_mu[si]
                for si in self.item_seqs[item]
                if seq_min_mu[si] is not None
            )
            if info.swu < guard:
                doomed.add(item)
        self._remove_items(doomed)

    def _global_extension_bounds(self) -> None:
        """Standalone extension bound of every surviving item: sum over its
        sequences of the best occurrence utility plus remaining utility."""
        out = {}
        for item in sorted(self.item_seqs):
            total = 0
            seen = False
            for si in self.item_seqs[item]:
                seq = self.arrays[si]
                best = None
                for p in seq.positions_of[item]:
                    if seq.active[p]:
                        term = seq.u[p] + seq.ru[p]
                        if best is None or term > best:
                            best = term
                if best is not None:
                    seen = True
                    total += best
            if seen:
                out[item] = total
        self.global_item_peu = out
        if self.observer:
            self.observer.on_item_extension_bounds(dict(out))

    # -- search -------------------------------------------------------

    def run(self) -> list[Husp]:
        self._prefilter()
        self._first_pass()
        if self.config.variant != USPT1:
            # all statistics below first-pass level come from rebuilt arrays
            self._swu_strategy()
        self._global_extension_bounds()
        roots = [
            item
            for item in sorted(self.one_seq_info)
            if item in self.global_item_peu
        ]
        if self.config.threads > 1 and len(roots) > 1:
            self._run_parallel(roots)
        else:
            task = _Task(self)
            for item in roots:
                task.explore_root(item)
            self.husps.extend(task.husps)
            self.stats.merge(task.stats)
        self.husps.sort(key=lambda h: pattern_sort_key(h.pattern))
        self.stats.husps_found = len(self.husps)
        return self.husps

    def _run_parallel(self, roots: list) -> None:
        from concurrent.futures import ThreadPoolExecutor

        def work(chunk):
            task = _Task(self)
            for item in chunk:
                task.explore_root(item)
            return task

        chunks = [roots[i :: self.config.threads] for i in range(self.config.threads)]
        chunks = [c for c in chunks if c]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            for task in pool.map(work, chunks):
                self.husps.extend(task.husps)
                self.stats.merge(task.stats)


class _Task:
    """One depth-first traversal worker with its own scratch state."""

    def __init__(self, engine: _Engine):
        self.e = engine
        self.arrays = engine.arrays
        self.mtable = engine.mtable
        self.config = engine.config
        self.observer = engine.observer
        self.husps: list[Husp] = []
        self.stats = MiningStats()
        self.acc_i = _ItemAccumulator(engine.n_items)
        self.acc_s = _ItemAccumulator(engine.n_items)

    # one full root subtree
    def explore_root(self, item: int) -> None:
        info = self.e.one_seq_info[item]
        proj = initial_projection(self.arrays, item, self.e.item_seqs.get(item))
        if not proj:
            return
        self.stats.count_node(1)
        pattern = Pattern.single(item)
        pstats = self._projection_stats(proj)
        bounds = Bounds(
            swu=pstats.swu,
            seu=pstats.seu_raw,
            peu=pstats.peu,
            pmiu=int(min(info.miu, pstats.pool_min)),
            miu=info.miu,
            utility=pstats.utility,
        )
        if pstats.utility >= info.miu:
            self.husps.append(Husp(pattern, pstats.utility, info.miu))
        # recursion gate on the first-pass whole-sequence weight
        expand = info.swu >= info.pmiu and self._depth_ok(2)
        if self.observer:
            self.observer.on_node(pattern, bounds, expand)
        if expand:
            self._span(pattern, proj, bounds.pmiu, bounds.seu, info.miu)

    def _depth_ok(self, child_size: int) -> bool:
        cap = self.config.max_pattern_length
        return cap is None or child_size <= cap

    def _projection_stats(self, proj: Projection) -> _ChildStats:
        """Utility, bounds, and threshold pool of one projected pattern."""
        utility = 0
        peu = 0
        seu = 0
        swu_v = 0
        pool = float("inf")
        for entry in proj.entries:
            seq = self.arrays[entry.seq_index]
            ru = seq.ru
            u_max = None
            best_term = None
            anchor_ru = 0
            for p, b in zip(entry.pivots, entry.best):
                if u_max is None or b > u_max:
                    u_max = b
                term = b + ru[p]
                if best_term is None or term > best_term:
                    best_term = term
                    anchor_ru = ru[p]
            utility += u_max
            peu += best_term
            seu += min(seq.useq, u_max + anchor_ru)
            swu_v += seq.useq
            cand = seq.suffix_min_mu[entry.pivots[0] + 1]
            if cand < pool:
                pool = cand
        return _ChildStats(utility, peu, seu, swu_v, pool)

    def _scan_candidates(self, proj: Projection):
        """One pass over the projected arrays collecting extension items of
        both kinds with the bound of each would-be child."""
        acc_i, acc_s = self.acc_i, self.acc_s
        acc_i.reset_node()
        acc_s.reset_node()
        for entry in proj.entries:
            seq = self.arrays[entry.seq_index]
            item_, eid_, u_, ru_, active_ = seq.item, seq.eid, seq.u, seq.ru, seq.active
            n = seq.n
            pivots, best = entry.pivots, entry.best
            acc_i.begin_sequence()
            acc_s.begin_sequence()
            for p, b in zip(pivots, best):
                e = eid_[p]
                q = p + 1
                while q < n and eid_[q] == e:
                    if active_[q]:
                        acc_i.feed(item_[q], b + u_[q] + ru_[q])
                    q += 1
            start_e = eid_[pivots[0]]
            if start_e < len(seq.elem_first):
                # every position visited lies in an element after the start
                # element, so at least one pivot precedes it
                run_max = 0
                ptr = 0
                n_piv = len(pivots)
                for q in range(seq.elem_first[start_e], n):
                    eq = eid_[q]
                    while ptr < n_piv and eid_[pivots[ptr]] < eq:
                        if best[ptr] > run_max:
                            run_max = best[ptr]
                        ptr += 1
                    if active_[q]:
                        acc_s.feed(item_[q], run_max + u_[q] + ru_[q])
            acc_i.end_sequence()
            acc_s.end_sequence()
        return acc_i.collect(), acc_s.collect()

    def _span(
        self,
        prefix: Pattern,
        proj: Projection,
        prefix_pmiu: int,
        prefix_seu: int,
        prefix_min_mu: int,
    ) -> None:
        i_items, s_items = self._scan_candidates(proj)
        last = prefix.itemsets[-1][-1]
        i_items = {i: v for i, v in i_items.items() if i > last}
        if self.config.variant == USPT:
            global_peu = self.e.global_item_peu
            kept_i = {
                i: v
                for i, v in i_items.items()
                if not (global_peu[i] < prefix_pmiu and v < prefix_pmiu)
            }
            kept_s = {
                i: v
                for i, v in s_items.items()
                if not (global_peu[i] < prefix_pmiu and v < prefix_pmiu)
            }
        else:
            kept_i, kept_s = i_items, s_items
        if self.observer:
            self.observer.on_candidates(prefix, i_items, s_items, kept_i, kept_s)
        for kind, kept in ((I_STEP, kept_i), (S_STEP, kept_s)):
            for item in sorted(kept):
                self._visit_child(prefix, proj, kind, item, prefix_seu, prefix_min_mu)

    def _visit_child(
        self,
        prefix: Pattern,
        proj: Projection,
        kind: str,
        item: int,
        prefix_seu: int,
        prefix_min_mu: int,
    ) -> None:
        child_proj = project(proj, self.arrays, item, kind)
        if not child_proj:
            return
        if kind == I_STEP:
            child = Pattern(prefix.itemsets[:-1] + (prefix.itemsets[-1] + (item,),))
        else:
            child = Pattern(prefix.itemsets + ((item,),))
        self.stats.count_node(child.size)
        child_min_mu = min(prefix_min_mu, self.mtable.of(item))
        pstats = self._projection_stats(child_proj)
        seu_star = min(pstats.seu_raw, prefix_seu)
        child_pmiu = int(min(child_min_mu, pstats.pool_min))
        bounds = Bounds(
            swu=pstats.swu,
            seu=seu_star,
            peu=pstats.peu,
            pmiu=child_pmiu,
            miu=child_min_mu,
            utility=pstats.utility,
        )
        if pstats.utility >= child_min_mu:
            self.husps.append(Husp(child, pstats.utility, child_min_mu))
        bound = pstats.peu if self.config.node_bound == BOUND_PEU else seu_star
        expand = bound >= child_pmiu and self._depth_ok(child.size + 1)
        if self.observer:
            self.observer.on_node(child, bounds, expand)
        if expand:
            self._span(child, child_proj, child_pmiu, seu_star, child_min_mu)


def _validate(db, utable, mtable, config) -> None:
    m = len(db.symbols)
    if len(utable.unit) != m:
        raise ConfigError("utility table does not cover the database items")
    if len(mtable.mu) != m:
        raise ConfigError("threshold table does not cover the database items")
    if config.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {config.variant!r}")
    if config.node_bound not in NODE_BOUNDS:
        raise ConfigError(f"unknown node bound {config.node_bound!r}")
    if config.threads < 1:
        raise ConfigError("threads must be >= 1")
    if config.max_pattern_length is not None and config.max_pattern_length < 1:
        raise ConfigError("max_pattern_length must be >= 1")


def mine(
    db: QSDatabase,
    utable: UtilityTable,
    mtable: MTable,
    config: MiningConfig = MiningConfig(),
    observer: Optional[MiningObserver] = None,
) -> tuple[list[Husp], MiningStats]:
    """Discover every pattern whose utility reaches its own MIU threshold.

    Returns the patterns sorted by :func:`pattern_sort_key` together with run
    statistics.  Output is identical across variants and thread counts.
    """
    _validate(db, utable, mtable, config)
    tracing = config.collect_stats
    if tracing:
        tracemalloc.start()
    started = time.perf_counter()
    try:
        engine = _Engine(db, utable, mtable, config, observer)
        husps = engine.run()
        stats = engine.stats
        stats.wall_time = time.perf_counter() - started
        if tracing:
            stats.peak_memory_estimate = tracemalloc.get_traced_memory()[1]
        return husps, stats
    finally:
        if tracing:
            tracemalloc.stop()
