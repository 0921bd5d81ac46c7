"""Kearns–Vazirani learning with a discrimination tree.

The learner only sees a :class:`~noisykv.devices.MembershipOracle`.
Equivalence is either exact (when the target is a known DFA) or PAC: a
round-dependent number of sampled words is checked against the hypothesis.

Leaf ``i`` of the tree is hypothesis state ``i``; leaf 0 has the empty
access string and is the initial state.  Hypothesis transitions are kept up
to date incrementally: when a leaf is split only the transitions that pointed
to it are re-sifted, each with a single extra query.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .automata import Dfa, exact_equivalence, minimize, distance as exact_distance, exact_measure
from .devices import DfaOracle, MembershipOracle, statistical_distance, statistical_measure
from .words import DESK_STAT, StatParams, WordDistribution, sample_batch

Word = tuple[int, ...]


class _Node:
    __slots__ = ("suffix", "children", "parent", "access", "state", "final")

    def __init__(self, parent=None):
        self.parent = parent
        self.suffix: Optional[Word] = None
        self.children: Optional[list] = None
        self.access: Optional[Word] = None
        self.state = -1
        self.final = False

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def depth(self) -> int:
        d, node = 0, self
        while node.parent is not None:
            d, node = d + 1, node.parent
        return d


class DiscriminationTree:
    """Internal nodes hold distinguishing suffixes, leaves hold access strings.

    The child for answer ``False`` is ``children[0]``, for ``True`` ``children[1]``.
    """

    def __init__(self, oracle: MembershipOracle):
        self.oracle = oracle
        self.alphabet_size = oracle.alphabet_size
        leaf = _Node()
        leaf.access = ()
        leaf.state = 0
        leaf.final = oracle.query(())
        self.root = leaf
        self.leaves = [leaf]
        self._trans = np.zeros((1, self.alphabet_size), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.leaves)

    def sift(self, word: Sequence[int]) -> _Node:
        word = tuple(word)
        query = self.oracle.query
        node = self.root
        while node.children is not None:
            node = node.children[query(word + node.suffix)]
        return node

    def _descend(self, node: _Node, word: Word) -> _Node:
        query = self.oracle.query
        while node.children is not None:
            node = node.children[query(word + node.suffix)]
        return node

    def hypothesis(self) -> Dfa:
        finals = frozenset(leaf.state for leaf in self.leaves if leaf.final)
        return Dfa(self._trans, 0, finals)

    @staticmethod
    def lca(a: _Node, b: _Node) -> _Node:
        seen = set()
        while a is not None:
            seen.add(id(a))
            a = a.parent
        while id(b) not in seen:
            b = b.parent
        return b

    def _split(self, leaf: _Node, suffix: Word, new_access: Word, new_side: bool) -> _Node:
        """Replace ``leaf`` by an internal node with ``suffix``; returns the new leaf."""
        inner = _Node(leaf.parent)
        inner.suffix = suffix
        if leaf.parent is None:
            self.root = inner
        else:
            siblings = leaf.parent.children
            siblings[siblings.index(leaf)] = inner
        fresh = _Node(inner)
        fresh.access = new_access
        fresh.state = len(self.leaves)
        fresh.final = (not leaf.final) if leaf.parent is None else leaf.final
        leaf.parent = inner
        inner.children = [leaf, fresh] if new_side else [fresh, leaf]
        self.leaves.append(fresh)

        k = self.alphabet_size
        self._trans = np.vstack([self._trans, np.zeros((1, k), dtype=np.int64)])
        for q, a in np.argwhere(self._trans[:-1] == leaf.state):
            word = self.leaves[q].access + (int(a),)
            self._trans[q, a] = self._descend(inner, word).state
        for a in range(k):
            self._trans[fresh.state, a] = self.sift(new_access + (a,)).state
        return fresh

    def process_counterexample(self, hypothesis: Dfa, w: Sequence[int]) -> None:
        """Add one state using counterexample ``w`` (first-divergence prefix scan)."""
        w = tuple(w)
        query = self.oracle.query
        if query(w) == _accepts(hypothesis, w):
            raise ValueError("not a counterexample: oracle and hypothesis agree")
        if self.root.is_leaf:
            self._split(self.root, (), w, new_side=not self.root.final)
            return
        trans = self._trans.tolist()
        hyp_state = 0
        for i in range(1, len(w) + 1):
            prev = hyp_state
            hyp_state = trans[prev][w[i - 1]]
            sifted = self.sift(w[:i])
            if sifted.state != hyp_state:
                break
        else:
            raise RuntimeError("counterexample shows no divergence; oracle is not persistent")
        leaf = self.leaves[prev]
        d = self.lca(sifted, self.leaves[hyp_state]).suffix
        suffix = (w[i - 1],) + d
        new_access = w[: i - 1]
        old_side = query(leaf.access + suffix)
        new_side = query(new_access + suffix)
        if old_side == new_side:
            raise RuntimeError("split suffix does not distinguish; oracle is not persistent")
        self._split(leaf, suffix, new_access, new_side)


def _accepts(dfa: Dfa, word: Word) -> bool:
    q = dfa.initial
    for a in word:
        q = dfa.delta[q, a]
    return bool(dfa.final_mask[q])


def sift(tree: DiscriminationTree, oracle: MembershipOracle, word: Sequence[int]) -> _Node:
    if oracle is not tree.oracle:
        raise ValueError("tree was built with a different oracle")
    return tree.sift(word)


def synthesize(tree: DiscriminationTree, oracle: MembershipOracle) -> Dfa:
    if oracle is not tree.oracle:
        raise ValueError("tree was built with a different oracle")
    return tree.hypothesis()


def process_counterexample(tree, oracle, hypothesis: Dfa, w: Sequence[int]) -> DiscriminationTree:
    if oracle is not tree.oracle:
        raise ValueError("tree was built with a different oracle")
    tree.process_counterexample(hypothesis, w)
    return tree


# PAC and exact learning


@dataclass(frozen=True)
class PacParams:
    epsilon: float = 0.005
    delta: float = 0.005
    maxround: int = 250

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0 or not 0.0 < self.delta < 1.0:
            raise ValueError("epsilon and delta must lie strictly between 0 and 1")
        if self.maxround < 1:
            raise ValueError("maxround must be positive")


class StopReason(str, enum.Enum):
    EQUIVALENT = "equivalent"
    MAXROUND = "maxround"


@dataclass
class LearnOutcome:
    learned: Dfa
    rounds_used: int
    stopped_by: StopReason
    membership_queries: int
    snapshots: list[tuple[int, Dfa]] = field(default_factory=list)
    unreduced: Optional[Dfa] = None
    chosen_round: Optional[int] = None
    trace: list[tuple[int, int, int]] = field(default_factory=list)


def pac_sample_count(epsilon: float, delta: float, r: int) -> int:
    """Words checked by the PAC equivalence query of round ``r``."""
    if r < 0:
        raise ValueError("round must be non-negative")
    return math.ceil((math.log(1.0 / delta) + (r + 1) * math.log(2.0)) / epsilon)


def pac_equivalence(
    hypothesis: Dfa,
    oracle: MembershipOracle,
    d: WordDistribution,
    pac: PacParams,
    r: int,
    rng: np.random.Generator,
    first_chunk: int = 256,
    max_chunk: int = 16384,
) -> tuple[bool, Optional[Word]]:
    """Check the hypothesis on fresh sampled words; return the first disagreement."""
    remaining = pac_sample_count(pac.epsilon, pac.delta, r)
    chunk = first_chunk
    while remaining > 0:
        n = min(chunk, remaining)
        batch = sample_batch(d, rng, n)
        wrong = np.flatnonzero(oracle.query_batch(batch) != hypothesis.run_batch(batch.letters, batch.offsets))
        if wrong.size:
            return False, batch.word(int(wrong[0]))
        remaining -= n
        chunk = min(chunk * 2, max_chunk)
    return True, None


EquivalenceCheck = Callable[[Dfa, int], tuple[bool, Optional[Word]]]


def learn(
    oracle: MembershipOracle,
    equivalence: EquivalenceCheck,
    maxround: int,
    snapshot_period: Optional[int] = None,
    trace: bool = False,
) -> LearnOutcome:
    """The bounded KV loop: synthesise, check, refine, at most ``maxround`` times."""
    start_queries = oracle.queries_made
    tree = DiscriminationTree(oracle)
    snapshots: list[tuple[int, Dfa]] = []
    rows: list[tuple[int, int, int]] = []
    r = 0
    while r < maxround:
        hypothesis = tree.hypothesis()
        if trace:
            rows.append((r, hypothesis.state_count, oracle.queries_made - start_queries))
        ok, w = equivalence(hypothesis, r)
        if ok:
            return LearnOutcome(
                minimize(hypothesis), r, StopReason.EQUIVALENT,
                oracle.queries_made - start_queries, snapshots, trace=rows,
            )
        tree.process_counterexample(hypothesis, w)
        r += 1
        if snapshot_period and r % snapshot_period == 0:
            snapshots.append((r, hypothesis))
    final = tree.hypothesis()
    if trace:
        rows.append((r, final.state_count, oracle.queries_made - start_queries))
    return LearnOutcome(
        minimize(final), r, StopReason.MAXROUND,
        oracle.queries_made - start_queries, snapshots, trace=rows,
    )


def learn_pac(
    oracle: MembershipOracle,
    d: WordDistribution,
    pac: PacParams,
    rng: np.random.Generator,
    snapshot_period: Optional[int] = None,
    trace: bool = False,
) -> LearnOutcome:
    if d.alphabet_size != oracle.alphabet_size:
        raise ValueError("distribution and oracle alphabets differ")

    def check(hypothesis: Dfa, r: int):
        return pac_equivalence(hypothesis, oracle, d, pac, r, rng)

    return learn(oracle, check, pac.maxround, snapshot_period, trace)


def learn_exact(target: Dfa, maxround: int = 10_000, oracle: Optional[MembershipOracle] = None) -> LearnOutcome:
    """Learn a known DFA with membership queries and exact equivalence queries."""
    oracle = oracle or DfaOracle(target)

    def check(hypothesis: Dfa, r: int):
        return exact_equivalence(hypothesis, target)

    return learn(oracle, check, maxround)


def learn_reduced(
    oracle: MembershipOracle,
    d: WordDistribution,
    pac: PacParams,
    rng: np.random.Generator,
    period: int = 10,
    c_threshold: float = 1e-3,
    stat: StatParams = DESK_STAT,
    exact: bool = False,
) -> LearnOutcome:
    """Learn, then return the earliest memorised hypothesis close enough to the final one.

    A snapshot qualifies when its distance to the final hypothesis is at most
    ``c_threshold`` times the measure of the final hypothesis' language.
    Snapshots that minimise to more states than the final hypothesis are
    never chosen.  Distances are statistical unless ``exact`` is set.
    """
    full = learn_pac(oracle, d, pac, rng, snapshot_period=period)
    final = full.learned
    if exact:
        m = exact_measure(final, d.mu)
    else:
        m = statistical_measure(final, d, stat, rng)
    threshold = c_threshold * m
    chosen, chosen_round = final, None
    for r, snapshot in full.snapshots:
        small = minimize(snapshot)
        if small.state_count > final.state_count:
            continue
        if exact:
            dist = exact_distance(small, final, d.mu)
        else:
            dist = statistical_distance(small, final, d, stat, rng)
        if dist <= threshold:
            chosen, chosen_round = small, r
            break
    return LearnOutcome(
        chosen, full.rounds_used, full.stopped_by, full.membership_queries,
        full.snapshots, unreduced=final, chosen_round=chosen_round,
    )
