"""Complete DFAs over the integer alphabet ``0..alphabet_size-1``.

Exact algorithms (run, product, minimisation, equivalence, language measure),
the random generators used by the experiments, and the
equal-length-distinguishing check.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from . import _kernels

Word = tuple[int, ...]

DENSE_SOLVE_LIMIT = 2000


class DfaFormatError(ValueError):
    """Malformed DFA or counter-function text."""

    def __init__(self, message: str, line_no: Optional[int] = None, line: str = ""):
        self.line_no = line_no
        self.line = line
        if line_no is not None:
            message = f"line {line_no}: {message}: {line.strip()!r}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Dfa:
    """A complete DFA; ``delta[q, a]`` is the successor of state ``q`` on letter ``a``."""

    delta: np.ndarray
    initial: int
    finals: frozenset[int]
    final_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        delta = np.array(self.delta, dtype=np.int64, copy=True)
        if delta.ndim != 2 or delta.shape[0] < 1 or delta.shape[1] < 1:
            raise ValueError("delta must be a non-empty (states, letters) table")
        n = delta.shape[0]
        if delta.min() < 0 or delta.max() >= n:
            raise ValueError("transition target out of range")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        finals = frozenset(int(q) for q in self.finals)
        if any(not 0 <= q < n for q in finals):
            raise ValueError("final state out of range")
        delta.setflags(write=False)
        mask = np.zeros(n, dtype=np.bool_)
        mask[list(finals)] = True
        mask.setflags(write=False)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "initial", int(self.initial))
        object.__setattr__(self, "finals", finals)
        object.__setattr__(self, "final_mask", mask)

    @property
    def state_count(self) -> int:
        return self.delta.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.delta.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dfa):
            return NotImplemented
        return (
            self.initial == other.initial
            and self.finals == other.finals
            and np.array_equal(self.delta, other.delta)
        )

    def __hash__(self):
        return hash((self.initial, self.finals, self.delta.tobytes()))

    def __repr__(self):
        return (
            f"Dfa(states={self.state_count}, letters={self.alphabet_size}, "
            f"initial={self.initial}, finals={sorted(self.finals)})"
        )

    def step(self, state: int, word: Iterable[int]) -> int:
        k = self.alphabet_size
        for a in word:
            if not 0 <= a < k:
                raise ValueError(f"letter {a} out of range for alphabet of size {k}")
            state = int(self.delta[state, a])
        return state

    def accepts(self, word: Sequence[int]) -> bool:
        return run(self, word)

    def run_batch(self, letters: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        """Acceptance of every word of a flat batch (no range checking)."""
        return _kernels.run_batch(self.delta, self.initial, self.final_mask, letters, offsets)


@dataclass(frozen=True)
class CounterFunction:
    """Integer weights: ``value_of_empty`` for the empty word, ``per_letter[a]`` per letter."""

    value_of_empty: int
    per_letter: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_letter", tuple(int(v) for v in self.per_letter))
        if not self.per_letter:
            raise ValueError("counter function needs at least one letter")

    @property
    def alphabet_size(self) -> int:
        return len(self.per_letter)

    def value(self, word: Sequence[int]) -> int:
        return self.value_of_empty + sum(self.per_letter[a] for a in word)


@dataclass(frozen=True)
class GenParams:
    min_states: int = 20
    max_states: int = 60
    min_alphabet: int = 3
    max_alphabet: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.min_states <= self.max_states:
            raise ValueError("need 1 <= min_states <= max_states")
        if not 2 <= self.min_alphabet <= self.max_alphabet:
            raise ValueError("need 2 <= min_alphabet <= max_alphabet")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _check_same_alphabet(a: Dfa, b: Dfa) -> None:
    if a.alphabet_size != b.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: {a.alphabet_size} vs {b.alphabet_size} letters"
        )


def run(dfa: Dfa, word: Sequence[int]) -> bool:
    return dfa.step(dfa.initial, word) in dfa.finals


def complement(dfa: Dfa) -> Dfa:
    return Dfa(dfa.delta, dfa.initial, frozenset(range(dfa.state_count)) - dfa.finals)


def reachable_states(dfa: Dfa) -> np.ndarray:
    """Reachable states in breadth-first discovery order (letters ascending)."""
    seen = np.zeros(dfa.state_count, dtype=np.bool_)
    seen[dfa.initial] = True
    order = [dfa.initial]
    queue = deque(order)
    rows = dfa.delta.tolist()
    while queue:
        q = queue.popleft()
        for r in rows[q]:
            if not seen[r]:
                seen[r] = True
                order.append(r)
                queue.append(r)
    return np.array(order, dtype=np.int64)


def canonical(dfa: Dfa) -> Dfa:
    """Trim unreachable states and renumber the rest in breadth-first order.

    Two trimmed DFAs are isomorphic iff their canonical forms are equal.
    """
    order = reachable_states(dfa)
    relabel = np.full(dfa.state_count, -1, dtype=np.int64)
    relabel[order] = np.arange(order.size)
    delta = relabel[dfa.delta[order]]
    finals = frozenset(int(relabel[q]) for q in dfa.finals if relabel[q] >= 0)
    return Dfa(delta, 0, finals)


def is_isomorphic(a: Dfa, b: Dfa) -> bool:
    return canonical(a) == canonical(b)


def minimize(dfa: Dfa) -> Dfa:
    """Minimal complete DFA in canonical numbering (Moore partition refinement)."""
    trimmed = canonical(dfa)
    delta = trimmed.delta
    blocks = trimmed.final_mask.astype(np.int64)
    count = len(np.unique(blocks))
    while True:
        signature = np.column_stack([blocks, blocks[delta]])
        _, refined = np.unique(signature, axis=0, return_inverse=True)
        refined = refined.reshape(-1)
        new_count = int(refined.max()) + 1
        blocks = refined
        if new_count == count:
            break
        count = new_count
    reps = np.full(count, -1, dtype=np.int64)
    for q in range(trimmed.state_count - 1, -1, -1):
        reps[blocks[q]] = q
    quotient = blocks[delta[reps]]
    finals = frozenset(int(blocks[q]) for q in trimmed.finals)
    return canonical(Dfa(quotient, int(blocks[0]), finals))


def product_status(a: Dfa, b: Dfa) -> Dfa:
    """Reachable pair automaton accepting the symmetric difference of L(a) and L(b)."""
    _check_same_alphabet(a, b)
    nb = b.state_count
    start = a.initial * nb + b.initial
    index = {start: 0}
    pairs = [start]
    rows = []
    da, db = a.delta.tolist(), b.delta.tolist()
    i = 0
    while i < len(pairs):
        p = pairs[i]
        qa, qb = divmod(p, nb)
        row = []
        for ta, tb in zip(da[qa], db[qb]):
            t = ta * nb + tb
            j = index.get(t)
            if j is None:
                j = index[t] = len(pairs)
                pairs.append(t)
            row.append(j)
        rows.append(row)
        i += 1
    fa, fb = a.final_mask, b.final_mask
    finals = frozenset(
        j for j, p in enumerate(pairs) if fa[p // nb] != fb[p % nb]
    )
    return Dfa(np.array(rows, dtype=np.int64), 0, finals)


def exact_equivalence(a: Dfa, b: Dfa) -> tuple[bool, Optional[Word]]:
    """Decide L(a) = L(b); otherwise return the lexicographically least shortest witness."""
    _check_same_alphabet(a, b)
    diff = product_status(a, b)
    if diff.initial in diff.finals:
        return False, ()
    rows = diff.delta.tolist()
    parent: dict[int, tuple[int, int]] = {diff.initial: (-1, -1)}
    queue = deque([diff.initial])
    while queue:
        q = queue.popleft()
        for letter, r in enumerate(rows[q]):
            if r in parent:
                continue
            parent[r] = (q, letter)
            if r in diff.finals:
                word = []
                while r != diff.initial:
                    r, letter = parent[r]
                    word.append(letter)
                return False, tuple(reversed(word))
            queue.append(r)
    return True, None


def exact_measure(dfa: Dfa, mu: float) -> float:
    """Probability of L(dfa) under the geometric-length word distribution."""
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie strictly between 0 and 1")
    trimmed = canonical(dfa)
    if not trimmed.finals:
        return 0.0
    n, k = trimmed.delta.shape
    if len(trimmed.finals) == n:
        return 1.0
    rhs = mu * trimmed.final_mask.astype(np.float64)
    weight = (1.0 - mu) / k
    if n <= DENSE_SOLVE_LIMIT:
        system = np.eye(n)
        np.add.at(system, (np.repeat(np.arange(n), k), trimmed.delta.reshape(-1)), -weight)
        m = np.linalg.solve(system, rhs)
    else:
        transfer = csr_matrix(
            (np.full(n * k, weight), (np.repeat(np.arange(n), k), trimmed.delta.reshape(-1))),
            shape=(n, n),
        )
        m = spsolve((identity(n, format="csc") - transfer).tocsc(), rhs)
    return float(min(1.0, max(0.0, m[trimmed.initial])))


def distance(a: Dfa, b: Dfa, mu: float) -> float:
    """Exact symmetric-difference distance between two regular languages."""
    return exact_measure(product_status(a, b), mu)


# random generation


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def random_dfa(params: GenParams) -> Dfa:
    """Random DFA: uniform sizes, finals ``{0..n_f}``, uniform initial and targets."""
    rng = _rng(params.seed)
    n_states = int(rng.integers(params.min_states, params.max_states, endpoint=True))
    n_letters = int(rng.integers(params.min_alphabet, params.max_alphabet, endpoint=True))
    n_final = int(rng.integers(0, n_states - 1, endpoint=True))
    initial = int(rng.integers(0, n_states))
    delta = rng.integers(0, n_states, size=(n_states, n_letters))
    return Dfa(delta, initial, frozenset(range(n_final + 1)))


def random_pathological_dfa(params: GenParams) -> tuple[Dfa, Word]:
    """Random DFA whose cone ``aaa·Σ*`` is rejected (letter ``a`` is 0).

    The last four states are the dedicated chain ``q0 -a-> q1 -a-> q2 -a-> sink``;
    ``q0`` is initial and none of the four is the target of any other
    transition.  The remaining states are built like :func:`random_dfa`.
    """
    if params.min_alphabet < 5 or params.max_alphabet > 20:
        raise ValueError("pathological DFAs need an alphabet range within [5, 20]")
    if params.min_states < 5:
        raise ValueError("pathological DFAs need at least 5 states")
    rng = _rng(params.seed)
    n_states = int(rng.integers(params.min_states, params.max_states, endpoint=True))
    n_letters = int(rng.integers(params.min_alphabet, params.max_alphabet, endpoint=True))
    rest = n_states - 4
    q0, q1, q2, sink = rest, rest + 1, rest + 2, rest + 3
    n_final = int(rng.integers(0, rest - 1, endpoint=True))
    delta = rng.integers(0, rest, size=(n_states, n_letters))
    delta[q0, 0], delta[q1, 0], delta[q2, 0] = q1, q2, sink
    delta[sink, :] = sink
    return Dfa(delta, q0, frozenset(range(n_final + 1))), (0, 0, 0)


def plus_variant(a: Dfa, w_a: Sequence[int]) -> Dfa:
    """Same automaton with the rejecting sink reached by ``w_a`` made accepting."""
    sink = a.step(a.initial, w_a)
    if sink in a.finals or not np.all(a.delta[sink] == sink):
        raise ValueError("w_a does not lead to a rejecting sink")
    return Dfa(a.delta, a.initial, a.finals | {sink})


COUNTER_VALUES = np.arange(-1, 7)
COUNTER_PROBS = np.array([1 / 4] + [3 / 28] * 7)


def random_counter_function(alphabet_size: int, seed: int) -> CounterFunction:
    if alphabet_size < 1:
        raise ValueError("alphabet_size must be positive")
    rng = _rng(seed)
    c_lambda = int(rng.integers(0, alphabet_size, endpoint=True))
    per_letter = rng.choice(COUNTER_VALUES, size=alphabet_size, p=COUNTER_PROBS)
    return CounterFunction(c_lambda, tuple(int(v) for v in per_letter))


# equal-length-distinguishing check


def _pair_graph(dfa: Dfa) -> csr_matrix:
    n = dfa.state_count
    succ = [np.unique(row) for row in dfa.delta]
    src, dst = [], []
    for q1 in range(n):
        for q2 in range(n):
            targets = (succ[q1][:, None] * n + succ[q2][None, :]).reshape(-1)
            src.append(np.full(targets.size, q1 * n + q2))
            dst.append(targets)
    src, dst = np.concatenate(src), np.concatenate(dst)
    return csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n * n, n * n))


def bottom_sccs(graph: csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """SCC label per vertex and a boolean flag per SCC marking bottom ones."""
    count, labels = connected_components(graph, directed=True, connection="strong")
    coo = graph.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    bottom = np.ones(count, dtype=np.bool_)
    bottom[labels[coo.row[leaving]]] = False
    return labels, bottom


def _reachable_from(graph: csr_matrix, start: int) -> np.ndarray:
    seen = np.zeros(graph.shape[0], dtype=np.bool_)
    seen[start] = True
    frontier = np.array([start])
    indptr, indices = graph.indptr, graph.indices
    while frontier.size:
        nxt = np.concatenate([indices[indptr[v]:indptr[v + 1]] for v in frontier])
        nxt = np.unique(nxt[~seen[nxt]])
        seen[nxt] = True
        frontier = nxt
    return seen


def eld_witness(dfa: Dfa) -> Optional[tuple[int, int]]:
    """A reachable bottom pair (accepting, rejecting) of the pair graph, if any."""
    n = dfa.state_count
    graph = _pair_graph(dfa)
    labels, bottom = bottom_sccs(graph)
    reach = _reachable_from(graph, dfa.initial * n + dfa.initial)
    fm = dfa.final_mask
    candidates = reach & bottom[labels] & np.repeat(fm, n) & np.tile(~fm, n)
    hits = np.flatnonzero(candidates)
    if hits.size == 0:
        return None
    q1, q2 = divmod(int(hits[0]), n)
    return q1, q2


def is_equal_length_distinguishing(dfa: Dfa) -> bool:
    return eld_witness(dfa) is not None


# text format


def dumps(dfa: Dfa) -> str:
    lines = [
        f"dfa {dfa.state_count} {dfa.alphabet_size} {dfa.initial}",
        " ".join(["finals", str(len(dfa.finals))] + [str(q) for q in sorted(dfa.finals)]),
    ]
    lines.extend(" ".join(str(int(t)) for t in row) for row in dfa.delta)
    return "\n".join(lines) + "\n"


def _ints(tokens: list[str], line_no: int, line: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise DfaFormatError("expected decimal integers", line_no, line) from None


def loads(text: str) -> Dfa:
    lines = [(i + 1, raw) for i, raw in enumerate(text.splitlines()) if raw.strip()]
    if len(lines) < 2:
        raise DfaFormatError("expected a 'dfa' header and a 'finals' line")
    no, line = lines[0]
    head = line.split()
    if len(head) != 4 or head[0] != "dfa":
        raise DfaFormatError("expected 'dfa <states> <letters> <initial>'", no, line)
    n, k, initial = _ints(head[1:], no, line)
    if n < 1 or k < 1:
        raise DfaFormatError("state and letter counts must be positive", no, line)
    if not 0 <= initial < n:
        raise DfaFormatError("initial state out of range", no, line)
    no, line = lines[1]
    tokens = line.split()
    if not tokens or tokens[0] != "finals":
        raise DfaFormatError("expected 'finals <k> s1 ... sk'", no, line)
    values = _ints(tokens[1:], no, line)
    if not values or values[0] != len(values) - 1:
        raise DfaFormatError("finals count does not match the listed states", no, line)
    finals = values[1:]
    if any(not 0 <= q < n for q in finals):
        raise DfaFormatError("final state out of range", no, line)
    rows = lines[2:]
    if len(rows) != n:
        where = rows[n] if len(rows) > n else (lines[-1][0], lines[-1][1])
        raise DfaFormatError(f"expected {n} transition rows, found {len(rows)}", *where)
    delta = []
    for no, line in rows:
        row = _ints(line.split(), no, line)
        if len(row) != k:
            raise DfaFormatError(f"expected {k} transition targets", no, line)
        if any(not 0 <= t < n for t in row):
            raise DfaFormatError("transition target out of range", no, line)
        delta.append(row)
    return Dfa(np.array(delta, dtype=np.int64), initial, frozenset(finals))


def dumps_counter(counter: CounterFunction) -> str:
    return "\n".join([f"counter {counter.value_of_empty}"] + [str(v) for v in counter.per_letter]) + "\n"


def loads_counter(text: str) -> CounterFunction:
    lines = [(i + 1, raw) for i, raw in enumerate(text.splitlines()) if raw.strip()]
    if not lines:
        raise DfaFormatError("expected a 'counter <c_lambda>' line")
    no, line = lines[0]
    head = line.split()
    if len(head) != 2 or head[0] != "counter":
        raise DfaFormatError("expected 'counter <c_lambda>'", no, line)
    (c_lambda,) = _ints(head[1:], no, line)
    per_letter = []
    for no, line in lines[1:]:
        tokens = line.split()
        if len(tokens) != 1:
            raise DfaFormatError("expected one integer per letter", no, line)
        per_letter.extend(_ints(tokens, no, line))
    if not per_letter:
        raise DfaFormatError("counter function lists no letters", no, line)
    return CounterFunction(c_lambda, tuple(per_letter))


def load(path) -> Dfa:
    with open(path) as fh:
        text = fh.read()
    try:
        return loads(text)
    except DfaFormatError as exc:
        raise DfaFormatError(f"{path}: {exc}") from None


def save(dfa: Dfa, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(dfa))
