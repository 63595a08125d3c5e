"""Finite automata over witnessed l-sequences and queries on them.

States are l-long output words; there is an edge from ``k·sigma`` to
``sigma·k'`` exactly when both words are states (the domino rule), and the
output of a state is its first symbol.  Every state is initial, so an H-long
word is a behaviour of the automaton iff each of its l-windows is a state.

A sampled state set can be blocking (a witnessed word whose successor words
were never witnessed); ``domino_complete`` repairs this by adding, for each
blocking state, all words extending its suffix, until no state blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .core import Alphabet, LSeq, Trace, TraceSet, distinct_lseqs, window


class EnumerationCapExceeded(RuntimeError):
    """Raised when behaviour enumeration would exceed the caller's cap."""


def _successor_map(states: Sequence[LSeq]) -> dict[LSeq, tuple[LSeq, ...]]:
    # Bucket states by their (l-1)-prefix; successors of s are the bucket of
    # its suffix.  Linear in states x alphabet instead of quadratic in states.
    buckets: dict[LSeq, list[LSeq]] = {}
    for s in states:
        buckets.setdefault(s[:-1], []).append(s)
    return {s: tuple(buckets.get(s[1:], ())) for s in states}


@dataclass(frozen=True)
class Slca:
    """l-complete automaton: lexicographically sorted states, domino edges."""

    l: int
    alphabet: Alphabet
    states: tuple[LSeq, ...]
    added_by_completion: frozenset[LSeq] = frozenset()
    _succ: Mapping[LSeq, tuple[LSeq, ...]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if any(len(s) != self.l for s in self.states):
            raise ValueError("every state must be a word of length l")
        if tuple(sorted(set(self.states))) != self.states:
            object.__setattr__(self, "states", tuple(sorted(set(self.states))))
        if self._succ is None:
            object.__setattr__(self, "_succ", _successor_map(self.states))

    def successors(self, state: LSeq) -> tuple[LSeq, ...]:
        return self._succ[state]

    def edges(self) -> list[tuple[LSeq, LSeq]]:
        return [(s, t) for s in self.states for t in self._succ[s]]

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self._succ.values())

    def output_of(self, state: LSeq) -> int:
        return state[0]

    def state_names(self, state: LSeq) -> str:
        return self.alphabet.format_lseq(state)


def build_slca(traces: TraceSet, l: int) -> Slca:
    """Automaton over the witnessed l-sequences of ``traces`` (no completion)."""
    states = distinct_lseqs(traces, l)
    return Slca(l=l, alphabet=traces.alphabet, states=states)


def is_non_blocking(slca: Slca) -> bool:
    return all(slca.successors(s) for s in slca.states)


def is_deterministic(slca: Slca) -> bool:
    return all(len(slca.successors(s)) <= 1 for s in slca.states)


def domino_complete(slca: Slca) -> Slca:
    """Smallest non-blocking extension obtained by the completion rule.

    While some state ``k·sigma`` has no outgoing edge, add all |Y| states
    ``sigma·k'``.  Terminates within |Y|^l states; idempotent on non-blocking
    input; never removes states, so behaviours only grow.
    """
    n_symbols = len(slca.alphabet)
    states = set(slca.states)
    added: set[LSeq] = set(slca.added_by_completion)
    prefixes = {s[:-1] for s in states}

    worklist = sorted(s for s in states if s[1:] not in prefixes)
    while worklist:
        blocking = worklist.pop()
        suffix = blocking[1:]
        if suffix in prefixes:
            continue
        fresh = [suffix + (k,) for k in range(n_symbols)]
        prefixes.add(suffix)
        for s in fresh:
            if s not in states:
                states.add(s)
                added.add(s)
                if s[1:] not in prefixes:
                    worklist.append(s)
    return Slca(
        l=slca.l,
        alphabet=slca.alphabet,
        states=tuple(sorted(states)),
        added_by_completion=frozenset(added),
    )


def includes_trace(slca: Slca, trace: Trace) -> bool:
    """True iff the trace is a behaviour of the automaton.

    Since every state is initial and consecutive windows are always
    domino-compatible, this is equivalent to: every l-window of the trace is
    a state.
    """
    if trace.horizon < slca.l:
        raise ValueError("trace shorter than l")
    state_set = set(slca.states)
    return all(w in state_set for w in window(trace, slca.l))


def behaviors(slca: Slca, horizon: int, cap: int = 1_000_000) -> set[Trace]:
    """All ``horizon``-long external behaviours, by exhaustive unrolling.

    A run of m+1 states stitches into a word of length m+l (each state
    overlaps the next on l-1 symbols).  Raises when more than ``cap``
    behaviours would be produced.
    """
    if horizon < slca.l:
        raise ValueError("behaviour horizon must be >= l")
    out: set[Trace] = set()
    for start in slca.states:
        stack: list[tuple[LSeq, tuple[int, ...]]] = [(start, start)]
        while stack:
            state, word = stack.pop()
            if len(word) == horizon:
                out.add(Trace(word))
                if len(out) > cap:
                    raise EnumerationCapExceeded(
                        f"state-space blow-up: more than {cap} behaviours at horizon {horizon}"
                    )
                continue
            for nxt in slca.successors(state):
                stack.append((nxt, word + (nxt[-1],)))
    return out


@dataclass(frozen=True)
class VerificationVerdict:
    """Outcome of a temporal query; a failed query carries a witness.

    The witness is a genuine path of the automaton: ``stem`` alone for a
    finite counterexample (an offending reachable state), ``cycle`` for a
    lasso (the edge from the last cycle state back to the first closes it).
    """

    holds: bool
    witness_stem: tuple[LSeq, ...] = ()
    witness_cycle: tuple[LSeq, ...] = ()

    def describe(self, alphabet: Alphabet) -> str:
        if self.holds:
            return "holds"
        parts = []
        if self.witness_stem:
            parts.append(
                " -> ".join(f"({alphabet.format_lseq(s)})" for s in self.witness_stem)
            )
        if self.witness_cycle:
            cyc = " -> ".join(f"({alphabet.format_lseq(s)})" for s in self.witness_cycle)
            parts.append(f"cycle[{cyc}]")
        return "fails: " + " ".join(parts)


def verify_invariance(slca: Slca, bad: Iterable[int]) -> VerificationVerdict:
    """Does no behaviour ever show a bad symbol?

    All states are initial, so a bad symbol anywhere in any state's word is
    reachable; the offending state is the witness.
    """
    bad_set = set(bad)
    for s in slca.states:
        if any(y in bad_set for y in s):
            return VerificationVerdict(holds=False, witness_stem=(s,))
    return VerificationVerdict(holds=True)


def _tarjan_sccs(slca: Slca) -> list[list[LSeq]]:
    # Iterative Tarjan; components are returned in deterministic order.
    index: dict[LSeq, int] = {}
    low: dict[LSeq, int] = {}
    on_stack: set[LSeq] = set()
    stack: list[LSeq] = []
    sccs: list[list[LSeq]] = []
    counter = 0

    for root in slca.states:
        if root in index:
            continue
        work: list[tuple[LSeq, int]] = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            succ = slca.successors(node)
            if pi < len(succ):
                work[-1] = (node, pi + 1)
                child = succ[pi]
                if child not in index:
                    work.append((child, 0))
                elif child in on_stack:
                    low[node] = min(low[node], index[child])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == node:
                            break
                    sccs.append(comp)
    return sccs


def _cycle_through(slca: Slca, start: LSeq, component: set[LSeq]) -> tuple[LSeq, ...]:
    # Shortest cycle start -> ... -> start staying inside the component.
    if start in slca.successors(start):
        return (start,)
    parent: dict[LSeq, LSeq] = {}
    frontier = [start]
    seen = {start}
    while frontier:
        nxt_frontier = []
        for node in frontier:
            for child in slca.successors(node):
                if child == start:
                    path = [node]
                    while path[-1] != start:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return tuple(path)
                if child in component and child not in seen:
                    seen.add(child)
                    parent[child] = node
                    nxt_frontier.append(child)
        frontier = nxt_frontier
    raise AssertionError("component marked cyclic but no cycle found")


def verify_reach_stay(
    slca: Slca, target: Iterable[int], bad: Iterable[int]
) -> VerificationVerdict:
    """Is every infinite behaviour eventually confined to target symbols,
    never showing a bad symbol on the way?

    Soundness: every infinite run of a finite graph ends up inside one
    cycle-bearing strongly connected component, so it suffices that every
    such component consists solely of all-target states.  A single state
    with a self-loop counts as cycle-bearing; acyclic states only constrain
    the bad-symbol check.
    """
    bad_verdict = verify_invariance(slca, bad)
    if not bad_verdict.holds:
        return bad_verdict

    target_set = set(target)
    for component in _tarjan_sccs(slca):
        comp_set = set(component)
        cyclic = len(component) > 1 or component[0] in slca.successors(component[0])
        if not cyclic:
            continue
        offending = [
            s for s in sorted(component) if any(y not in target_set for y in s)
        ]
        if offending:
            cycle = _cycle_through(slca, offending[0], comp_set)
            return VerificationVerdict(holds=False, witness_cycle=cycle)
    return VerificationVerdict(holds=True)


# ---------------------------------------------------------------------------
# Export formats


def to_dot(slca: Slca) -> str:
    """Graphviz DOT text; completion-added states and their edges dashed."""
    lines = ["digraph slca {"]
    added = slca.added_by_completion
    for s in slca.states:
        label = slca.state_names(s)
        style = " [style=dashed]" if s in added else ""
        lines.append(f'  "{label}"{style};')
    for s in slca.states:
        for t in slca.successors(s):
            style = " [style=dashed]" if (s in added or t in added) else ""
            lines.append(f'  "{slca.state_names(s)}" -> "{slca.state_names(t)}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def slca_to_text(slca: Slca) -> str:
    """Plain-text serialization; edges are derivable and never stored."""
    from .core import DAGGER_CSV, DAGGER_NAME

    names = ",".join(
        DAGGER_CSV if n == DAGGER_NAME else n for n in slca.alphabet
    )
    lines = [f"# l: {slca.l}", f"# alphabet: {names}"]
    for s in slca.states:
        suffix = " *" if s in slca.added_by_completion else ""
        lines.append(slca.state_names(s) + suffix)
    return "\n".join(lines) + "\n"


def save_slca(slca: Slca, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(slca_to_text(slca))


def slca_from_text(text: str) -> Slca:
    from .core import DAGGER_CSV, DAGGER_NAME

    l: Optional[int] = None
    alphabet: Optional[Alphabet] = None
    states: list[LSeq] = []
    added: set[LSeq] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("l:"):
                l = int(body[2:].strip())
            elif body.startswith("alphabet:"):
                names = [
                    DAGGER_NAME if n.strip() == DAGGER_CSV else n.strip()
                    for n in body[len("alphabet:") :].split(",")
                    if n.strip()
                ]
                alphabet = Alphabet(names)
            continue
        if alphabet is None or l is None:
            raise ValueError("automaton file must start with '# l:' and '# alphabet:' headers")
        tokens = line.split()
        completed = tokens and tokens[-1] == "*"
        if completed:
            tokens = tokens[:-1]
        if len(tokens) != l:
            raise ValueError(f"state line {line!r} does not have l={l} symbols")
        state = tuple(alphabet.id(t) for t in tokens)
        states.append(state)
        if completed:
            added.add(state)
    if alphabet is None or l is None or not states:
        raise ValueError("automaton file contains no states")
    return Slca(
        l=l, alphabet=alphabet, states=tuple(sorted(states)), added_by_completion=frozenset(added)
    )


def load_slca(path: str) -> Slca:
    with open(path, "r", encoding="utf-8") as fh:
        return slca_from_text(fh.read())
