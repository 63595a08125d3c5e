"""Alphabets, traces and l-sequences: the shared vocabulary of the toolkit.

Symbols are interned integers; text names appear only at I/O boundaries.
An l-sequence (the sliding window of length ``l`` over a trace) is a plain
tuple of symbol ids, so the canonical order everywhere is tuple order,
i.e. lexicographic order on id sequences.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

DAGGER_NAME = "†"
DAGGER_CSV = "DAGGER"

# An l-sequence: fixed-length tuple of symbol ids.
LSeq = tuple[int, ...]


class Alphabet:
    """Ordered set of output symbols with contiguous integer ids.

    Ids are assigned in insertion order.  The reserved out-of-domain symbol
    ``†`` may be interned like any other name but is kept at the last id:
    interning a new name after it re-appends the dagger.
    """

    def __init__(self, names: Iterable[str] = ()) -> None:
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        """Return the id of ``name``, appending it if unknown."""
        if name in self._ids:
            return self._ids[name]
        if "," in name or " " in name or "\n" in name:
            raise ValueError(f"symbol name {name!r} may not contain ',', spaces or newlines")
        if self._names and self._names[-1] == DAGGER_NAME and name != DAGGER_NAME:
            # keep the dagger last: the new symbol takes its slot
            new_id = len(self._names) - 1
            self._names[-1] = name
            self._ids[name] = new_id
            self._names.append(DAGGER_NAME)
            self._ids[DAGGER_NAME] = len(self._names) - 1
            return new_id
        self._names.append(name)
        self._ids[name] = len(self._names) - 1
        return self._ids[name]

    def id(self, name: str) -> int:
        return self._ids[name]

    def name(self, symbol_id: int) -> str:
        return self._names[symbol_id]

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self._names)

    @property
    def dagger_id(self) -> Optional[int]:
        return self._ids.get(DAGGER_NAME)

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self._names == other._names

    def __repr__(self) -> str:
        return f"Alphabet({self._names!r})"

    def format_lseq(self, seq: Sequence[int], sep: str = " ") -> str:
        return sep.join(self._names[s] for s in seq)


def dagger_absorbing(symbols: Sequence[int], dagger_id: Optional[int]) -> bool:
    """True iff every symbol after the first dagger is again the dagger."""
    if dagger_id is None:
        return True
    seen = False
    for s in symbols:
        if seen and s != dagger_id:
            return False
        if s == dagger_id:
            seen = True
    return True


@dataclass(frozen=True)
class Trace:
    """Finite output sequence of one sampled run."""

    symbols: tuple[int, ...]

    @property
    def horizon(self) -> int:
        return len(self.symbols)

    @classmethod
    def checked(cls, symbols: Sequence[int], alphabet: Alphabet) -> "Trace":
        """Construct a trace, enforcing id range and dagger absorption."""
        symbols = tuple(symbols)
        if not symbols:
            raise ValueError("a trace needs horizon >= 1")
        if any(not (0 <= s < len(alphabet)) for s in symbols):
            raise ValueError("trace contains a symbol id outside the alphabet")
        if not dagger_absorbing(symbols, alphabet.dagger_id):
            raise ValueError("dagger must be absorbing: once it appears, it stays")
        return cls(symbols)


@dataclass(frozen=True)
class Provenance:
    seed: Optional[int] = None
    system: Optional[str] = None


@dataclass(frozen=True)
class TraceSet:
    """A batch of traces sharing one alphabet and one horizon."""

    traces: tuple[Trace, ...]
    alphabet: Alphabet
    horizon: int
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self) -> None:
        n_symbols = len(self.alphabet)
        for t in self.traces:
            if t.horizon != self.horizon:
                raise ValueError(
                    f"trace of length {t.horizon} in a TraceSet with horizon {self.horizon}"
                )
            if any(not (0 <= s < n_symbols) for s in t.symbols):
                raise ValueError("trace contains a symbol id outside the alphabet")
            if not dagger_absorbing(t.symbols, self.alphabet.dagger_id):
                raise ValueError("dagger must be absorbing in every trace")

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)


def window(trace: Trace, l: int) -> list[LSeq]:
    """The H-l+1 consecutive length-``l`` subwords of ``trace``, in order.

    Duplicates are retained; consecutive windows overlap on l-1 symbols.
    """
    if l < 1:
        raise ValueError("window length must be >= 1")
    if l > trace.horizon:
        raise ValueError("horizon shorter than l")
    syms = trace.symbols
    return [syms[i : i + l] for i in range(trace.horizon - l + 1)]


def distinct_lseqs(traces: TraceSet, l: int) -> tuple[LSeq, ...]:
    """All witnessed l-sequences, deduplicated and lexicographically sorted.

    This set is the (closed-form) solution of the sampled-constraint
    program: it indicates exactly which l-sequences were observed.
    """
    if len(traces) == 0:
        raise ValueError("cannot extract l-sequences from an empty TraceSet")
    seen: set[LSeq] = set()
    for t in traces:
        seen.update(window(t, l))
    return tuple(sorted(seen))


# ---------------------------------------------------------------------------
# CSV interchange format: one row per trace, symbol names as columns.
# Header comments carry the alphabet and the horizon; the reserved symbol
# is written as DAGGER.


def _name_to_csv(name: str) -> str:
    return DAGGER_CSV if name == DAGGER_NAME else name


def _name_from_csv(name: str) -> str:
    return DAGGER_NAME if name == DAGGER_CSV else name


def traces_to_csv(traces: TraceSet) -> str:
    out = io.StringIO()
    names = ",".join(_name_to_csv(n) for n in traces.alphabet)
    out.write(f"# alphabet: {names}\n")
    out.write(f"# H: {traces.horizon}\n")
    if traces.provenance.seed is not None:
        out.write(f"# seed: {traces.provenance.seed}\n")
    if traces.provenance.system is not None:
        out.write(f"# system: {traces.provenance.system}\n")
    alph = traces.alphabet
    for t in traces:
        out.write(",".join(_name_to_csv(alph.name(s)) for s in t.symbols))
        out.write("\n")
    return out.getvalue()


def save_traces_csv(traces: TraceSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(traces_to_csv(traces))


def traces_from_csv(text: str) -> TraceSet:
    alphabet: Optional[Alphabet] = None
    horizon: Optional[int] = None
    seed: Optional[int] = None
    system: Optional[str] = None
    rows: list[Trace] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("alphabet:"):
                names = [
                    _name_from_csv(n.strip())
                    for n in body[len("alphabet:") :].split(",")
                    if n.strip()
                ]
                alphabet = Alphabet(names)
            elif body.startswith("H:"):
                horizon = int(body[len("H:") :].strip())
            elif body.startswith("seed:"):
                seed = int(body[len("seed:") :].strip())
            elif body.startswith("system:"):
                system = body[len("system:") :].strip()
            continue
        if alphabet is None:
            raise ValueError("trace CSV is missing the '# alphabet:' header")
        names = [_name_from_csv(n.strip()) for n in line.split(",")]
        try:
            symbols = tuple(alphabet.id(n) for n in names)
        except KeyError as exc:
            raise ValueError(f"unknown symbol {exc.args[0]!r} in trace CSV") from None
        rows.append(Trace.checked(symbols, alphabet))
    if alphabet is None or not rows:
        raise ValueError("trace CSV contains no traces")
    if horizon is None:
        horizon = rows[0].horizon
    return TraceSet(
        traces=tuple(rows),
        alphabet=alphabet,
        horizon=horizon,
        provenance=Provenance(seed=seed, system=system),
    )


def load_traces_csv(path: str) -> TraceSet:
    with open(path, "r", encoding="utf-8") as fh:
        return traces_from_csv(fh.read())
