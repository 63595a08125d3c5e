import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcomplete.core import (
    DAGGER_NAME,
    Alphabet,
    Provenance,
    Trace,
    TraceSet,
    dagger_absorbing,
    distinct_lseqs,
    load_traces_csv,
    save_traces_csv,
    traces_from_csv,
    traces_to_csv,
    window,
)


def make_traceset(rows, names=("y1", "y2", "y3", "y4", "y5")):
    alphabet = Alphabet(names)
    alphabet.intern(DAGGER_NAME)
    traces = tuple(
        Trace.checked(tuple(alphabet.id(n) for n in row), alphabet) for row in rows
    )
    return TraceSet(traces=traces, alphabet=alphabet, horizon=len(rows[0]))


class TestAlphabet:
    def test_first_insertion_gets_id_zero(self):
        a = Alphabet()
        assert a.intern("y1") == 0

    def test_intern_is_idempotent(self):
        a = Alphabet(("y1",))
        assert a.intern("y1") == 0
        assert len(a) == 1

    def test_dagger_appended_last(self):
        a = Alphabet(("y1", "y2"))
        assert a.intern(DAGGER_NAME) == 2

    def test_dagger_reappended_when_displaced(self):
        a = Alphabet(("y1", DAGGER_NAME))
        new_id = a.intern("y2")
        assert new_id == 1
        assert a.symbols == ("y1", "y2", DAGGER_NAME)
        assert a.dagger_id == 2

    def test_ids_contiguous_in_insertion_order(self):
        a = Alphabet(("b", "a", "c"))
        assert [a.id(n) for n in ("b", "a", "c")] == [0, 1, 2]

    def test_bad_names_rejected(self):
        a = Alphabet()
        with pytest.raises(ValueError):
            a.intern("a,b")
        with pytest.raises(ValueError):
            a.intern("a b")


class TestWindow:
    def test_splits_into_h_minus_l_plus_one(self):
        ts = make_traceset([["y1", "y2", "y3", "y4"]])
        ws = window(ts.traces[0], 2)
        assert ws == [(0, 1), (1, 2), (2, 3)]

    def test_l_equals_h(self):
        ts = make_traceset([["y1", "y2"]])
        assert window(ts.traces[0], 2) == [(0, 1)]

    def test_duplicates_retained(self):
        ts = make_traceset([["y5", "y5", "y5"]])
        assert window(ts.traces[0], 2) == [(4, 4), (4, 4)]

    def test_horizon_shorter_than_l(self):
        ts = make_traceset([["y1", "y2"]])
        with pytest.raises(ValueError, match="horizon shorter than l"):
            window(ts.traces[0], 3)

    @given(
        symbols=st.lists(st.integers(0, 4), min_size=1, max_size=12),
        l=st.integers(1, 12),
    )
    @settings(max_examples=200, deadline=None)
    def test_window_count_and_overlap(self, symbols, l):
        t = Trace(tuple(symbols))
        if l > len(symbols):
            with pytest.raises(ValueError):
                window(t, l)
            return
        ws = window(t, l)
        assert len(ws) == len(symbols) - l + 1
        for a, b in zip(ws, ws[1:]):
            assert a[1:] == b[:-1]


class TestDistinctLseqs:
    def test_hand_union(self):
        ts = make_traceset([["y1", "y2", "y3"], ["y2", "y3", "y1"]])
        assert distinct_lseqs(ts, 2) == ((0, 1), (1, 2), (2, 0))

    def test_sorted_lexicographically(self):
        ts = make_traceset([["y3", "y1", "y2"]])
        res = distinct_lseqs(ts, 2)
        assert list(res) == sorted(res)

    def test_invariant_under_reordering_and_duplication(self):
        rows = [["y1", "y2", "y3"], ["y2", "y3", "y1"], ["y1", "y1", "y1"]]
        a = distinct_lseqs(make_traceset(rows), 2)
        b = distinct_lseqs(make_traceset(rows[::-1] + rows), 2)
        assert a == b

    def test_empty_traceset_rejected(self):
        alphabet = Alphabet(("y1",))
        ts = TraceSet(traces=(), alphabet=alphabet, horizon=3)
        with pytest.raises(ValueError):
            distinct_lseqs(ts, 2)

    def test_hybrid_sample_has_exactly_six(self, hybrid_traces_h9):
        assert len(distinct_lseqs(hybrid_traces_h9, 2)) == 6


class TestDaggerAbsorption:
    def test_valid_trace_accepted(self):
        a = Alphabet(("y1", DAGGER_NAME))
        t = Trace.checked((0, 1, 1), a)
        assert t.symbols == (0, 1, 1)

    def test_non_absorbing_rejected(self):
        a = Alphabet(("y1", DAGGER_NAME))
        with pytest.raises(ValueError, match="absorbing"):
            Trace.checked((1, 0), a)

    @given(
        prefix=st.lists(st.integers(0, 2), max_size=6),
        tail=st.lists(st.integers(0, 3), max_size=6),
    )
    @settings(max_examples=200, deadline=None)
    def test_random_injections(self, prefix, tail):
        # dagger id is 3; any accepted trace satisfies absorption
        a = Alphabet(("y1", "y2", "y3"))
        a.intern(DAGGER_NAME)
        symbols = tuple(prefix) + (3,) + tuple(tail)
        if dagger_absorbing(symbols, 3):
            Trace.checked(symbols, a)
        else:
            with pytest.raises(ValueError):
                Trace.checked(symbols, a)


class TestTraceSet:
    def test_mixed_horizons_rejected(self):
        a = Alphabet(("y1",))
        with pytest.raises(ValueError):
            TraceSet(traces=(Trace((0,)), Trace((0, 0))), alphabet=a, horizon=1)


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        ts = make_traceset([["y1", "y2", "y3"], ["y2", "y3", "y1"]])
        ts = TraceSet(
            traces=ts.traces,
            alphabet=ts.alphabet,
            horizon=ts.horizon,
            provenance=Provenance(seed=7, system="demo"),
        )
        path = tmp_path / "traces.csv"
        save_traces_csv(ts, str(path))
        back = load_traces_csv(str(path))
        assert back.alphabet == ts.alphabet
        assert back.horizon == ts.horizon
        assert [t.symbols for t in back] == [t.symbols for t in ts]
        assert back.provenance == ts.provenance

    def test_dagger_written_as_keyword(self):
        a = Alphabet(("y1",))
        a.intern(DAGGER_NAME)
        ts = TraceSet(traces=(Trace((0, 1, 1)),), alphabet=a, horizon=3)
        text = traces_to_csv(ts)
        assert "DAGGER" in text
        assert DAGGER_NAME not in text.splitlines()[-1]
        back = traces_from_csv(text)
        assert back.traces[0].symbols == (0, 1, 1)

    def test_unknown_symbol_rejected(self):
        text = "# alphabet: y1,y2\n# H: 2\ny1,zz\n"
        with pytest.raises(ValueError, match="unknown symbol"):
            traces_from_csv(text)
