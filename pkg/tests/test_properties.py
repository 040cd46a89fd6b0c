"""Property suites: randomized cross-validation of the two computation paths."""

import io

from hypothesis import given, settings, strategies as st

from huspmine import (
    MiningConfig,
    Pattern,
    QItemset,
    QSDatabase,
    QSequence,
    SymbolTable,
    UtilityTable,
    build_database_arrays,
    build_utility_array,
    find_matches,
    generate_mtable,
    mine,
    brute_force_mine,
    parse_dataset,
    pattern_utility,
    pattern_utility_in_sequence,
    qsequence_utility,
    serialize_dataset,
)
from huspmine.model import match_utility
from huspmine.miner import USPT, USPT1, USPT2, pattern_sort_key
from huspmine.oracle import brute_force_bounds, enumerate_occurring

from support import mixed_instances, max_sequence_length

N_ITEMS = 5


@st.composite
def qsequences(draw, max_elements=4, max_element_size=3):
    n_elems = draw(st.integers(1, max_elements))
    elements = []
    for _ in range(n_elems):
        size = draw(st.integers(1, max_element_size))
        items = draw(
            st.lists(st.integers(0, N_ITEMS - 1), min_size=size, max_size=size,
                     unique=True)
        )
        qtys = draw(st.lists(st.integers(1, 5), min_size=size, max_size=size))
        elements.append(QItemset.from_pairs(zip(items, qtys)))
    return QSequence("s", tuple(elements))


@st.composite
def patterns(draw, max_itemsets=3, max_itemset_size=2):
    k = draw(st.integers(1, max_itemsets))
    itemsets = []
    for _ in range(k):
        size = draw(st.integers(1, max_itemset_size))
        items = draw(
            st.lists(st.integers(0, N_ITEMS - 1), min_size=size, max_size=size,
                     unique=True)
        )
        itemsets.append(tuple(sorted(items)))
    return Pattern(tuple(itemsets))


UNIT = UtilityTable(tuple(range(1, N_ITEMS + 1)))


@given(qsequences(), patterns())
@settings(max_examples=300, deadline=None)
def test_match_enumeration_agrees_with_max_recursion(qseq, pattern):
    matches = find_matches(pattern, qseq)
    best = pattern_utility_in_sequence(pattern, qseq, UNIT)
    if not matches:
        assert best is None
    else:
        assert best == max(match_utility(m, qseq, UNIT) for m in matches)


@given(qsequences())
@settings(max_examples=200, deadline=None)
def test_array_suffix_sums_and_reconstruction(qseq):
    ua = build_utility_array(qseq, UNIT)
    n = len(ua)
    assert ua.record(n).ru == 0
    for p in range(1, n):
        assert ua.record(p).ru == ua.record(p + 1).ru + ua.record(p + 1).u
    assert sum(r.u for r in ua.records) == qsequence_utility(qseq, UNIT)


@given(st.lists(qsequences(), max_size=6))
@settings(max_examples=150, deadline=None)
def test_dataset_serialization_round_trip(seqs):
    names = SymbolTable(tuple(chr(ord("a") + i) for i in range(N_ITEMS)))
    db = QSDatabase(
        tuple(QSequence(str(i + 1), s.elements) for i, s in enumerate(seqs)),
        names,
    )
    text = serialize_dataset(db)
    again = parse_dataset(io.StringIO(text))
    if db.sequences:
        # reparsing interns only the items that occur, so compare contents
        rendered = [
            [[(db.symbols.name_of(i), q) for i, q in e.entries()]
             for e in s.elements]
            for s in db.sequences
        ]
        reparsed = [
            [[(again.symbols.name_of(i), q) for i, q in e.entries()]
             for e in s.elements]
            for s in again.sequences
        ]
        assert rendered == reparsed
    else:
        assert len(again) == 0


_MONO_DB = parse_dataset(io.StringIO("a[2] b[1] -1 c[3] -2\nb[4] -1 a[1] -2\n"))
_MONO_UT = UtilityTable((3, 2, 5))


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=100, deadline=None)
def test_mtable_generation_monotone(beta1, beta2, f1, f2):
    lo_b, hi_b = sorted((beta1, beta2))
    lo_f, hi_f = sorted((f1, f2))
    small = generate_mtable(_MONO_DB, _MONO_UT, lo_b, lo_f)
    big_beta = generate_mtable(_MONO_DB, _MONO_UT, hi_b, lo_f)
    big_f = generate_mtable(_MONO_DB, _MONO_UT, lo_b, hi_f)
    assert all(x <= y for x, y in zip(small.mu, big_beta.mu))
    assert all(x <= y for x, y in zip(small.mu, big_f.mu))


def test_projection_utilities_match_model_on_random_instances():
    checked = 0
    for db, utable, mtable in mixed_instances(20):
        arrays = build_database_arrays(db, utable)
        for seq in arrays:
            seq.rebuild(mtable)
        cap = min(5, max_sequence_length(db))
        for pattern, utility in enumerate_occurring(db, utable, cap):
            assert utility == pattern_utility(pattern, db, utable)
            checked += 1
    assert checked > 200


def test_bound_chain_and_monotonicity_on_random_instances():
    sampled = 0
    edges = 0
    for db, utable, mtable in mixed_instances(25):
        cap = min(6, max_sequence_length(db))
        bounds_of = {}
        for pattern, utility in enumerate_occurring(db, utable, cap):
            b = brute_force_bounds(pattern, db, utable, mtable)
            bounds_of[pattern] = b
            sampled += 1
            assert b.utility == utility
            assert b.utility <= b.peu <= b.seu <= b.swu
            assert b.pmiu <= b.miu
        for pattern, b in bounds_of.items():
            parent = pattern.parent()
            if parent is None:
                continue
            pb = bounds_of[parent]
            edges += 1
            assert b.swu <= pb.swu
            assert b.seu <= pb.seu
            assert b.peu <= pb.peu
            assert b.pmiu >= pb.pmiu
    assert sampled >= 1000
    assert edges >= 500


def test_engine_matches_oracle_across_variants():
    for db, utable, mtable in mixed_instances(15):
        want = [
            (h.pattern, h.utility, h.miu)
            for h in brute_force_mine(db, utable, mtable, max_sequence_length(db))
        ]
        for variant in (USPT1, USPT2, USPT):
            got, _ = mine(db, utable, mtable, MiningConfig(variant=variant))
            assert [(h.pattern, h.utility, h.miu) for h in got] == want


def test_uniform_threshold_special_case():
    from huspmine import MTable

    for db, utable, _ in mixed_instances(8):
        theta = max(1, sum(
            qsequence_utility(s, utable) for s in db.sequences
        ) // 20)
        uniform = MTable(tuple([theta] * len(db.symbols)))
        got, _ = mine(db, utable, uniform)
        want = brute_force_mine(db, utable, uniform, max_sequence_length(db))
        assert [(h.pattern, h.utility) for h in got] == [
            (h.pattern, h.utility) for h in want
        ]
        for h in got:
            assert h.utility >= theta
            assert h.miu == theta


def test_output_sorted_by_pattern_order():
    for db, utable, mtable in mixed_instances(10):
        got, _ = mine(db, utable, mtable)
        keys = [pattern_sort_key(h.pattern) for h in got]
        assert keys == sorted(keys)


def _drop_globally_hopeless_items(db, utable, mtable):
    """Model-level replica of the engine's pre-filter: delete items whose
    whole-sequence weight sits below the least threshold of any item."""
    from huspmine import swu as swu_op

    present = sorted({i for s in db.sequences for i in s.distinct_items()})
    if not present:
        return db
    floor = min(mtable.of(i) for i in present)
    doomed = {i for i in present if swu_op(i, db, utable) < floor}
    if not doomed:
        return db
    sequences = []
    for qseq in db.sequences:
        elements = []
        for element in qseq.elements:
            kept = [(i, q) for i, q in element.entries() if i not in doomed]
            if kept:
                elements.append(QItemset.from_pairs(kept))
        if elements:
            sequences.append(QSequence(qseq.sid, tuple(elements)))
    return QSDatabase(tuple(sequences), db.symbols)


def test_engine_node_bounds_match_the_match_list_oracle():
    """Every bound the search computes from projections must equal the value
    recomputed from explicit match lists over the pre-filtered database
    (uspt1 applies no other array rewrites)."""
    from huspmine import MiningObserver

    class Collect(MiningObserver):
        def __init__(self):
            self.nodes = {}

        def on_node(self, pattern, bounds, expanded):
            self.nodes[pattern] = bounds

    compared = 0
    for db, utable, mtable in mixed_instances(10):
        col = Collect()
        mine(db, utable, mtable, MiningConfig(variant=USPT1), observer=col)
        reduced = _drop_globally_hopeless_items(db, utable, mtable)
        for pattern, b in col.nodes.items():
            ob = brute_force_bounds(pattern, reduced, utable, mtable)
            assert (b.utility, b.peu, b.seu, b.swu, b.pmiu, b.miu) == (
                ob.utility, ob.peu, ob.seu, ob.swu, ob.pmiu, ob.miu
            )
            compared += 1
    assert compared > 300


def test_capped_length_matches_capped_oracle():
    for db, utable, mtable in mixed_instances(8):
        cap = max(1, max_sequence_length(db) // 2)
        want = [
            (h.pattern, h.utility, h.miu)
            for h in brute_force_mine(db, utable, mtable, max_len=cap)
        ]
        got, _ = mine(db, utable, mtable, MiningConfig(max_pattern_length=cap))
        assert [(h.pattern, h.utility, h.miu) for h in got] == want


def test_seu_node_bound_equivalence_on_random_instances():
    from huspmine.miner import BOUND_SEU

    for db, utable, mtable in mixed_instances(10):
        want = [
            (h.pattern, h.utility)
            for h in brute_force_mine(db, utable, mtable, max_sequence_length(db))
        ]
        for variant in (USPT1, USPT):
            got, _ = mine(db, utable, mtable,
                          MiningConfig(variant=variant, node_bound=BOUND_SEU))
            assert [(h.pattern, h.utility) for h in got] == want
