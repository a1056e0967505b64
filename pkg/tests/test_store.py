import math
import threading

import pytest
from conftest import article
from oracles import DumpOracle, make_rng, random_records

from wikied.errors import ContractError, SnapshotCorruptError, SnapshotError, SnapshotVersionError
from wikied.ingest import PageKind, build_snapshot
from wikied.store import KnowledgeSnapshot, load_snapshot, loads_snapshot
from wikied.text import render_links, tokenize


def named(snap, links):
    return {snap.title(t): c for t, c in links}


class TestLoad:
    def test_empty(self, tmp_path):
        build_snapshot([], tmp_path / "s")
        assert load_snapshot(tmp_path / "s").entity_count == 0

    def test_saadi_resolves(self, saadi):
        assert saadi.title(saadi.resolve_title("Saadi")) == "Saadi"

    def test_missing_file(self, tmp_path):
        with pytest.raises(SnapshotError, match="not found"):
            load_snapshot(tmp_path / "nope")

    def test_truncated(self, saadi_snapshot_path, tmp_path):
        data = saadi_snapshot_path.read_bytes()
        for cut in (10, len(data) // 2, len(data) - 1):
            (tmp_path / "t").write_bytes(data[:cut])
            with pytest.raises(SnapshotCorruptError):
                load_snapshot(tmp_path / "t")

    def test_tampered_payload(self, saadi_snapshot_path):
        data = bytearray(saadi_snapshot_path.read_bytes())
        data[-5] = ord("x") if data[-5] != ord("x") else ord("y")
        with pytest.raises(SnapshotCorruptError, match="checksum"):
            loads_snapshot(bytes(data))

    def test_version_mismatch(self, saadi_snapshot_path):
        data = saadi_snapshot_path.read_bytes().replace(b'"format_version":1', b'"format_version":99', 1)
        with pytest.raises(SnapshotVersionError):
            loads_snapshot(data)

    def test_not_a_snapshot(self):
        with pytest.raises(SnapshotCorruptError):
            loads_snapshot(b'{"magic": "other"}\n{}')

    def test_round_trip_matches_records(self, saadi_records, saadi):
        oracle = DumpOracle(saadi_records)
        arts = [r for r in saadi_records if r.kind is PageKind.ARTICLE]
        assert [e.title for e in saadi.entities] == [r.title for r in arts]
        for rec in arts:
            e = saadi.entity(saadi.id_of(rec.title))
            assert e.infobox_type == rec.infobox_type
            assert named(saadi, e.llc1) == oracle.llc1(rec.title)
            expected_terms = {}
            for tok in tokenize(render_links(rec.body)):
                expected_terms[tok] = expected_terms.get(tok, 0) + 1
            assert dict(e.term_vector) == expected_terms
        assert dict(saadi.redirects) == {"Old Shiraz": saadi.id_of("Shiraz")}
        assert [saadi.title(i) for i in saadi.disambig["Saadi"]] == ["Saadi", "Saadi Township"]
        for term, df in saadi.doc_freq.items():
            assert df == sum(term in e.term_vector for e in saadi.entities)

    def test_file_not_touched_after_load(self, saadi_records, tmp_path):
        path = tmp_path / "s"
        build_snapshot(saadi_records, path)
        snap = load_snapshot(path)
        path.unlink()
        assert snap.llc2(0)


class TestResolveTitle:
    def test_case_folded(self, saadi):
        assert saadi.resolve_title("saadi") == saadi.id_of("Saadi")
        assert saadi.resolve_title("SHIRAZ") == saadi.id_of("Shiraz")

    def test_unknown(self, saadi):
        assert saadi.resolve_title("Tehran") is None

    def test_redirect(self, saadi):
        assert saadi.resolve_title("Old Shiraz") == saadi.id_of("Shiraz")
        assert saadi.resolve_title("old shiraz") == saadi.id_of("Shiraz")

    def test_exact_title_beats_folded_collision(self):
        snap = KnowledgeSnapshot.from_records([article("And"), article("AND")])
        assert snap.resolve_title("AND") == 1
        assert snap.resolve_title("and") == 0


class TestLLC:
    def test_llc1_saadi_counts(self, saadi):
        assert named(saadi, saadi.llc1(saadi.id_of("Saadi"))) == {"Shiraz": 10, "Persian": 4, "Poet": 12}
        assert [saadi.title(t) for t, _ in saadi.llc1(0)] == ["Shiraz", "Persian", "Poet"]

    def test_llc1_empty(self, saadi):
        assert saadi.llc1(saadi.id_of("City")) == ()

    def test_llc1_shiraz(self, saadi, saadi_records):
        assert named(saadi, saadi.llc1(saadi.id_of("Shiraz"))) == DumpOracle(saadi_records).llc1("Shiraz")

    def test_invalid_id(self, saadi):
        for bad in (-1, 7, 100):
            with pytest.raises(ContractError):
                saadi.llc1(bad)
            with pytest.raises(ContractError):
                saadi.llc2(bad)

    def test_llc2_equals_llc1_when_targets_linkless(self):
        snap = KnowledgeSnapshot.from_records([article("A", "[[B]] [[B]] [[C]]"), article("B"), article("C")])
        assert snap.llc2(0) == snap.llc1(0)

    def test_llc2_two_hop_fixture(self, two_hop):
        a1, d2, c2 = (two_hop.id_of(t) for t in ("A1", "D2", "C2"))
        assert two_hop.llc1(a1) == ((d2, 1),)
        assert two_hop.llc1(d2) == ((c2, 3),)
        assert two_hop.llc2(a1) == ((d2, 1), (c2, 3))

    def test_llc2_saadi(self, saadi, saadi_records):
        assert named(saadi, saadi.llc2(0)) == DumpOracle(saadi_records).llc2("Saadi")
        assert named(saadi, saadi.llc2(0)) == {
            "Shiraz": 10, "Persian": 4 + 1, "Poet": 12 + 1, "Iran": 1 + 1, "City": 1,
        }

    def test_llc2_not_scaled_by_first_hop_count(self):
        snap = KnowledgeSnapshot.from_records([article("A", "[[B]]" * 10), article("B", "[[C]]"), article("C")])
        assert named(snap, snap.llc2(0)) == {"B": 10, "C": 1}

    def test_llc2_damping(self):
        snap = KnowledgeSnapshot.from_records([article("A", "[[B]]"), article("B", "[[C]] [[C]]"), article("C")])
        assert named(snap, snap.llc2(0, damping=0.5)) == {"B": 1, "C": 1.0}
        assert named(snap, snap.llc2(0)) == {"B": 1, "C": 2}

    def test_random_against_two_hop_oracle(self):
        rng = make_rng(11)
        for _ in range(40):
            records = random_records(rng)
            snap = KnowledgeSnapshot.from_records(records)
            oracle = DumpOracle(records)
            for e in snap.entities:
                l1, l2 = named(snap, snap.llc1(e.id)), named(snap, snap.llc2(e.id))
                assert l1 == oracle.llc1(e.title)
                assert l2 == oracle.llc2(e.title)
                assert set(l1) <= set(l2)
                assert all(l2[t] >= c for t, c in l1.items())
                assert snap.llc2(e.id) == snap.llc2(e.id)

    def test_concurrent_llc2_readers_agree(self, saadi):
        snap = KnowledgeSnapshot.from_records(
            [article(f"E{i}", " ".join(f"[[E{(i * 7 + k) % 30}]]" for k in range(6))) for i in range(30)]
        )
        results = [[] for _ in range(8)]

        def work(slot):
            for eid in range(30):
                results[slot].append(snap.llc2(eid))

        threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)


class TestIdf:
    def test_single_document(self):
        snap = KnowledgeSnapshot.from_records([article("A", "word")])
        assert snap.idf("word") == pytest.approx(math.log(1.5))
        assert snap.idf("word") == pytest.approx(0.405, abs=5e-4)

    def test_unseen_term_empty_snapshot(self):
        assert KnowledgeSnapshot.from_records([]).idf("x") == 0.0

    def test_df1_n100(self):
        snap = KnowledgeSnapshot.from_records(
            [article("A0", "rare")] + [article(f"A{i}", "common") for i in range(1, 100)]
        )
        assert snap.idf("rare") == pytest.approx(math.log(51))
        assert snap.idf("rare") == pytest.approx(3.932, abs=5e-4)
        assert snap.idf("unseen") == pytest.approx(math.log(101))

    def test_monotone_in_df(self):
        snap = KnowledgeSnapshot.from_records(
            [article(f"A{i}", " ".join(f"t{j}" for j in range(i + 1))) for i in range(12)]
        )
        by_df = sorted(snap.doc_freq.items(), key=lambda kv: kv[1])
        idfs = [snap.idf(t) for t, _ in by_df]
        assert all(a >= b for a, b in zip(idfs, idfs[1:]))
