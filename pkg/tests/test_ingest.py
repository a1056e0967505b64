import json

import pytest
from conftest import article, disambiguation, redirect
from oracles import DumpOracle, make_rng, random_records

from wikied.errors import ConflictError, DumpParseError, SnapshotError
from wikied.ingest import (
    DumpRecord,
    PageKind,
    TitleResolver,
    build_snapshot,
    encode_snapshot,
    extract_links,
    parse_dump,
    write_dump,
)

SAADI_BODY = (
    "Born in [[Shiraz]]. " * 10 + "A [[Persian]] writer. " * 4 + "The [[Poet|poet]]. " * 12
)


class TestParseDump:
    def test_empty_stream(self):
        assert parse_dump("") == []
        assert parse_dump([]) == []

    def test_single_article_keeps_markup(self):
        dump = "#PAGE\tarticle\tSaadi\n" + SAADI_BODY + "\n"
        (rec,) = parse_dump(dump)
        assert rec.kind is PageKind.ARTICLE
        assert rec.title == "Saadi"
        # independent count with a trivial substring scan
        assert rec.body.count("[[Shiraz]]") == 10
        assert rec.body == SAADI_BODY

    def test_redirect_without_target_is_an_error(self):
        with pytest.raises(DumpParseError) as info:
            parse_dump("#PAGE\tredirect\tOld Shiraz\n")
        assert info.value.line == 1

    def test_malformed_header_reports_line(self):
        dump = "#PAGE\tarticle\tA\nbody\n#PAGE\tarticle\n"
        with pytest.raises(DumpParseError) as info:
            parse_dump(dump)
        assert info.value.line == 3

    def test_unknown_kind(self):
        with pytest.raises(DumpParseError, match="unknown page kind"):
            parse_dump("#PAGE\tcategory\tX\n")

    def test_unknown_directive(self):
        with pytest.raises(DumpParseError) as info:
            parse_dump("#PAGE\tarticle\tA\n#TEMPLATE\tx\n")
        assert info.value.line == 2

    def test_header_after_body(self):
        with pytest.raises(DumpParseError):
            parse_dump("#PAGE\tarticle\tA\ntext\n#INFOBOX\tfilm\n")

    def test_content_before_first_page(self):
        with pytest.raises(DumpParseError):
            parse_dump("stray\n#PAGE\tarticle\tA\n")

    def test_duplicate_title(self):
        with pytest.raises(ConflictError, match="'A'"):
            parse_dump("#PAGE\tarticle\tA\n#PAGE\tredirect\tA\n#REDIRECT\tB\n")

    def test_disambiguation_may_share_article_title(self):
        recs = parse_dump("#PAGE\tarticle\tSaadi\n#PAGE\tdisambiguation\tSaadi\n#DISAMBIG\tSaadi\n")
        assert [r.kind for r in recs] == [PageKind.ARTICLE, PageKind.DISAMBIGUATION]

    def test_empty_disambiguation(self):
        with pytest.raises(DumpParseError):
            parse_dump("#PAGE\tdisambiguation\tSaadi\n")

    def test_escaped_hash(self):
        (rec,) = parse_dump("#PAGE\tarticle\tA\n##1 hit\nplain\n")
        assert rec.body == "#1 hit\nplain"

    def test_infobox_and_targets(self, saadi_records):
        kinds = [r.kind for r in saadi_records]
        assert len(saadi_records) == 9
        assert kinds.count(PageKind.ARTICLE) == 7
        by_title = {(r.kind, r.title): r for r in saadi_records}
        assert by_title[(PageKind.ARTICLE, "Saadi")].infobox_type == "person"
        assert by_title[(PageKind.DISAMBIGUATION, "Saadi")].disambig_targets == ("Saadi", "Saadi Township")
        assert by_title[(PageKind.REDIRECT, "Old Shiraz")].redirect_target == "Shiraz"

    def test_round_trip_through_writer(self, saadi_records):
        assert parse_dump(write_dump(saadi_records)) == saadi_records


class TestExtractLinks:
    titles = {"Saadi": 0, "Shiraz": 1, "Persian": 2, "Poet": 3}

    def test_saadi_link_counts(self):
        body = "[[Shiraz]]" * 10 + "[[Persian]]" * 4 + "[[Poet]]" * 12
        assert extract_links(body, self.titles, {}) == ((1, 10), (2, 4), (3, 12))

    def test_no_links(self):
        assert extract_links("plain text", self.titles, {}) == ()

    def test_redirect_is_followed(self):
        assert extract_links("[[Old Shiraz]]", {"Shiraz": 0}, {"Old Shiraz": "Shiraz"}) == ((0, 1),)

    def test_anchor_and_unknown_and_self(self):
        body = "[[Poet|poets]] [[Nowhere]] [[Saadi]] [[Poet#Life|x]]"
        assert extract_links(body, self.titles, {}, self_id=0) == ((3, 2),)

    def test_redirect_chain(self):
        rm = {"A": "B", "B": "C", "C": "Shiraz"}
        assert extract_links("[[A]]", {"Shiraz": 0}, rm) == ((0, 1),)

    def test_redirect_cycle_names_the_cycle(self):
        with pytest.raises(ConflictError, match="A -> B -> A"):
            extract_links("[[A]]", {}, {"A": "B", "B": "A"})

    def test_redirect_chain_too_deep(self):
        rm = {f"R{i}": f"R{i + 1}" for i in range(20)}
        rm["R20"] = "T"
        with pytest.raises(ConflictError, match="deeper"):
            extract_links("[[R0]]", {"T": 0}, rm)

    def test_case_folded_target(self):
        assert extract_links("[[shiraz]]", self.titles, {}) == ((1, 1),)

    def test_matches_naive_scanner_on_random_dumps(self):
        rng = make_rng(7)
        for _ in range(50):
            records = random_records(rng)
            oracle = DumpOracle(records)
            arts = [r for r in records if r.kind is PageKind.ARTICLE]
            ids = {r.title: i for i, r in enumerate(arts)}
            rmap = {r.title: r.redirect_target for r in records if r.kind is PageKind.REDIRECT}
            resolver = TitleResolver(ids, rmap)
            for r in arts:
                got = extract_links(r.body, ids, rmap, self_id=ids[r.title], resolver=resolver)
                assert {arts[t].title: c for t, c in got} == oracle.llc1(r.title)
                assert sum(c for _, c in got) == sum(oracle.llc1(r.title).values())


class TestBuildSnapshot:
    def test_empty(self, tmp_path):
        manifest = build_snapshot([], tmp_path / "s")
        assert manifest.entity_count == 0

    def test_saadi_manifest(self, saadi_records, tmp_path):
        m = build_snapshot(saadi_records, tmp_path / "s")
        assert (m.entity_count, m.redirect_count, m.disambig_count) == (7, 1, 1)
        assert m.format_version == 1

    def test_duplicate_titles(self, tmp_path):
        with pytest.raises(ConflictError):
            build_snapshot([article("A"), article("A")], tmp_path / "s")

    def test_invalid_record(self, tmp_path):
        with pytest.raises(ConflictError):
            build_snapshot([DumpRecord("R", PageKind.REDIRECT)], tmp_path / "s")

    def test_byte_identical(self, saadi_records):
        assert encode_snapshot(saadi_records) == encode_snapshot(list(saadi_records))

    def test_timestamp_from_environment(self, saadi_records, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        header = json.loads(encode_snapshot(saadi_records).split(b"\n")[0])
        assert header["manifest"]["build_timestamp"] == 1700000000

    def test_atomic_write_leaves_no_temp(self, saadi_records, tmp_path):
        build_snapshot(saadi_records, tmp_path / "s")
        assert [p.name for p in tmp_path.iterdir()] == ["s"]

    def test_unwritable_location(self, saadi_records, tmp_path):
        with pytest.raises(SnapshotError):
            build_snapshot(saadi_records, tmp_path / "missing-dir" / "s")

    def test_dangling_redirect_is_dropped(self, tmp_path):
        m = build_snapshot([article("A"), redirect("B", "Nowhere")], tmp_path / "s")
        assert m.redirect_count == 0

    def test_redirect_cycle(self, tmp_path):
        with pytest.raises(ConflictError, match="cycle"):
            build_snapshot([redirect("A", "B"), redirect("B", "A")], tmp_path / "s")

    def test_disambiguation_through_redirect(self, tmp_path):
        recs = [article("Shiraz"), redirect("Old Shiraz", "Shiraz"),
                disambiguation("Sh", "Old Shiraz", "Nowhere")]
        payload = json.loads(encode_snapshot(recs).split(b"\n", 1)[1])
        assert payload["disambig"] == {"Sh": [0]}
