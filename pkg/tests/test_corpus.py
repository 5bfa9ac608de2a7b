import pytest

from pathrag.corpus import (CorpusError, Document, load_corpus, load_qa,
                            make_chunk_id, segment_document)


def write_profiles(tmp_path, profiles: dict[str, str]):
    root = tmp_path / "corpus"
    root.mkdir()
    for name, text in profiles.items():
        (root / name).write_text(text, encoding="utf-8")
    return root


class TestLoadCorpus:
    def test_two_profiles_ids_from_filenames(self, tmp_path):
        root = write_profiles(tmp_path, {
            "alpha.txt": "Alpha company builds turbines.",
            "beta.txt": "Beta company sells spices.",
        })
        docs = load_corpus(root)
        assert [d.doc_id for d in docs] == ["alpha", "beta"]
        assert docs[0].text == "Alpha company builds turbines."

    def test_empty_directory(self, tmp_path):
        root = tmp_path / "empty"
        root.mkdir()
        assert load_corpus(root) == []

    def test_duplicate_doc_id_names_the_id(self, tmp_path):
        root = write_profiles(tmp_path, {
            "alpha.txt": "one body",
            "alpha.md": "another body",
        })
        with pytest.raises(CorpusError, match="alpha"):
            load_corpus(root)

    def test_metadata_header_block(self, tmp_path):
        root = write_profiles(tmp_path, {
            "gamma.txt": "title: Gamma Corp\nticker: GMA\nyear: 2023\n\nGamma Corp profile body.",
        })
        [doc] = load_corpus(root)
        assert doc.title == "Gamma Corp"
        assert doc.metadata == {"title": "Gamma Corp", "ticker": "GMA", "year": "2023"}
        assert doc.text == "Gamma Corp profile body."

    def test_file_without_header_is_all_body(self, tmp_path):
        root = write_profiles(tmp_path, {"delta.txt": "Just a body with: colon inside."})
        [doc] = load_corpus(root)
        assert doc.metadata == {}
        assert doc.text == "Just a body with: colon inside."

    def test_missing_path(self, tmp_path):
        with pytest.raises(CorpusError, match="not found"):
            load_corpus(tmp_path / "nope")

    def test_empty_body_rejected(self, tmp_path):
        root = write_profiles(tmp_path, {"empty.txt": "title: X\n\n"})
        with pytest.raises(CorpusError, match="empty"):
            load_corpus(root)

    def test_unknown_schema(self, tmp_path):
        with pytest.raises(CorpusError, match="schema"):
            load_corpus(tmp_path, schema="parquet")


class TestLoadQa:
    def test_valid_records(self, tmp_path):
        qa = tmp_path / "qa.jsonl"
        qa.write_text(
            '{"question": "q1", "answer": "a1", "doc_id": "d1"}\n'
            '{"question": "q2", "answer": "a2", "doc_id": "d2"}\n',
            encoding="utf-8")
        records = load_qa(qa)
        assert [r.doc_id for r in records] == ["d1", "d2"]

    def test_malformed_record_reports_line(self, tmp_path):
        qa = tmp_path / "qa.jsonl"
        qa.write_text('{"question": "q", "answer": "a", "doc_id": "d"}\nnot json\n',
                      encoding="utf-8")
        with pytest.raises(CorpusError, match=":2"):
            load_qa(qa)

    def test_missing_field_reports_line(self, tmp_path):
        qa = tmp_path / "qa.jsonl"
        qa.write_text('{"question": "q", "answer": "a"}\n', encoding="utf-8")
        with pytest.raises(CorpusError, match="doc_id"):
            load_qa(qa)


class TestSegmentDocument:
    def test_no_whitespace_exact_window_arithmetic(self):
        doc = Document(doc_id="d", text="a" * 1200)
        chunks = segment_document(doc, window_chars=500, overlap_chars=0)
        assert [len(c.text) for c in chunks] == [500, 500, 200]
        assert [c.char_span for c in chunks] == [(0, 500), (500, 1000), (1000, 1200)]

    def test_short_text_single_chunk(self):
        doc = Document(doc_id="d", text="b" * 300)
        chunks = segment_document(doc, window_chars=500)
        assert len(chunks) == 1
        assert chunks[0].text == doc.text

    def test_overlap_stride_arithmetic(self):
        doc = Document(doc_id="d", text="c" * 1000)
        chunks = segment_document(doc, window_chars=500, overlap_chars=100)
        assert [c.char_span[0] for c in chunks] == [0, 400, 800]

    def test_whitespace_snap_within_tail(self):
        # Window 100, tail 10: a space at offset 95 pulls the boundary left.
        text = "x" * 95 + " " + "y" * 104
        doc = Document(doc_id="d", text=text)
        chunks = segment_document(doc, window_chars=100, overlap_chars=0)
        assert chunks[0].char_span == (0, 96)
        assert chunks[0].text.endswith(" ")
        assert chunks[1].text.startswith("y")

    def test_no_snap_outside_tail(self):
        # The only space sits before the trailing 10%, so the split is hard.
        text = "x" * 50 + " " + "y" * 100
        doc = Document(doc_id="d", text=text)
        chunks = segment_document(doc, window_chars=100, overlap_chars=0)
        assert chunks[0].char_span == (0, 100)

    def test_chunk_ids_and_ordinals(self):
        doc = Document(doc_id="doc-7", text="z" * 900)
        chunks = segment_document(doc, window_chars=400)
        assert [c.chunk_id for c in chunks] == [make_chunk_id("doc-7", i)
                                                for i in range(len(chunks))]
        assert [c.ordinal for c in chunks] == list(range(len(chunks)))

    def test_bad_parameters(self):
        doc = Document(doc_id="d", text="hello world")
        with pytest.raises(ValueError):
            segment_document(doc, window_chars=0)
        with pytest.raises(ValueError):
            segment_document(doc, window_chars=10, overlap_chars=10)

    def test_snap_never_stalls_with_large_overlap(self):
        # Spaces everywhere plus a window/overlap pair that leaves a stride
        # of 1 after snapping must still terminate and cover the text.
        text = ("ab " * 200).strip()
        doc = Document(doc_id="d", text=text)
        chunks = segment_document(doc, window_chars=10, overlap_chars=8)
        assert chunks[-1].char_span[1] == len(text)


def reconstruct(chunks) -> str:
    out = []
    prev_end = 0
    for ch in chunks:
        start, end = ch.char_span
        out.append(ch.text[prev_end - start:])
        prev_end = end
    return "".join(out)


class TestSegmentationProperties:
    WINDOWS = [(50, 0), (50, 10), (120, 0), (120, 30), (333, 50)]

    def _random_text(self, rng, n: int) -> str:
        alphabet = list("abcdefg hij k  lmnop\nqrs")
        return "".join(rng.choice(alphabet) for _ in range(n))

    def test_reconstruction_coverage_determinism(self, rng):
        import random
        pyrng = random.Random(7)
        for _ in range(25):
            n = pyrng.randint(1, 1500)
            text = self._random_text(pyrng, n)
            if not text:
                continue
            doc = Document(doc_id="d", text=text)
            for window, overlap in self.WINDOWS:
                a = segment_document(doc, window, overlap)
                b = segment_document(doc, window, overlap)
                assert a == b  # determinism
                assert reconstruct(a) == text  # reconstruction
                covered = set()
                for ch in a:
                    assert ch.text == text[ch.char_span[0]:ch.char_span[1]]
                    assert ch.text != ""
                    covered.update(range(*ch.char_span))
                assert covered == set(range(len(text)))  # coverage
                starts = [c.char_span[0] for c in a]
                assert starts == sorted(starts)
