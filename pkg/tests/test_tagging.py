import pytest

from pathrag.corpus import Chunk, Document
from pathrag.generation import ScriptedCompletionClient, load_templates
from pathrag.tagging import (HeuristicTagger, LlmTagger, MasterTagCache,
                             SemanticPath, TaggingError, build_path,
                             generate_master_tags, generate_paragraph_tags,
                             master_or_fallback, normalize_tag, normalize_tags)


def chunk_of(text: str, doc_id: str = "d", ordinal: int = 0) -> Chunk:
    return Chunk(chunk_id=f"{doc_id}#{ordinal}", doc_id=doc_id,
                 ordinal=ordinal, text=text, char_span=(0, len(text)))


class TestNormalizeTags:
    def test_case_insensitive_dedup_keeps_first_surface_form(self):
        assert normalize_tags(["Universal Banking!!", "universal banking"]) == [
            "Universal Banking"]

    def test_empty_input(self):
        assert normalize_tags([]) == []

    def test_truncation_to_four_words(self):
        assert normalize_tags(["a b c d e f"]) == ["a b c d"]

    def test_punctuation_and_quotes_stripped(self):
        assert normalize_tag('  "Q3-budget" (draft) ') == "Q3 budget draft"

    def test_all_punctuation_drops(self):
        assert normalize_tag("!!! ...") is None
        assert normalize_tags(["!!!", "---"]) == []

    def test_whitespace_collapsed(self):
        assert normalize_tag("cash \t flow\n statement") == "cash flow statement"


# Hand-computed tf-idf oracle. Segments (sentence split): S1..S3; the term
# "banking" occurs 3 times in 2 segments -> 3*log(1+3/2) = 2.749, the top
# score; "arta banking group" is the most frequent proper phrase (2 hits in
# 2 segments -> 2*log(2.5)); remaining ties order lexicographically.
ARTA_TEXT = ("Arta Banking Group operates a universal banking franchise. "
             "Arta Banking Group reported strong retail lending. "
             "The bank funds infrastructure projects and retail lending nationwide.")


class TestHeuristicTagger:
    def test_master_tags_match_hand_computed_ranking(self):
        tags = HeuristicTagger().tag("master", ARTA_TEXT, 5)
        assert tags == ["banking", "arta", "arta banking group", "group", "lending"]

    def test_most_frequent_proper_phrase_included(self):
        tags = HeuristicTagger().tag("master", ARTA_TEXT, 5)
        assert "arta banking group" in tags

    def test_single_word_document(self):
        assert HeuristicTagger().tag("master", "tesla", 5) == ["tesla"]

    def test_paragraph_first_tag_is_top_term(self):
        text = ("The quarterly budget meeting reviewed budget overruns. "
                "Budget discipline improved.")
        tags = HeuristicTagger().tag("paragraph", text, 3)
        assert len(tags) == 3
        assert tags[0] == "budget"

    def test_deterministic(self):
        t = HeuristicTagger()
        assert t.tag("master", ARTA_TEXT, 5) == t.tag("master", ARTA_TEXT, 5)

    def test_empty_text(self):
        assert HeuristicTagger().tag("master", "...", 5) == []


class TestGenerateMasterTags:
    def test_truncates_to_max_tags(self):
        class TenTagger:
            def tag(self, kind, text, limit):
                return [f"tag {i}" for i in range(10)]

        doc = Document(doc_id="d", text="body")
        tags = generate_master_tags(doc, 5, TenTagger())
        assert tags == [f"tag {i}" for i in range(5)]

    def test_cache_returns_identical_lists(self):
        calls = []

        class CountingTagger:
            def tag(self, kind, text, limit):
                calls.append(kind)
                return ["alpha", "beta"]

        doc = Document(doc_id="d", text="body")
        cache = MasterTagCache()
        first = generate_master_tags(doc, 5, CountingTagger(), cache=cache)
        second = generate_master_tags(doc, 5, CountingTagger(), cache=cache)
        assert first == second == ["alpha", "beta"]
        assert len(calls) == 1

    def test_backend_failure_names_document(self):
        class FailingTagger:
            def tag(self, kind, text, limit):
                raise TaggingError("boom")

        doc = Document(doc_id="doc-42", text="body")
        with pytest.raises(TaggingError, match="doc-42"):
            generate_master_tags(doc, 5, FailingTagger())

    def test_max_tags_validation(self):
        doc = Document(doc_id="d", text="body")
        with pytest.raises(ValueError):
            generate_master_tags(doc, 0, HeuristicTagger())

    def test_fallback_to_title_then_id(self):
        doc = Document(doc_id="d-1", text="...", title="Nice Title")
        assert master_or_fallback(doc, []) == ["Nice Title"]
        doc2 = Document(doc_id="d-2", text="...")
        assert master_or_fallback(doc2, []) == ["d 2"]
        assert master_or_fallback(doc2, ["kept"]) == ["kept"]


class TestGenerateParagraphTags:
    def test_heuristic_three_tags(self):
        text = ("The quarterly budget meeting reviewed budget overruns. "
                "Budget discipline improved.")
        tags = generate_paragraph_tags(chunk_of(text), HeuristicTagger())
        assert tags == ["budget", "discipline", "improved"]

    def test_pure_punctuation_falls_back_to_raw_token_or_empty(self):
        # No alphanumeric token at all: no tag, flagged for review upstream.
        assert generate_paragraph_tags(chunk_of("!!! ??? ..."), HeuristicTagger()) == []

    def test_stopword_only_chunk_falls_back_to_raw_token(self):
        tags = generate_paragraph_tags(chunk_of("the and with of"), HeuristicTagger())
        assert tags == ["and"]

    def test_llm_tagger_retries_then_succeeds(self):
        client = ScriptedCompletionClient(queue=["not json", '["Cash Flow", "Audit", "Finance"]'])
        tagger = LlmTagger(client, load_templates())
        tags = generate_paragraph_tags(chunk_of("cash flow statement"), tagger)
        assert tags == ["Cash Flow", "Audit", "Finance"]
        assert len(client.calls) == 2
        assert "ONLY the JSON array" in client.calls[1][1]

    def test_llm_tagger_hard_error_after_retry_names_chunk(self):
        client = ScriptedCompletionClient(default="still not json")
        tagger = LlmTagger(client, load_templates())
        with pytest.raises(TaggingError, match="d#0"):
            generate_paragraph_tags(chunk_of("cash flow"), tagger)


class TestBuildPath:
    def test_master_then_paragraph_order(self):
        path = build_path(["Arta Banking Group", "company profile"],
                          ["universal banking services", "financial firm"])
        assert path.tags() == ("Arta Banking Group", "company profile",
                               "universal banking services", "financial firm")
        assert path.display() == ("Arta Banking Group → company profile → "
                                  "universal banking services → financial firm")

    def test_paragraph_duplicate_of_master_dropped(self):
        path = build_path(["Energy", "solar"], ["SOLAR", "grid"])
        assert path.paragraph == ("grid",)

    def test_empty_paragraph_allowed(self):
        path = build_path(["only master"], [])
        assert path.tags() == ("only master",)

    def test_empty_master_rejected(self):
        with pytest.raises(ValueError):
            build_path([], ["p"])

    def test_has_tag_case_insensitive(self):
        path = SemanticPath(("Alpha",), ("beta",))
        assert path.has_tag("alpha") and path.has_tag("BETA")
        assert not path.has_tag("gamma")
