import math

import pytest

from pathrag.sparse import SparseIndex, tokenize


def reference_bm25(docs: dict[str, str], query: str, k1=1.2, b=0.75):
    """Straight-from-formula scorer, independent of SparseIndex internals."""
    token_lists = {cid: tokenize(text) for cid, text in docs.items()}
    n = len(docs)
    avgdl = sum(len(t) for t in token_lists.values()) / n if n else 0.0
    scores = {}
    for cid, tokens in token_lists.items():
        score = 0.0
        for term in sorted(set(tokenize(query))):
            tf = tokens.count(term)
            if tf == 0:
                continue
            df = sum(1 for other in token_lists.values() if term in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(tokens) / avgdl))
        if score > 0.0:
            scores[cid] = score
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


class TestBm25:
    def test_hand_computed_two_doc_example(self):
        # N=2, dl(c1)=3, dl(c2)=2, avgdl=2.5, both query terms have df=1:
        # idf = ln(1 + 1.5/1.5) = ln 2; per-term score for c1 =
        # ln2 * 2.2 / (1 + 1.2*(0.25 + 0.75*3/2.5)); two terms double it.
        index = SparseIndex()
        index.upsert("c1", "cash flow statement")
        index.upsert("c2", "revenue growth")
        hits = index.search("cash flow", 5)
        assert [cid for cid, _ in hits] == ["c1"]
        expected = 2 * math.log(2.0) * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 3 / 2.5))
        assert hits[0][1] == pytest.approx(expected, abs=1e-12)

    def test_absent_term_everywhere(self):
        index = SparseIndex()
        index.upsert("c1", "cash flow statement")
        assert index.search("zebra", 5) == []

    def test_single_doc_corpus_rank_one(self):
        index = SparseIndex()
        index.upsert("only", "net income statement")
        hits = index.search("income", 5)
        assert [cid for cid, _ in hits] == ["only"]

    def test_matches_reference_on_random_corpus(self, rng):
        words = ["cash", "flow", "revenue", "growth", "bank", "loan", "asset",
                 "debt", "cost", "margin", "sales", "tax"]
        docs = {}
        for i in range(10):
            length = int(rng.integers(3, 20))
            docs[f"c{i}"] = " ".join(rng.choice(words) for _ in range(length))
        index = SparseIndex()
        for cid, text in docs.items():
            index.upsert(cid, text)
        for _ in range(20):
            query = " ".join(rng.choice(words)
                             for _ in range(int(rng.integers(1, 4))))
            got = index.search(query, 10)
            want = reference_bm25(docs, query)[:10]
            assert [cid for cid, _ in got] == [cid for cid, _ in want]
            for (gc, gs), (wc, ws) in zip(got, want):
                assert gs == pytest.approx(ws, abs=1e-9)

    def test_duplicate_query_terms_counted_once(self):
        index = SparseIndex()
        index.upsert("c1", "cash cash cash")
        index.upsert("c2", "flow")
        single = index.search("cash", 5)
        double = index.search("cash cash", 5)
        assert single == double


class TestIncrementalUpdates:
    def test_upsert_equals_rebuild(self):
        # Updating a chunk in place must give the same observable state as
        # building a fresh index over the final texts.
        incremental = SparseIndex()
        incremental.upsert("c1", "old words about cash")
        incremental.upsert("c2", "revenue growth")
        incremental.upsert("c1", "new text about loans")

        fresh = SparseIndex()
        fresh.upsert("c1", "new text about loans")
        fresh.upsert("c2", "revenue growth")

        assert incremental.terms() == fresh.terms()
        for term in fresh.terms():
            assert incremental.postings(term) == fresh.postings(term)
        assert incremental.stats() == fresh.stats()
        assert incremental.search("cash", 5) == []
        assert incremental.search("loans", 5) == fresh.search("loans", 5)

    def test_remove_updates_stats(self):
        index = SparseIndex()
        index.upsert("c1", "a b c")
        index.upsert("c2", "d e")
        index.remove("c1")
        assert index.stats() == (1, 2.0)
        assert index.search("a", 5) == []

    def test_stats_match_recomputation_after_churn(self, rng):
        index = SparseIndex()
        words = ["cash", "flow", "loan", "debt", "cost"]
        live = set()
        for step in range(200):
            cid = f"c{int(rng.integers(0, 30))}"
            if cid in live and rng.random() < 0.3:
                index.remove(cid)
                live.discard(cid)
            else:
                text = " ".join(rng.choice(words)
                                for _ in range(int(rng.integers(1, 8))))
                index.upsert(cid, text)
                live.add(cid)
            assert index.stats() == index.recompute_stats()
        assert set(index.ids()) == live

    def test_install_matches_upsert(self):
        from collections import Counter

        a = SparseIndex()
        a.upsert("c1", "cash flow cash")
        b = SparseIndex()
        b.install("c1", Counter({"cash": 2, "flow": 1}))
        assert a.postings("cash") == b.postings("cash")
        assert a.stats() == b.stats()
