import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcsum.errors import DataError
from tcsum.textdata import (Budget, ClusterRecord, EmbeddingTable, LabeledDoc, embed_token, load_embeddings,
                            read_classification_corpus, read_cluster_corpus, save_embeddings, sentence_from_text,
                            tokenize, write_classification_corpus, write_cluster_corpus)


def toks(sentences):
    return [list(s.tokens) for s in sentences]


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("   \n") == []

    def test_two_sentences(self):
        assert toks(tokenize("The cat sat. It slept!")) == [["the", "cat", "sat", "."], ["it", "slept", "!"]]

    def test_abbreviation_does_not_split(self):
        assert toks(tokenize("U.S. aid rose")) == [["u.s.", "aid", "rose"]]

    def test_other_abbreviations(self):
        out = toks(tokenize("Mr. Smith met Dr. Jones on St. Mark street. Then left."))
        assert len(out) == 2
        assert out[0][:2] == ["mr.", "smith"]

    def test_terminal_run_stays_together(self):
        assert toks(tokenize("Really?! Yes.")) == [["really", "?", "!"], ["yes", "."]]

    def test_decimal_not_a_boundary(self):
        assert toks(tokenize("It rose 3.5 percent. Fine.")) == [["it", "rose", "3.5", "percent", "."], ["fine", "."]]

    def test_source_text_kept(self):
        (s,) = tokenize("Hello World.")
        assert s.source_text == "Hello World."

    @settings(max_examples=1000, deadline=None)
    @given(st.text(alphabet="abcXY .,!?'-", max_size=40))
    def test_retokenizing_tokens_is_idempotent(self, text):
        first = [t for s in tokenize(text) for t in s.tokens]
        again = [t for s in tokenize(" ".join(first)) for t in s.tokens]
        assert again == first


class TestEmbeddings:
    def write(self, tmp_path, body):
        p = tmp_path / "emb.txt"
        p.write_text(body, encoding="utf-8")
        return p

    def test_load_small(self, tmp_path):
        t = load_embeddings(self.write(tmp_path, "2 3\nfoo 1 2 3\nbar 0.5 -1 0\n"))
        assert t.dim == 3 and len(t) == 2
        np.testing.assert_array_equal(embed_token(t, "foo"), [1.0, 2.0, 3.0])

    def test_short_row_names_line(self, tmp_path):
        with pytest.raises(DataError, match="line 3"):
            load_embeddings(self.write(tmp_path, "2 3\nfoo 1 2 3\nbar 1 2\n"))

    def test_bad_header(self, tmp_path):
        with pytest.raises(DataError, match="line 1"):
            load_embeddings(self.write(tmp_path, "3\nfoo 1 2 3\n"))

    def test_non_numeric(self, tmp_path):
        with pytest.raises(DataError, match="line 2"):
            load_embeddings(self.write(tmp_path, "1 2\nfoo 1 x\n"))

    def test_duplicate_keeps_last(self, tmp_path):
        with pytest.warns(UserWarning, match="duplicate"):
            t = load_embeddings(self.write(tmp_path, "2 1\na 1\na 2\n"))
        assert len(t) == 1 and t.lookup("a")[0] == 2.0

    def test_round_trip(self, tmp_path, small_corpus):
        _, _, table = small_corpus
        save_embeddings(table, tmp_path / "e.txt")
        assert load_embeddings(tmp_path / "e.txt") == table

    def test_oov_deterministic_and_distinct(self, tiny_table):
        a1 = embed_token(tiny_table, "zebra")
        a2 = EmbeddingTable(["x"], np.zeros((1, 3))).lookup("zebra")
        b = embed_token(tiny_table, "yak")
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)
        assert np.all(np.abs(a1) <= 0.1) and np.any(a1 != 0)

    def test_vectors_read_only(self, tiny_table):
        with pytest.raises(ValueError):
            tiny_table.vectors[0, 0] = 1.0

    def test_rows_mixes_known_and_unknown(self, tiny_table):
        r = tiny_table.rows(["cat", "zebra"])
        np.testing.assert_array_equal(r[0], tiny_table.lookup("cat"))
        np.testing.assert_array_equal(r[1], tiny_table.lookup("zebra"))


class TestCorpora:
    def test_empty_files(self, tmp_path):
        (tmp_path / "a").write_text("")
        assert read_classification_corpus(tmp_path / "a") == ([], [])
        assert read_cluster_corpus(tmp_path / "a") == []

    def test_category_vocabulary_in_file_order(self, tmp_path):
        names = ["biography", "disaster", "politics", "business", "culture", "health", "law",
                 "society", "science", "sports", "international"]
        lines = [json.dumps({"id": f"d{i}", "category": names[(i * 7) % 11], "text": "Some words here."})
                 for i in range(22)]
        (tmp_path / "c.jsonl").write_text("\n".join(lines) + "\n")
        docs, vocab = read_classification_corpus(tmp_path / "c.jsonl")
        assert len(docs) == 22
        assert vocab == list(dict.fromkeys(names[(i * 7) % 11] for i in range(22)))
        assert len(vocab) == 11

    def test_unknown_category_rejected(self, tmp_path):
        (tmp_path / "c.jsonl").write_text(json.dumps({"id": "x", "category": "zzz", "text": "a."}) + "\n")
        with pytest.raises(DataError, match="'x'"):
            read_classification_corpus(tmp_path / "c.jsonl", categories=["a", "b"])

    def cluster_line(self, **kw):
        rec = {"id": "c1", "category": None, "documents": [["One sentence.", "Two here."]],
               "references": ["One sentence."], "budget": {"unit": "words", "value": 5}}
        rec.update(kw)
        return json.dumps(rec) + "\n"

    def test_cluster_fields_validated(self, tmp_path):
        p = tmp_path / "k.jsonl"
        for bad in [dict(extra=1), dict(budget={"unit": "lines", "value": 3}), dict(budget={"unit": "words", "value": 0}),
                    dict(documents="nope"), dict(references=[1])]:
            p.write_text(self.cluster_line(**bad))
            with pytest.raises(DataError, match="c1"):
                read_cluster_corpus(p)

    def test_cluster_without_references_is_readable(self, tmp_path):
        p = tmp_path / "k.jsonl"
        p.write_text(self.cluster_line(references=[]))
        (c,) = read_cluster_corpus(p)
        assert c.references == ()
        assert [s.tokens for s in c.sentences()] == [("one", "sentence", "."), ("two", "here", ".")]

    def test_round_trip(self, tmp_path, small_corpus):
        docs, clusters, _ = small_corpus
        write_classification_corpus(docs, tmp_path / "d.jsonl")
        write_cluster_corpus(clusters, tmp_path / "c.jsonl")
        assert read_classification_corpus(tmp_path / "d.jsonl")[0] == docs
        assert read_cluster_corpus(tmp_path / "c.jsonl") == clusters

    @settings(max_examples=1000, deadline=None)
    @given(st.lists(st.lists(st.text(alphabet="abc de.", min_size=1, max_size=15), min_size=1, max_size=3),
                    min_size=1, max_size=3),
           st.sampled_from(["words", "bytes"]), st.integers(1, 500))
    def test_cluster_round_trip_property(self, tmp_path_factory, docs, unit, value):
        documents = tuple(tuple(s for s in (sentence_from_text(t) for t in d) if s.tokens) for d in docs)
        documents = tuple(d for d in documents if d)
        if not documents:
            return
        rec = ClusterRecord("c", documents, ("ref text",), "x", Budget(unit, value))
        path = tmp_path_factory.mktemp("rt") / "c.jsonl"
        write_cluster_corpus([rec], path)
        assert read_cluster_corpus(path) == [rec]

    def test_budget_validation(self):
        with pytest.raises(DataError):
            Budget("words", -1)
        with pytest.raises(DataError):
            Budget("pages", 3)

    def test_flatten_order(self):
        a, b, c = (sentence_from_text(t) for t in ("A a.", "B b.", "C c."))
        rec = ClusterRecord("x", ((a, b), (c,)), ())
        assert rec.sentences() == [a, b, c]
