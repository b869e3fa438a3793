"""Baseline extractive reader and answer-length behavior."""

import numpy as np
import pytest

from sciqa.reader import (
    STOPWORDS,
    STOPWORDS_VERSION,
    answer_length,
    baseline_extract,
)

from oracles import brute_force_windows


class TestBaselineExtract:
    def test_worked_example(self):
        question = "incubation period of the virus"
        context = "the incubation period is 14 days"
        spans = baseline_extract(question, context, window_tokens=3, top_k=1)
        assert len(spans) == 1
        top = spans[0]
        assert top.score == pytest.approx(2 / 3)
        assert "incubation period" in top.text
        # and the whole ranking agrees with brute force
        expected = brute_force_windows(question, context, 3, 1, STOPWORDS)
        assert (top.text, top.char_start, top.char_end, top.score) == expected[0]

    def test_no_content_overlap_falls_back_to_earliest(self):
        question = "what is it"  # all stopwords
        context = "unrelated words fill this context"
        spans = baseline_extract(question, context, window_tokens=4, top_k=2)
        assert all(span.score == 0.0 for span in spans)
        assert spans[0].char_start == 0
        assert spans[0].text == "unrelated"  # shortest span at the earliest start

    def test_top_k_bound(self):
        spans = baseline_extract("virus", "virus virus virus virus", window_tokens=2, top_k=1)
        assert len(spans) <= 1

    def test_offsets_reconstruct_text(self):
        question = "fever duration after treatment"
        context = "The fever duration was shorter after early treatment in most patients."
        for span in baseline_extract(question, context, window_tokens=5, top_k=3):
            assert context[span.char_start:span.char_end] == span.text
            assert span.char_start < span.char_end

    def test_kept_spans_do_not_overlap(self):
        question = "virus transmission rate"
        context = "the virus transmission rate rose while the virus spread and transmission continued"
        spans = baseline_extract(question, context, window_tokens=4, top_k=3)
        ordered = sorted(spans, key=lambda s: s.char_start)
        for left, right in zip(ordered, ordered[1:]):
            assert left.char_end <= right.char_start

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(23)
        words = ["virus", "fever", "days", "mask", "trial", "dose", "cell", "the", "of", "rate"]
        for _ in range(50):
            q_size = int(rng.integers(1, 6))
            c_size = int(rng.integers(1, 40))
            question = " ".join(rng.choice(words, size=q_size))
            context = " ".join(rng.choice(words, size=c_size))
            w = int(rng.integers(1, 6))
            k = int(rng.integers(1, 4))
            got = [
                (s.text, s.char_start, s.char_end, s.score)
                for s in baseline_extract(question, context, window_tokens=w, top_k=k)
            ]
            assert got == brute_force_windows(question, context, w, k, STOPWORDS)

    def test_deterministic(self):
        question = "antibody response duration"
        context = "antibody response lasted for months while the duration varied by age group"
        first = baseline_extract(question, context)
        second = baseline_extract(question, context)
        assert first == second

    def test_empty_context_rejected(self):
        with pytest.raises(ValueError):
            baseline_extract("question", "... !!!", window_tokens=3, top_k=1)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            baseline_extract("q", "some context", window_tokens=0, top_k=1)


class TestStopwords:
    def test_fixed_and_versioned(self):
        assert len(STOPWORDS) == 40
        assert STOPWORDS_VERSION == 1
        assert {"a", "an", "the", "of", "what"} <= STOPWORDS


class TestAnswerLength:
    def test_two_tokens(self):
        assert answer_length("14 days") == 2

    def test_empty(self):
        assert answer_length("") == 0

    def test_six_tokens(self):
        assert answer_length("the incubation period is 14 days") == 6

    def test_uses_corpus_tokenizer(self):
        # hyphen splits under the corpus tokenizer
        assert answer_length("COVID-19") == 2
