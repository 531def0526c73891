"""Scorer semantics checked against direct forward-pass oracles.

The oracle recomputes surprisals from the raw model: build the id
sequence by hand, run one forward pass, take the positionwise
log-softmax.  Anything the scorer promises (token tiling, truncation,
greedy flags, exact values) is compared against that.
"""

import math
import threading

import pytest
import torch

from lmsidecar import EmptyContinuation, RequestTooLong

DOC = (
    "ballast anchor gull cargo convoy customs. skipper tide skipper cargo "
    "crane anchor. berth anchor ballast lantern convoy vessel."
)
SENTENCE = "skipper tide skipper cargo crane anchor."


def oracle_surprisals(scorer, ids):
    """Surprisal of ids[1:] from one raw forward pass over ids."""
    with torch.no_grad():
        logits = scorer.model(torch.tensor([ids], dtype=torch.long)).logits[0]
    logprobs = torch.log_softmax(logits.float(), dim=-1)
    return [float(-logprobs[pos - 1][tok]) for pos, tok in enumerate(ids) if pos > 0]


def encode(scorer, text):
    return scorer.tokenizer(text, add_special_tokens=False)["input_ids"]


class TestTokenTiling:
    @pytest.mark.parametrize(
        "text",
        [
            SENTENCE,
            "harbor.",
            "  doubled  spaces  keep their bytes  ",
            "line one\nline two\n",
            "naïve café ☕ — bytes outside the corpus",
            "tabs\tand\r\nwindows endings",
        ],
    )
    def test_tokens_tile_continuation(self, scorer, text):
        out = scorer.score("", text)
        assert "".join(out.tokens) == text
        assert len(out.tokens) == len(out.surprisals)

    def test_surprisals_nonnegative_finite_no_negative_zero(self, scorer):
        out = scorer.score(DOC + "\n", SENTENCE)
        for s in out.surprisals:
            assert math.isfinite(s)
            assert s >= 0.0
            assert math.copysign(1.0, s) == 1.0


class TestExactness:
    def test_repeat_calls_bitwise_identical(self, scorer):
        runs = [scorer.score(DOC + "\n", SENTENCE, want_greedy=True) for _ in range(3)]
        for other in runs[1:]:
            assert other.surprisals == runs[0].surprisals
            assert other.greedy_correct == runs[0].greedy_correct

    def test_single_token_matches_oracle(self, scorer):
        (tok_id,) = encode(scorer, "harbor")
        out = scorer.score("", "harbor")
        (expected,) = oracle_surprisals(scorer, [scorer._bos, tok_id])
        assert out.surprisals == (expected,)

    def test_full_request_matches_oracle(self, scorer):
        prompt_ids = encode(scorer, DOC + "\n")
        cont_ids = encode(scorer, SENTENCE)
        out = scorer.score(DOC + "\n", SENTENCE)
        expected = oracle_surprisals(scorer, [scorer._bos] + prompt_ids + cont_ids)
        assert list(out.surprisals) == expected[len(prompt_ids) :]

    def test_chain_rule_at_whitespace_boundaries(self, scorer):
        # splitting before a space keeps both halves on pre-token boundaries,
        # so summed surprisal must agree with the unsplit request
        prompt = DOC + "\n"
        whole = sum(scorer.score(prompt, SENTENCE).surprisals)
        cuts = [i for i, ch in enumerate(SENTENCE) if ch == " "]
        assert cuts
        for cut in cuts:
            head, tail = SENTENCE[:cut], SENTENCE[cut:]
            split = sum(scorer.score(prompt, head).surprisals) + sum(
                scorer.score(prompt + head, tail).surprisals
            )
            assert split == pytest.approx(whole, abs=1e-4)

    def test_prompt_with_document_lowers_surprisal(self, scorer):
        sentences = [s + "." for s in DOC.split(". ")]
        sentences[-1] = sentences[-1].rstrip(".") + "."
        cold = sum(sum(scorer.score("", s).surprisals) for s in sentences)
        helped = sum(sum(scorer.score(DOC + "\n", s).surprisals) for s in sentences)
        assert helped < cold


class TestGreedy:
    def test_greedy_flags_match_argmax_oracle(self, scorer):
        prompt_ids = encode(scorer, DOC + "\n")
        cont_ids = encode(scorer, SENTENCE)
        ids = [scorer._bos] + prompt_ids + cont_ids
        with torch.no_grad():
            logits = scorer.model(torch.tensor([ids], dtype=torch.long)).logits[0]
        logprobs = torch.log_softmax(logits.float(), dim=-1)
        first = 1 + len(prompt_ids)
        expected = tuple(
            int(torch.argmax(logprobs[first + j - 1])) == tok
            for j, tok in enumerate(cont_ids)
        )
        out = scorer.score(DOC + "\n", SENTENCE, want_greedy=True)
        assert out.greedy_correct == expected

    def test_greedy_omitted_unless_requested(self, scorer):
        assert scorer.score("", SENTENCE).greedy_correct is None

    def test_most_likely_first_token_is_greedy_correct(self, scorer):
        # pick the argmax continuation of a bare BOS, then score it
        with torch.no_grad():
            logits = scorer.model(
                torch.tensor([[scorer._bos]], dtype=torch.long)
            ).logits[0]
        top_id = int(torch.argmax(torch.log_softmax(logits.float(), dim=-1)[0]))
        top_text = scorer.tokenizer.decode([top_id])
        assert top_text.strip()
        out = scorer.score("", top_text, want_greedy=True)
        assert out.greedy_correct == (True,) * len(out.greedy_correct)


class TestLimits:
    def test_empty_continuation_rejected(self, scorer):
        with pytest.raises(EmptyContinuation):
            scorer.score(DOC, "")
        with pytest.raises(EmptyContinuation):
            scorer.score(DOC, " \n\t ")

    def test_continuation_beyond_context_rejected(self, scorer):
        too_long = "harbor " * scorer.context_limit
        with pytest.raises(RequestTooLong):
            scorer.score("", too_long)

    def test_short_prompt_not_marked_truncated(self, scorer):
        assert scorer.score(DOC + "\n", SENTENCE).truncated is False

    def test_long_prompt_left_truncated_to_match_oracle(self, scorer):
        long_prompt = " ".join(["quay"] * (scorer.context_limit + 20))
        cont_ids = encode(scorer, "harbor.")
        budget = scorer.context_limit - 1 - len(cont_ids)
        prompt_ids = encode(scorer, long_prompt)
        assert len(prompt_ids) > budget

        out = scorer.score(long_prompt, "harbor.")
        assert out.truncated is True
        expected = oracle_surprisals(
            scorer, [scorer._bos] + prompt_ids[-budget:] + cont_ids
        )
        assert list(out.surprisals) == expected[budget:]

    def test_prompt_exactly_at_budget_kept_whole(self, scorer):
        cont_ids = encode(scorer, "harbor.")
        budget = scorer.context_limit - 1 - len(cont_ids)
        prompt = " ".join(["quay"] * budget)
        assert len(encode(scorer, prompt)) == budget
        assert scorer.score(prompt, "harbor.").truncated is False


class TestConcurrency:
    def test_parallel_identical_requests_agree(self, scorer):
        results = [None] * 8

        def work(slot):
            results[slot] = scorer.score(DOC + "\n", SENTENCE).surprisals

        threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)


def test_model_metadata(scorer):
    assert scorer.model_id == "tiny-model"
    assert scorer.context_limit == 128
