"""Compare the compiled scoring kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--docs N] [--sentences M]

Builds a synthetic corpus, trains the reference backend, then times
full-document metric evaluation and fragment matching under each kernel
in a subprocess (kernel selection happens at import, so each run gets a
fresh interpreter).  The surprisal digests must match bit-for-bit across
kernels; a mismatch is a bug, not a tolerance issue.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import subprocess
import sys
import time

WORDS = (
    "market report storm flood budget committee season coach vote margin "
    "rally index traders forecast winds profit goal defense plan critics "
    "monday approved passed officials local groups focus week affect said"
).split()


def corpus(n_docs: int, n_sentences: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    docs = []
    for _ in range(n_docs):
        sentences = []
        for _ in range(n_sentences):
            k = rng.randrange(5, 9)
            words = " ".join(rng.choice(WORDS) for _ in range(k))
            sentences.append(words.capitalize() + ".")
        docs.append(" ".join(sentences))
    return docs


def run_one(args) -> None:
    from shannoneval import Document, ScoringConfig, evaluate, train_ngram
    from shannoneval import _kernels
    from shannoneval.textproc import word_tokens

    docs = corpus(args.docs, args.sentences, args.seed)
    backend = train_ngram(docs)
    config = ScoringConfig()

    digest = hashlib.sha256()
    start = time.perf_counter()
    for i, text in enumerate(docs):
        doc = Document.from_text(f"d{i}", text)
        summary = " ".join(text.split()[:12])
        result = evaluate(doc, summary, config, backend)
        for profile in result.profiles.values():
            for scores in profile.per_sentence:
                for s in scores.surprisals:
                    digest.update(repr(s).encode())
    t_score = time.perf_counter() - start

    token_lists = [word_tokens(text) for text in docs]
    start = time.perf_counter()
    for _ in range(50):
        for toks in token_lists:
            ids = {w: i for i, w in enumerate(dict.fromkeys(toks))}
            doc_ids = [ids[w] for w in toks]
            sum_ids = doc_ids[: len(doc_ids) // 3]
            _kernels.match_fragments(doc_ids, sum_ids)
    t_frag = time.perf_counter() - start

    print(
        json.dumps(
            {
                "kernel": _kernels.kernel_name,
                "t_score": t_score,
                "t_frag": t_frag,
                "digest": digest.hexdigest(),
            }
        )
    )


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--docs", type=int, default=40)
    parser.add_argument("--sentences", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--one", action="store_true", help="timed child mode")
    args = parser.parse_args()

    if args.one:
        run_one(args)
        return

    results = {}
    for kernel in ("cy", "py"):
        env = dict(os.environ, SHANNONEVAL_KERNEL=kernel)
        cmd = [
            sys.executable,
            os.path.abspath(__file__),
            "--one",
            "--docs",
            str(args.docs),
            "--sentences",
            str(args.sentences),
            "--seed",
            str(args.seed),
        ]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            if kernel == "cy":
                print("compiled kernel unavailable; skipping comparison")
                continue
            raise SystemExit(proc.returncode)
        results[kernel] = json.loads(proc.stdout.strip().splitlines()[-1])
        r = results[kernel]
        print(
            f"{r['kernel']:7s} scoring {r['t_score']:8.3f}s   "
            f"fragments {r['t_frag']:8.3f}s"
        )

    if len(results) == 2:
        assert results["cy"]["digest"] == results["py"]["digest"], (
            "kernel outputs differ: "
            f"{results['cy']['digest']} vs {results['py']['digest']}"
        )
        print("surprisal digests identical across kernels")
        print(
            "speedup: scoring "
            f"{results['py']['t_score'] / results['cy']['t_score']:.1f}x, "
            f"fragments {results['py']['t_frag'] / results['cy']['t_frag']:.1f}x"
        )


if __name__ == "__main__":
    main()
