"""Pure-Python scoring kernels.

These are the semantic reference for the optional Cython twins in
``_kernel_cy.pyx``.  The two implementations must stay bit-identical: both
perform the same floating-point operations in the same order, so tests can
assert exact equality between them and batch outputs do not depend on which
kernel was selected at import time.
"""

from __future__ import annotations

from math import log


def match_fragments(doc_ids, sum_ids):
    """Greedy longest-match fragments between two id sequences.

    Returns a list of (doc_start, sum_start, length) triples.  At each
    summary position the longest contiguous match wins, ties broken by the
    earliest document position; unmatched positions advance by one.
    """
    nd = len(doc_ids)
    ns = len(sum_ids)
    out = []
    i = 0
    while i < ns:
        best_len = 0
        best_j = -1
        first = sum_ids[i]
        for j in range(nd):
            if doc_ids[j] == first:
                length = 1
                while (
                    i + length < ns
                    and j + length < nd
                    and doc_ids[j + length] == sum_ids[i + length]
                ):
                    length += 1
                if length > best_len:
                    best_len = length
                    best_j = j
        if best_len > 0:
            out.append((best_j, i, best_len))
            i += best_len
        else:
            i += 1
    return out


def score_tokens(
    cont_ids,
    ctx_rows,
    counts,
    totals,
    prompt_ids,
    vocab_size,
    alpha,
    lam,
    cache_order,
    bos_id,
    want_greedy,
):
    """Score continuation tokens under the interpolated n-gram + cache model.

    cont_ids:    continuation token ids (len T)
    ctx_rows:    per position, row index into ``counts`` for the n-gram
                 context, or -1 when the context was never seen in training
    counts:      int64 [rows, vocab] n-gram successor counts
    totals:      int64 [rows] per-context totals
    prompt_ids:  prompt token ids seeding the cache
    cache_order: 1 (unigram cache) or 2 (bigram cache over [BOS] + history)

    Per position: p = lam * p_cache + (1 - lam) * p_ngram, where p_ngram is
    add-alpha smoothed and p_cache is add-one smoothed over the prompt plus
    the already-scored continuation prefix.  Returns (surprisals, greedy)
    as plain lists; greedy ties resolve to the lowest token id because the
    scan runs in ascending id order with a strict ``>`` update.
    """
    T = len(cont_ids)
    V = vocab_size
    surprisals = [0.0] * T
    greedy = [False] * T

    use_cache = lam > 0.0
    if use_cache:
        if cache_order == 1:
            ccnt = [0] * V
            for w in prompt_ids:
                ccnt[w] += 1
            h_len = len(prompt_ids)
        else:
            brow = {}  # prev id -> [V] successor counts
            btot = [0] * V  # prev id -> total bigrams starting there
            prev = bos_id
            for w in prompt_ids:
                row = brow.get(prev)
                if row is None:
                    row = [0] * V
                    brow[prev] = row
                row[w] += 1
                btot[prev] += 1
                prev = w
            y = prev

    for t in range(T):
        x_true = cont_ids[t]
        row_idx = ctx_rows[t]
        if row_idx >= 0:
            ng_den = totals[row_idx] + alpha * V
            ng_row = counts[row_idx].tolist() if want_greedy else None
        else:
            ng_den = alpha * V
            ng_row = None

        if use_cache:
            if cache_order == 1:
                c_den = float(h_len + V)
                crow = ccnt
            else:
                c_den = float(btot[y] + V)
                crow = brow.get(y)

        if want_greedy:
            best_p = -1.0
            best_x = -1
            p_true = 0.0
            for x in range(V):
                cnt = ng_row[x] if ng_row is not None else 0
                p = (cnt + alpha) / ng_den
                if use_cache:
                    cc = crow[x] if crow is not None else 0
                    p = lam * ((cc + 1.0) / c_den) + (1.0 - lam) * p
                if p > best_p:
                    best_p = p
                    best_x = x
                if x == x_true:
                    p_true = p
            greedy[t] = best_x == x_true
        else:
            cnt = int(counts[row_idx, x_true]) if row_idx >= 0 else 0
            p_true = (cnt + alpha) / ng_den
            if use_cache:
                cc = crow[x_true] if crow is not None else 0
                p_true = lam * ((cc + 1.0) / c_den) + (1.0 - lam) * p_true

        s = -log(p_true)
        surprisals[t] = s if s > 0.0 else 0.0

        if use_cache:
            if cache_order == 1:
                ccnt[x_true] += 1
                h_len += 1
            else:
                row = brow.get(y)
                if row is None:
                    row = [0] * V
                    brow[y] = row
                row[x_true] += 1
                btot[y] += 1
                y = x_true

    return surprisals, greedy


def candidate_surprisals(
    cont_ids,
    ctx_rows,
    counts,
    totals,
    prompt_ids,
    vocab_size,
    alpha,
    lam,
    cache_order,
    bos_id,
    position,
):
    """Full candidate distribution (as surprisals) at one continuation
    position, replaying the cache exactly as score_tokens would.

    Test-facing: used to check that exp(-surprisal) sums to 1 over the
    vocabulary and that greedy flags point at the candidate minimum.
    """
    V = vocab_size
    use_cache = lam > 0.0
    if use_cache:
        if cache_order == 1:
            ccnt = [0] * V
            for w in prompt_ids:
                ccnt[w] += 1
            h_len = len(prompt_ids)
        else:
            brow = {}
            btot = [0] * V
            prev = bos_id
            for w in prompt_ids:
                row = brow.setdefault(prev, [0] * V)
                row[w] += 1
                btot[prev] += 1
                prev = w
            y = prev
        for t in range(position):
            x_true = cont_ids[t]
            if cache_order == 1:
                ccnt[x_true] += 1
                h_len += 1
            else:
                row = brow.setdefault(y, [0] * V)
                row[x_true] += 1
                btot[y] += 1
                y = x_true

    row_idx = ctx_rows[position]
    if row_idx >= 0:
        ng_den = totals[row_idx] + alpha * V
        ng_row = counts[row_idx].tolist()
    else:
        ng_den = alpha * V
        ng_row = None
    if use_cache:
        if cache_order == 1:
            c_den = float(h_len + V)
            crow = ccnt
        else:
            c_den = float(btot[y] + V)
            crow = brow.get(y)

    out = [0.0] * V
    for x in range(V):
        cnt = ng_row[x] if ng_row is not None else 0
        p = (cnt + alpha) / ng_den
        if use_cache:
            cc = crow[x] if crow is not None else 0
            p = lam * ((cc + 1.0) / c_den) + (1.0 - lam) * p
        s = -log(p)
        out[x] = s if s > 0.0 else 0.0
    return out
