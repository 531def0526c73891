# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in kernel_py.py.

Keep the floating-point operation order identical to the pure-Python
version: outputs must be bit-for-bit equal so kernel selection can never
change results.  The extension is built with -ffp-contract=off to stop the
compiler fusing the interpolation multiply-adds.
"""

from libc.math cimport log

import numpy as np


def match_fragments(doc_ids, sum_ids):
    cdef long[::1] d = np.asarray(doc_ids, dtype=np.int64)
    cdef long[::1] s = np.asarray(sum_ids, dtype=np.int64)
    cdef Py_ssize_t nd = d.shape[0]
    cdef Py_ssize_t ns = s.shape[0]
    cdef Py_ssize_t i = 0, j, length, best_len, best_j
    cdef long first
    out = []
    while i < ns:
        best_len = 0
        best_j = -1
        first = s[i]
        for j in range(nd):
            if d[j] == first:
                length = 1
                while (i + length < ns and j + length < nd
                       and d[j + length] == s[i + length]):
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
    cdef long[::1] cont = np.asarray(cont_ids, dtype=np.int64)
    cdef long[::1] rows = np.asarray(ctx_rows, dtype=np.int64)
    cdef long[::1] prompt = np.asarray(prompt_ids, dtype=np.int64)
    cdef long long[:, ::1] cnt_m = np.ascontiguousarray(counts, dtype=np.int64)
    cdef long long[::1] tot_v = np.ascontiguousarray(totals, dtype=np.int64)

    cdef Py_ssize_t T = cont.shape[0]
    cdef int V = vocab_size
    cdef double a = alpha
    cdef double l = lam
    cdef int corder = cache_order
    cdef long bos = bos_id
    cdef bint greedy_wanted = bool(want_greedy)
    cdef bint use_cache = l > 0.0

    surp_arr = np.zeros(T, dtype=np.float64)
    greedy_arr = np.zeros(T, dtype=np.uint8)
    cdef double[::1] surp = surp_arr
    cdef unsigned char[::1] gre = greedy_arr

    # Cache state.  The bigram cache rows live in a dict of int32 arrays so
    # sparse vocab use stays cheap; counts are identical to the Python twin.
    cdef long[::1] ccnt
    cdef long[::1] btot
    cdef int[::1] crow_v
    cdef long h_len = 0, y = 0, prev, w
    cdef Py_ssize_t t, k
    cdef int x, x_true, best_x
    cdef long row_idx
    cdef long c_cnt
    cdef double ng_den, c_den, p, p_true, best_p, sv
    cdef bint have_crow

    ccnt_arr = None
    btot_arr = None
    brow = {}
    if use_cache:
        if corder == 1:
            ccnt_arr = np.zeros(V, dtype=np.int64)
            ccnt = ccnt_arr
            for k in range(prompt.shape[0]):
                ccnt[prompt[k]] += 1
            h_len = prompt.shape[0]
        else:
            btot_arr = np.zeros(V, dtype=np.int64)
            btot = btot_arr
            prev = bos
            for k in range(prompt.shape[0]):
                w = prompt[k]
                row_obj = brow.get(prev)
                if row_obj is None:
                    row_obj = np.zeros(V, dtype=np.int32)
                    brow[prev] = row_obj
                crow_v = row_obj
                crow_v[w] += 1
                btot[prev] += 1
                prev = w
            y = prev

    for t in range(T):
        x_true = <int> cont[t]
        row_idx = rows[t]
        if row_idx >= 0:
            ng_den = <double> tot_v[row_idx] + a * V
        else:
            ng_den = a * V

        have_crow = False
        c_den = 0.0
        if use_cache:
            if corder == 1:
                c_den = <double> (h_len + V)
            else:
                c_den = <double> (btot[y] + V)
                row_obj = brow.get(y)
                if row_obj is not None:
                    crow_v = row_obj
                    have_crow = True

        if greedy_wanted:
            best_p = -1.0
            best_x = -1
            p_true = 0.0
            for x in range(V):
                if row_idx >= 0:
                    p = (<double> cnt_m[row_idx, x] + a) / ng_den
                else:
                    p = a / ng_den
                if use_cache:
                    if corder == 1:
                        c_cnt = ccnt[x]
                    else:
                        c_cnt = crow_v[x] if have_crow else 0
                    p = l * ((<double> c_cnt + 1.0) / c_den) + (1.0 - l) * p
                if p > best_p:
                    best_p = p
                    best_x = x
                if x == x_true:
                    p_true = p
            gre[t] = 1 if best_x == x_true else 0
        else:
            if row_idx >= 0:
                p_true = (<double> cnt_m[row_idx, x_true] + a) / ng_den
            else:
                p_true = a / ng_den
            if use_cache:
                if corder == 1:
                    c_cnt = ccnt[x_true]
                else:
                    c_cnt = crow_v[x_true] if have_crow else 0
                p_true = l * ((<double> c_cnt + 1.0) / c_den) + (1.0 - l) * p_true

        sv = -log(p_true)
        surp[t] = sv if sv > 0.0 else 0.0

        if use_cache:
            if corder == 1:
                ccnt[x_true] += 1
                h_len += 1
            else:
                row_obj = brow.get(y)
                if row_obj is None:
                    row_obj = np.zeros(V, dtype=np.int32)
                    brow[y] = row_obj
                crow_v = row_obj
                crow_v[x_true] += 1
                btot[y] += 1
                y = x_true

    return surp_arr.tolist(), [bool(v) for v in greedy_arr.tolist()]
